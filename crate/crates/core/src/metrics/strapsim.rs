//! Residual-aware greedy matching.
//!
//! All `(i, j)` pairs are visited once in order of descending `S[i][j]`
//! (ties by ascending `i`, then `j`). Each visited pair whose two elements
//! still carry mass moves `m = min(w_x(i), w_y(j))` across, scores `m * S[i][j]`,
//! and debits `m` from both sides. The scan stops once either set is
//! exhausted; whatever weight is left on both sides is the residual.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::SimilarityMatrix;
use crate::set::{WeightedSet, MASS_EPSILON};
use crate::trace::{MatchStep, MatchTrace, MetricResult};

fn check_shape(x: &WeightedSet, y: &WeightedSet, s: &SimilarityMatrix) -> Result<()> {
    let expected = (x.len(), y.len());
    if s.shape() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: s.shape(),
        });
    }
    Ok(())
}

/// Greedy matching with the default threshold: only pairs with `S > 0` move mass.
pub fn strapsim(x: &WeightedSet, y: &WeightedSet, s: &SimilarityMatrix) -> Result<MatchTrace> {
    strapsim_with_threshold(x, y, s, 0.0)
}

/// Greedy matching restricted to pairs with `S[i][j] > min_match_sim`.
///
/// `s` must already be aligned to `x` × `y` (see [`crate::align_matrix`]).
pub fn strapsim_with_threshold(
    x: &WeightedSet,
    y: &WeightedSet,
    s: &SimilarityMatrix,
    min_match_sim: f64,
) -> Result<MatchTrace> {
    check_shape(x, y, s)?;
    let (rows, cols) = s.shape();

    let mut pairs: Vec<(f64, u32, u32)> = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for (j, &v) in s.row(i).iter().enumerate() {
            if v > min_match_sim {
                pairs.push((v, i as u32, j as u32));
            }
        }
    }
    pairs.sort_unstable_by(|a, b| match b.0.total_cmp(&a.0) {
        Ordering::Equal => (a.1, a.2).cmp(&(b.1, b.2)),
        ord => ord,
    });

    let mut rx = x.weights().to_vec();
    let mut ry = y.weights().to_vec();
    let mut left_x = x.total_weight();
    let mut left_y = y.total_weight();
    let mut steps = Vec::new();
    let mut total_score = 0.0;

    for (score, i, j) in pairs {
        if left_x <= MASS_EPSILON || left_y <= MASS_EPSILON {
            break;
        }
        let (i, j) = (i as usize, j as usize);
        if rx[i] <= MASS_EPSILON || ry[j] <= MASS_EPSILON {
            continue;
        }
        let mass = rx[i].min(ry[j]);
        rx[i] -= mass;
        ry[j] -= mass;
        left_x -= mass;
        left_y -= mass;
        let contribution = mass * score;
        total_score += contribution;
        steps.push(MatchStep {
            row: i,
            col: j,
            score,
            mass,
            contribution,
        });
    }

    let total_residual = rx.iter().sum::<f64>() + ry.iter().sum::<f64>();
    Ok(MatchTrace {
        steps,
        residual_x: rx,
        residual_y: ry,
        total_score,
        total_residual,
    })
}

/// STRAPSim under exact-match similarity, evaluated in closed form:
/// the score is `sum over shared ids of min(w_x, w_y)`.
pub fn strapsim_identity_reduction(x: &WeightedSet, y: &WeightedSet) -> MetricResult {
    let shared: f64 = x
        .iter()
        .filter_map(|(id, wx)| y.weight_of(id.as_str()).map(|wy| wx.min(wy)))
        .sum();
    let residual = (x.total_weight() - shared) + (y.total_weight() - shared);
    MetricResult::new(shared, residual.max(0.0))
}
