//! BERTScore-style greedy argmax matching over weighted sets.
//!
//! Every reference element is paired with its most similar candidate
//! (recall) and every candidate with its most similar reference element
//! (precision). Pair importance is the smaller of the two static weights;
//! unlike STRAPSim, weights are never consumed, so an element can be the
//! best match of many others.
//!
//! Residuals come from a separate bookkeeping pass: each positive-similarity
//! match debits its min-weight from hypothetical remaining proportions on
//! both sides (recall matches in row order, then precision matches in column
//! order). Negative remainders count as zero. The reported residual is the
//! share of each side's total weight left over.

use crate::error::{Error, Result};
use crate::matrix::SimilarityMatrix;
use crate::set::WeightedSet;
use crate::trace::{BertComponents, MetricResult};

fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, v) in values.enumerate() {
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a + b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

pub fn bertscore_like(
    x: &WeightedSet,
    y: &WeightedSet,
    s: &SimilarityMatrix,
) -> Result<MetricResult> {
    let expected = (x.len(), y.len());
    if s.shape() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: s.shape(),
        });
    }
    let (wx, wy) = (x.weights(), y.weights());
    let mut remaining_x = wx.to_vec();
    let mut remaining_y = wy.to_vec();

    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..x.len() {
        let (j, best) = argmax(s.row(i).iter().copied());
        let w = wx[i].min(wy[j]);
        num += w * best;
        den += w;
        if best > 0.0 {
            remaining_x[i] -= w;
            remaining_y[j] -= w;
        }
    }
    let recall = if den > 0.0 { num / den } else { 0.0 };

    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..y.len() {
        let (i, best) = argmax((0..x.len()).map(|i| s.get(i, j)));
        let w = wy[j].min(wx[i]);
        num += w * best;
        den += w;
        if best > 0.0 {
            remaining_y[j] -= w;
            remaining_x[i] -= w;
        }
    }
    let precision = if den > 0.0 { num / den } else { 0.0 };
    let f1 = harmonic(recall, precision);

    let unmatched = |rem: &[f64], total: f64| {
        rem.iter().map(|r| r.max(0.0)).sum::<f64>() / total
    };
    let residual_recall = unmatched(&remaining_x, x.total_weight());
    let residual_precision = unmatched(&remaining_y, y.total_weight());
    let residual_f1 = harmonic(residual_recall, residual_precision);

    Ok(MetricResult {
        score: f1,
        residual: residual_f1,
        bert: Some(BertComponents {
            recall,
            precision,
            f1,
            residual_recall,
            residual_precision,
            residual_f1,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set::ConstituentId;

    fn ids(names: &[&str]) -> Vec<ConstituentId> {
        names.iter().map(|n| ConstituentId::new(*n).unwrap()).collect()
    }

    #[test]
    fn identical_sets_are_perfect() {
        let x = WeightedSet::new("x", [("a", 0.2), ("b", 0.5), ("c", 0.3)], false).unwrap();
        #[rustfmt::skip]
        let s = SimilarityMatrix::square(
            x.ids().to_vec(),
            vec![1.0, 0.3, 0.2,
                 0.3, 1.0, 0.6,
                 0.2, 0.6, 1.0],
        )
        .unwrap();
        let r = bertscore_like(&x, &x, &s).unwrap();
        let b = r.bert.unwrap();
        assert_eq!((b.recall, b.precision, b.f1), (1.0, 1.0, 1.0));
        assert!(r.residual.abs() < 1e-12);
    }

    #[test]
    fn single_pair_half_similar() {
        let x = WeightedSet::new("x", [("a", 1.0)], false).unwrap();
        let y = WeightedSet::new("y", [("b", 1.0)], false).unwrap();
        let s = SimilarityMatrix::new(ids(&["a"]), ids(&["b"]), vec![0.5]).unwrap();
        let b = bertscore_like(&x, &y, &s).unwrap().bert.unwrap();
        assert_eq!((b.recall, b.precision, b.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn zero_similarity_gives_zero_f1() {
        let x = WeightedSet::new("x", [("a", 0.4), ("b", 0.6)], false).unwrap();
        let y = WeightedSet::new("y", [("c", 1.0)], false).unwrap();
        let s = SimilarityMatrix::new(ids(&["a", "b"]), ids(&["c"]), vec![0.0, 0.0]).unwrap();
        let r = bertscore_like(&x, &y, &s).unwrap();
        assert_eq!(r.score, 0.0);
        assert_eq!(r.residual, 1.0);
    }

    #[test]
    fn reused_candidate_is_not_consumed_in_score() {
        // Both reference elements pick the single candidate.
        let x = WeightedSet::new("x", [("a", 0.5), ("b", 0.5)], false).unwrap();
        let y = WeightedSet::new("y", [("c", 1.0)], false).unwrap();
        let s = SimilarityMatrix::new(ids(&["a", "b"]), ids(&["c"]), vec![0.8, 0.6]).unwrap();
        let b = bertscore_like(&x, &y, &s).unwrap().bert.unwrap();
        assert!((b.recall - 0.7).abs() < 1e-12);
        assert!((b.precision - 0.8).abs() < 1e-12);
        // recall debits c twice (0.5 + 0.5), precision once more with a: c ends at -0.5 -> 0
        assert!(b.residual_recall.abs() < 1e-12);
        assert!(b.residual_precision.abs() < 1e-12);
    }
}
