//! Agreement between portfolio similarity and return co-movement.
//!
//! For each entity, its similarity scores to every other entity are ranked
//! against its return correlations to the same entities. The per-entity
//! Spearman coefficients are then averaged per metric.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::spearman::{pearson_correlation, spearman};
use crate::matrix::SimilarityMatrix;
use crate::metrics::{pairwise_matrix, Metric, MetricOptions};
use crate::set::WeightedSet;

/// Overlapping periods needed before a return correlation is trusted.
pub const MIN_OVERLAP: usize = 12;

/// Calendar month, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Period {
    pub year: i32,
    pub month: u8,
}

impl Period {
    pub fn new(year: i32, month: u8) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self { year, month })
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            Self { year: self.year + 1, month: 1 }
        } else {
            Self { year: self.year, month: self.month + 1 }
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Period {
    type Err = ();

    /// Strict `YYYY-MM`.
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        let b = s.as_bytes();
        if b.len() != 7 || b[4] != b'-' || !s[..4].bytes().chain(s[5..].bytes()).all(|c| c.is_ascii_digit()) {
            return Err(());
        }
        let year: i32 = s[..4].parse().map_err(|_| ())?;
        let month: u8 = s[5..].parse().map_err(|_| ())?;
        Period::new(year, month).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    entity: String,
    observations: Vec<(Period, f64)>,
}

impl ReturnSeries {
    /// Periods must be strictly increasing.
    pub fn new(entity: impl Into<String>, observations: Vec<(Period, f64)>) -> Result<Self> {
        let entity = entity.into();
        if let Some(w) = observations.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidConfig(format!(
                "return periods for `{entity}` are not strictly increasing at {}",
                w[1].0
            )));
        }
        Ok(Self { entity, observations })
    }

    pub fn entity(&self) -> &str {
        &self.entity
    }

    pub fn observations(&self) -> &[(Period, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Pearson correlation over the periods both series observe; `None` with
/// fewer than [`MIN_OVERLAP`] shared periods or a constant side.
pub fn return_correlation(a: &ReturnSeries, b: &ReturnSeries) -> Option<f64> {
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    let (oa, ob) = (a.observations(), b.observations());
    while i < oa.len() && j < ob.len() {
        match oa[i].0.cmp(&ob[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                xa.push(oa[i].1);
                xb.push(ob[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    if xa.len() < MIN_OVERLAP {
        return None;
    }
    pearson_correlation(&xa, &xb).ok().flatten()
}

/// One row of a ranking comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub metric: String,
    pub avg_rho: f64,
    pub avg_p: f64,
    /// Percent of entities with p < 0.05.
    pub pct_sig_5: f64,
    pub pct_sig_10: f64,
    pub entities: usize,
    /// Per-entity `(rho, p)`, in entity order.
    pub per_entity: Vec<(f64, f64)>,
}

/// Ranks row `i` of `scores` against row `i` of `corr`, skipping the diagonal
/// and missing correlations. An entity whose scores are all tied carries no
/// ranking information and counts as `rho = 0, p = 1`.
pub fn ranking_from_scores(metric: &str, scores: &[Vec<f64>], corr: &[Vec<Option<f64>>]) -> Result<RankingRow> {
    let n = scores.len();
    if n < 4 {
        return Err(Error::TooShort { len: n, min: 4 });
    }
    let per_entity: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            for j in (0..n).filter(|&j| j != i) {
                if let Some(c) = corr[i][j] {
                    xs.push(scores[i][j]);
                    ys.push(c);
                }
            }
            match spearman(&xs, &ys) {
                Ok(s) => Ok((s.rho, s.p_value)),
                Err(Error::ConstantInput | Error::TooShort { .. }) => Ok((0.0, 1.0)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let m = n as f64;
    Ok(RankingRow {
        metric: metric.to_string(),
        avg_rho: per_entity.iter().map(|p| p.0).sum::<f64>() / m,
        avg_p: per_entity.iter().map(|p| p.1).sum::<f64>() / m,
        pct_sig_5: 100.0 * per_entity.iter().filter(|p| p.1 < 0.05).count() as f64 / m,
        pct_sig_10: 100.0 * per_entity.iter().filter(|p| p.1 < 0.10).count() as f64 / m,
        entities: n,
        per_entity,
    })
}

/// Return-correlation matrix aligned to `sets` by label.
pub fn correlation_matrix(sets: &[WeightedSet], returns: &[ReturnSeries]) -> Result<Vec<Vec<Option<f64>>>> {
    let by_id: HashMap<&str, &ReturnSeries> = returns.iter().map(|r| (r.entity(), r)).collect();
    let series: Vec<&ReturnSeries> = sets
        .iter()
        .map(|s| {
            by_id
                .get(s.label())
                .copied()
                .ok_or_else(|| Error::MissingReturns(s.label().to_string()))
        })
        .collect::<Result<_>>()?;
    let n = series.len();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { None } else { return_correlation(series[i], series[j]) })
                .collect()
        })
        .collect())
}

/// Ranking comparison of `metrics` against return correlations.
pub fn etf_ranking_study(
    sets: &[WeightedSet],
    s: Option<&SimilarityMatrix>,
    returns: &[ReturnSeries],
    metrics: &[Metric],
    options: &MetricOptions,
) -> Result<Vec<RankingRow>> {
    if sets.len() < 4 {
        return Err(Error::TooShort { len: sets.len(), min: 4 });
    }
    let corr = correlation_matrix(sets, returns)?;
    metrics
        .iter()
        .map(|&metric| {
            let scores: Vec<Vec<f64>> = pairwise_matrix(sets, s, metric, options)?
                .into_iter()
                .map(|row| row.into_iter().map(|r| r.score).collect())
                .collect();
            ranking_from_scores(metric.name(), &scores, &corr)
        })
        .collect()
}

pub fn write_ranking_csv<W: std::io::Write>(rows: &[RankingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "avg_coefficient", "avg_p_value", "pct_significant_5", "pct_significant_10", "entities"])?;
    for r in rows {
        w.write_record([
            r.metric.clone(),
            r.avg_rho.to_string(),
            r.avg_p.to_string(),
            r.pct_sig_5.to_string(),
            r.pct_sig_10.to_string(),
            r.entities.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
