//! Set-level similarity metrics and their residuals.

mod bertscore;
mod jaccard;
mod strapsim;
mod transport;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bertscore::bertscore_like;
pub use jaccard::{jaccard, weighted_jaccard};
pub use strapsim::{strapsim, strapsim_identity_reduction, strapsim_with_threshold};
pub use transport::{exact_transport_oracle, TransportPlan, ORACLE_CELL_CAP};

use crate::error::{Error, Result};
use crate::matrix::{align_matrix, SimilarityMatrix};
use crate::set::WeightedSet;
use crate::trace::MetricResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Jaccard,
    WeightedJaccard,
    Bertscore,
    Strapsim,
}

impl Metric {
    /// Column order used by every report.
    pub const ALL: [Metric; 4] = [
        Metric::Jaccard,
        Metric::WeightedJaccard,
        Metric::Bertscore,
        Metric::Strapsim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Jaccard => "jaccard",
            Metric::WeightedJaccard => "weighted-jaccard",
            Metric::Bertscore => "bertscore",
            Metric::Strapsim => "strapsim",
        }
    }

    /// Whether the metric reads constituent-level similarities.
    pub fn needs_similarity(self) -> bool {
        matches!(self, Metric::Bertscore | Metric::Strapsim)
    }

    /// Evaluates the metric on `s` already aligned to `x` × `y`.
    pub fn compute_aligned(
        self,
        x: &WeightedSet,
        y: &WeightedSet,
        s: &SimilarityMatrix,
        options: &MetricOptions,
    ) -> Result<MetricResult> {
        match self {
            Metric::Jaccard => Ok(jaccard(x, y)),
            Metric::WeightedJaccard => weighted_jaccard(x, y),
            Metric::Bertscore => bertscore_like(x, y, s),
            Metric::Strapsim => {
                strapsim_with_threshold(x, y, s, options.min_match_sim).map(|t| t.to_result())
            }
        }
    }

    /// Evaluates the metric, aligning the full constituent matrix first when
    /// the metric needs one.
    pub fn compute(
        self,
        x: &WeightedSet,
        y: &WeightedSet,
        s: Option<&SimilarityMatrix>,
        options: &MetricOptions,
    ) -> Result<MetricResult> {
        match self {
            Metric::Jaccard => Ok(jaccard(x, y)),
            Metric::WeightedJaccard => weighted_jaccard(x, y),
            Metric::Bertscore | Metric::Strapsim => {
                let s = s.ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "metric `{}` needs a constituent similarity matrix",
                        self.name()
                    ))
                })?;
                let aligned = align_matrix(s, x, y)?;
                self.compute_aligned(x, y, &aligned, options)
            }
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "jaccard" => Ok(Metric::Jaccard),
            "weighted-jaccard" | "wjaccard" => Ok(Metric::WeightedJaccard),
            "bertscore" | "bert" => Ok(Metric::Bertscore),
            "strapsim" => Ok(Metric::Strapsim),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricOptions {
    /// STRAPSim only moves mass across pairs scoring strictly above this.
    pub min_match_sim: f64,
}

/// All-pairs metric matrix, `out[a][b] = metric(sets[a], sets[b])`.
///
/// Only the upper triangle is evaluated; the lower one mirrors it with
/// recall and precision swapped for the BERTScore analog.
pub fn pairwise_matrix(
    sets: &[WeightedSet],
    s: Option<&SimilarityMatrix>,
    metric: Metric,
    options: &MetricOptions,
) -> Result<Vec<Vec<MetricResult>>> {
    let n = sets.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let results: Vec<MetricResult> = pairs
        .par_iter()
        .map(|&(a, b)| {
            metric
                .compute(&sets[a], &sets[b], s, options)
                .map_err(|e| Error::Pair {
                    metric: metric.name().to_string(),
                    a: sets[a].label().to_string(),
                    b: sets[b].label().to_string(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;

    let mut out = vec![vec![MetricResult::new(0.0, 0.0); n]; n];
    for (&(a, b), r) in pairs.iter().zip(results) {
        out[a][b] = r;
        let mut mirrored = r;
        if let Some(mut bert) = r.bert {
            std::mem::swap(&mut bert.recall, &mut bert.precision);
            std::mem::swap(&mut bert.residual_recall, &mut bert.residual_precision);
            mirrored.bert = Some(bert);
        }
        out[b][a] = mirrored;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sets_give_matrix_of_ones() {
        let a = WeightedSet::new("a", [("x", 0.4), ("y", 0.6)], true).unwrap();
        let b = a.clone().with_label("b");
        let s = SimilarityMatrix::square(a.ids().to_vec(), vec![1.0, 0.3, 0.3, 1.0]).unwrap();
        for metric in Metric::ALL {
            let m = pairwise_matrix(&[a.clone(), b.clone()], Some(&s), metric, &Default::default())
                .unwrap();
            for row in &m {
                for r in row {
                    assert!((r.score - 1.0).abs() < 1e-12, "{metric}: {}", r.score);
                }
            }
        }
    }

    #[test]
    fn disjoint_sets_give_identity_under_jaccard() {
        let sets: Vec<_> = ["p", "q", "r"]
            .iter()
            .map(|l| WeightedSet::new(*l, [(format!("{l}1"), 1.0), (format!("{l}2"), 2.0)], true).unwrap())
            .collect();
        let m = pairwise_matrix(&sets, None, Metric::Jaccard, &Default::default()).unwrap();
        for (a, row) in m.iter().enumerate() {
            for (b, r) in row.iter().enumerate() {
                assert_eq!(r.score, if a == b { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn missing_matrix_is_a_config_error_with_pair_context() {
        let a = WeightedSet::new("a", [("x", 1.0)], true).unwrap();
        let err = pairwise_matrix(&[a], None, Metric::Strapsim, &Default::default()).unwrap_err();
        assert!(matches!(err, Error::Pair { .. }));
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("cosine".parse::<Metric>().is_err());
    }
}
