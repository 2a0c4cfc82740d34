//! Match traces and metric results.

use serde::{Deserialize, Serialize};

/// One greedy match: `mass` moved between row `row` and column `col`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchStep {
    pub row: usize,
    pub col: usize,
    pub score: f64,
    pub mass: f64,
    pub contribution: f64,
}

/// Ordered record of a STRAPSim run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchTrace {
    pub steps: Vec<MatchStep>,
    /// Unmatched weight left on each element of the reference set.
    pub residual_x: Vec<f64>,
    /// Unmatched weight left on each element of the candidate set.
    pub residual_y: Vec<f64>,
    pub total_score: f64,
    pub total_residual: f64,
}

impl MatchTrace {
    /// Mass shipped out of each reference element across all steps.
    pub fn shipped_x(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.residual_x.len()];
        for s in &self.steps {
            out[s.row] += s.mass;
        }
        out
    }

    pub fn shipped_y(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.residual_y.len()];
        for s in &self.steps {
            out[s.col] += s.mass;
        }
        out
    }

    pub fn matched_mass(&self) -> f64 {
        self.steps.iter().map(|s| s.mass).sum()
    }

    pub fn to_result(&self) -> MetricResult {
        MetricResult {
            score: self.total_score,
            residual: self.total_residual,
            bert: None,
        }
    }
}

/// Recall/precision/F1 triple reported by the BERTScore analog, each with
/// its own residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertComponents {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub residual_recall: f64,
    pub residual_precision: f64,
    pub residual_f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub score: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bert: Option<BertComponents>,
}

impl MetricResult {
    pub fn new(score: f64, residual: f64) -> Self {
        Self {
            score,
            residual,
            bert: None,
        }
    }
}
