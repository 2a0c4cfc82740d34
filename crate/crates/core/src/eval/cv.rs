//! Seeded k-fold cross-validation for similarity-based KNN.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::knn::{top_k, vote, weighted_mean};
use crate::eval::report::{EvalReport, FoldReport, TaskKind};
use crate::eval::scores::{classification_metrics, mae, mape, rmse};
use crate::rng::rng;

/// Shuffles `0..n` with `seed` and cuts it into `folds` contiguous chunks;
/// the first `n % folds` chunks get one extra row. Each fold is sorted.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::TooFewRows { rows: n, min: folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        let mut fold = order[start..start + len].to_vec();
        fold.sort_unstable();
        out.push(fold);
        start += len;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Labels(Vec<String>),
    Values(Vec<f64>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Labels(v) => v.len(),
            Targets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> TaskKind {
        match self {
            Targets::Labels(_) => TaskKind::Classification,
            Targets::Values(_) => TaskKind::Regression,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            k: 5,
            folds: 10,
            seed: 42,
        }
    }
}

fn regression_map(pred: &[f64], truth: &[f64]) -> Result<BTreeMap<String, f64>> {
    let mut m = BTreeMap::new();
    m.insert("rmse".to_string(), rmse(pred, truth)?);
    m.insert("mae".to_string(), mae(pred, truth)?);
    match mape(pred, truth) {
        Ok(v) => {
            m.insert("mape".to_string(), v);
        }
        Err(Error::ZeroTruthForMape(row)) => {
            log::warn!("mape skipped: zero target at position {row}");
        }
        Err(e) => return Err(e),
    }
    Ok(m)
}

fn classification_map(pred: &[String], truth: &[String]) -> Result<BTreeMap<String, f64>> {
    Ok(classification_metrics(pred, truth)?
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect())
}

/// Pooled and per-fold metrics from row-level predictions.
pub fn summarize(
    targets: &Targets,
    folds: &[Vec<usize>],
    predict: impl Fn(usize) -> Prediction,
) -> Result<EvalReport> {
    let mut report = EvalReport::new(targets.task());
    let preds: Vec<Vec<Prediction>> = folds
        .iter()
        .map(|fold| fold.iter().map(|&r| predict(r)).collect())
        .collect();
    match targets {
        Targets::Labels(truth) => {
            let (mut all_p, mut all_t) = (Vec::new(), Vec::new());
            for (f, (fold, p)) in folds.iter().zip(&preds).enumerate() {
                let p: Vec<String> = p.iter().map(Prediction::label).collect();
                let t: Vec<String> = fold.iter().map(|&r| truth[r].clone()).collect();
                report.folds.push(FoldReport {
                    fold: f,
                    size: fold.len(),
                    metrics: classification_map(&p, &t)?,
                });
                all_p.extend(p);
                all_t.extend(t);
            }
            report.metrics = classification_map(&all_p, &all_t)?;
        }
        Targets::Values(truth) => {
            let (mut all_p, mut all_t) = (Vec::new(), Vec::new());
            for (f, (fold, p)) in folds.iter().zip(&preds).enumerate() {
                let p: Vec<f64> = p.iter().map(Prediction::value).collect();
                let t: Vec<f64> = fold.iter().map(|&r| truth[r]).collect();
                report.folds.push(FoldReport {
                    fold: f,
                    size: fold.len(),
                    metrics: regression_map(&p, &t)?,
                });
                all_p.extend(p);
                all_t.extend(t);
            }
            report.metrics = regression_map(&all_p, &all_t)?;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Label(String),
    Value(f64),
}

impl Prediction {
    fn label(&self) -> String {
        match self {
            Prediction::Label(l) => l.clone(),
            Prediction::Value(v) => v.to_string(),
        }
    }

    fn value(&self) -> f64 {
        match self {
            Prediction::Value(v) => *v,
            Prediction::Label(_) => f64::NAN,
        }
    }
}

/// KNN cross-validation over `targets.len()` rows, where `sim(query, other)`
/// returns the similarity of two row indices. Each held-out row is predicted
/// from its `k` most similar rows outside its fold.
pub fn cross_validate<F>(targets: &Targets, sim: F, config: &CvConfig) -> Result<EvalReport>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    if config.k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let n = targets.len();
    let folds = fold_assignment(n, config.folds, config.seed)?;
    let mut fold_of = vec![0usize; n];
    for (f, fold) in folds.iter().enumerate() {
        for &r in fold {
            fold_of[r] = f;
        }
    }
    let predictions: Vec<Prediction> = (0..n)
        .into_par_iter()
        .map(|q| {
            let scores: Vec<(usize, f64)> = (0..n)
                .filter(|&r| fold_of[r] != fold_of[q])
                .map(|r| (r, sim(q, r)))
                .collect();
            let top = top_k(&scores, config.k);
            match targets {
                Targets::Labels(l) => Prediction::Label(
                    vote(top.iter().map(|&(r, s)| (l[r].as_str(), s))).expect("pool is non-empty"),
                ),
                Targets::Values(v) => Prediction::Value(
                    weighted_mean(top.iter().map(|&(r, s)| (v[r], s))).expect("pool is non-empty"),
                ),
            }
        })
        .collect();
    let mut report = summarize(targets, &folds, |r| predictions[r].clone())?;
    report.k = Some(config.k);
    Ok(report)
}
