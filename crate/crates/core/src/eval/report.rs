//! Evaluation reports and their JSON / CSV forms.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Classification,
    Regression,
    Ranking,
}

impl TaskKind {
    /// Metric columns in report order.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            TaskKind::Classification => &["accuracy", "f1"],
            TaskKind::Regression => &["rmse", "mape", "mae"],
            TaskKind::Ranking => &["spearman_rho", "p_value", "pct_sig_5", "pct_sig_10"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub size: usize,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub metric: String,
    pub task: TaskKind,
    pub k: Option<usize>,
    /// Pooled over all folds.
    pub metrics: BTreeMap<String, f64>,
    pub folds: Vec<FoldReport>,
}

impl EvalReport {
    pub fn new(task: TaskKind) -> Self {
        Self {
            dataset: String::new(),
            metric: String::new(),
            task,
            k: None,
            metrics: BTreeMap::new(),
            folds: Vec::new(),
        }
    }

    pub fn labelled(mut self, dataset: impl Into<String>, metric: impl Into<String>) -> Self {
        self.dataset = dataset.into();
        self.metric = metric.into();
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// One flat row per (dataset, metric, fold); the pooled row uses fold `all`.
/// All reports must share a task kind.
pub fn write_reports_csv<W: Write>(reports: &[EvalReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let Some(first) = reports.first() else {
        return Ok(());
    };
    let columns = first.task.columns();
    let mut header = vec!["dataset", "metric", "k", "fold", "size"];
    header.extend_from_slice(columns);
    w.write_record(&header)?;
    for r in reports {
        let k = r.k.map(|k| k.to_string()).unwrap_or_default();
        let pooled_size: usize = r.folds.iter().map(|f| f.size).sum();
        let mut row = vec![
            r.dataset.clone(),
            r.metric.clone(),
            k.clone(),
            "all".into(),
            pooled_size.to_string(),
        ];
        row.extend(columns.iter().map(|c| cell(r.get(c))));
        w.write_record(&row)?;
        for f in &r.folds {
            let mut row = vec![
                r.dataset.clone(),
                r.metric.clone(),
                k.clone(),
                f.fold.to_string(),
                f.size.to_string(),
            ];
            row.extend(columns.iter().map(|c| cell(f.metrics.get(*c).copied())));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Compact table: one row per report, pooled metrics only.
pub fn write_summary_csv<W: Write>(reports: &[EvalReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let Some(first) = reports.first() else {
        return Ok(());
    };
    let columns = first.task.columns();
    let mut header = vec!["metric"];
    header.extend_from_slice(columns);
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![r.metric.clone()];
        row.extend(columns.iter().map(|c| cell(r.get(c))));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
