//! Bagged regression forests and their leaf-sharing proximity.
//!
//! Proximity between two rows is the fraction of trees in which both land in
//! the same leaf. A model may hold one forest per target; proximity then
//! counts over all trees, which for equal tree counts is the average of the
//! per-target proximities.

mod tree;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use tree::{Node, RegressionTree, TreeParams};

use crate::constituent::features::FeatureTable;
use crate::error::{Error, Result};
use crate::eval::scores::{mape, rmse};
use crate::matrix::SimilarityMatrix;
use crate::rng::{rng, rng_for};
use crate::set::ConstituentId;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MIN_TRAINING_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: 8,
            min_leaf: 2,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetForest {
    pub target: String,
    pub config: ForestConfig,
    pub trees: Vec<RegressionTree>,
}

impl TargetForest {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Serializable trained model (versioned JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub forests: Vec<TargetForest>,
}

impl ForestModel {
    pub fn tree_count(&self) -> usize {
        self.forests.iter().map(|f| f.trees.len()).sum()
    }

    pub fn forest(&self, target: &str) -> Result<&TargetForest> {
        self.forests
            .iter()
            .find(|f| f.target == target)
            .ok_or_else(|| Error::TargetMissing(target.to_string()))
    }

    pub fn predict(&self, target: &str, row: &[f64]) -> Result<f64> {
        Ok(self.forest(target)?.predict(row))
    }

    /// Leaf index of `row` in every tree, forests concatenated.
    pub fn leaves(&self, row: &[f64]) -> Vec<u32> {
        self.forests
            .iter()
            .flat_map(|f| f.trees.iter().map(move |t| t.leaf(row)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::SchemaMismatch(format!(
                "model format version {} (supported: {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        Ok(model)
    }

    fn check_schema(&self, table: &FeatureTable) -> Result<()> {
        if table.feature_names() != self.feature_names.as_slice() {
            return Err(Error::SchemaMismatch(format!(
                "model features {:?} differ from table features {:?}",
                self.feature_names,
                table.feature_names()
            )));
        }
        Ok(())
    }
}

fn train_target(
    table: &FeatureTable,
    target_index: usize,
    target: &str,
    config: &ForestConfig,
) -> Result<TargetForest> {
    let y = table.target(target)?;
    let n = table.nrows();
    let params = TreeParams {
        max_depth: config.max_depth,
        min_leaf: config.min_leaf.max(1),
        mtry: (table.ncols() as f64).sqrt().ceil() as usize,
    };
    let trees = (0..config.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(config.seed, target_index as u64, t as u64);
            let mut bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            RegressionTree::fit(table, y, &mut bootstrap, params, &mut rng)
        })
        .collect();
    Ok(TargetForest {
        target: target.to_string(),
        config: *config,
        trees,
    })
}

/// Trains one bagged forest per target column (bootstrap per tree, `⌈√p⌉`
/// candidate features per split). Deterministic for a given seed.
pub fn forest_train(
    table: &FeatureTable,
    targets: &[&str],
    config: &ForestConfig,
) -> Result<ForestModel> {
    if table.nrows() < MIN_TRAINING_ROWS {
        return Err(Error::TooFewRows {
            rows: table.nrows(),
            min: MIN_TRAINING_ROWS,
        });
    }
    if targets.is_empty() || config.trees == 0 {
        return Err(Error::InvalidConfig(
            "forest needs at least one target and one tree".into(),
        ));
    }
    let forests = targets
        .iter()
        .enumerate()
        .map(|(k, t)| train_target(table, k, t, config))
        .collect::<Result<_>>()?;
    Ok(ForestModel {
        format_version: MODEL_FORMAT_VERSION,
        feature_names: table.feature_names().to_vec(),
        forests,
    })
}

/// Leaf-sharing proximity between every pair of rows of `rows`.
pub fn forest_proximity(model: &ForestModel, rows: &FeatureTable) -> Result<SimilarityMatrix> {
    model.check_schema(rows)?;
    let n = rows.nrows();
    let trees = model.tree_count() as f64;
    let leaves: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|r| model.leaves(rows.row(r)))
        .collect();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            ((a + 1)..n)
                .map(|b| {
                    let shared = leaves[a]
                        .iter()
                        .zip(&leaves[b])
                        .filter(|(x, y)| x == y)
                        .count();
                    shared as f64 / trees
                })
                .collect()
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for a in 0..n {
        values[a * n + a] = 1.0;
        for (k, &v) in upper[a].iter().enumerate() {
            let b = a + 1 + k;
            values[a * n + b] = v;
            values[b * n + a] = v;
        }
    }
    let ids = rows
        .row_ids()
        .iter()
        .map(|id| ConstituentId::new(id.clone()))
        .collect::<Result<_>>()?;
    SimilarityMatrix::square(ids, values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningConfig {
    pub trees_grid: Vec<usize>,
    pub depth_grid: Vec<usize>,
    pub cv_folds: usize,
    pub test_fraction: f64,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self {
            trees_grid: vec![50, 100],
            depth_grid: vec![4, 8, 12],
            cv_folds: 5,
            test_fraction: 0.1,
            min_leaf: 2,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub target: String,
    pub trees: usize,
    pub max_depth: usize,
    pub cv_rmse: f64,
    pub train_rmse: f64,
    pub test_rmse: f64,
    /// Fractions, not percent; `None` when a truth value is zero.
    pub train_mape: Option<f64>,
    pub test_mape: Option<f64>,
}

fn predict_rows(forest: &TargetForest, table: &FeatureTable) -> Vec<f64> {
    (0..table.nrows()).map(|r| forest.predict(table.row(r))).collect()
}

/// Shuffled train/test split, k-fold grid search over trees × depth per
/// target, then a final fit on the training split. Returns the model and a
/// per-target report.
pub fn tune_and_train(
    table: &FeatureTable,
    targets: &[&str],
    tuning: &TuningConfig,
) -> Result<(ForestModel, Vec<FitReport>)> {
    if tuning.trees_grid.is_empty() || tuning.depth_grid.is_empty() || tuning.cv_folds < 2 {
        return Err(Error::InvalidConfig("empty tuning grid or fewer than 2 folds".into()));
    }
    if !(0.0..1.0).contains(&tuning.test_fraction) {
        return Err(Error::InvalidConfig("test fraction must lie in [0, 1)".into()));
    }
    for t in targets {
        table.target(t)?;
    }
    let n = table.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng(tuning.seed));
    let n_test = ((n as f64) * tuning.test_fraction).round() as usize;
    let (test_idx, train_idx) = order.split_at(n_test);
    let mut train_idx = train_idx.to_vec();
    train_idx.sort_unstable();
    let mut test_idx = test_idx.to_vec();
    test_idx.sort_unstable();
    let train = table.select_rows(&train_idx);
    let test = table.select_rows(&test_idx);
    if train.nrows() < MIN_TRAINING_ROWS.max(tuning.cv_folds) {
        return Err(Error::TooFewRows {
            rows: train.nrows(),
            min: MIN_TRAINING_ROWS.max(tuning.cv_folds),
        });
    }

    let folds = crate::eval::cv::fold_assignment(train.nrows(), tuning.cv_folds, tuning.seed)?;
    let mut forests = Vec::new();
    let mut reports = Vec::new();
    for (k, target) in targets.iter().enumerate() {
        let mut best: Option<(f64, usize, usize)> = None;
        for &trees in &tuning.trees_grid {
            for &depth in &tuning.depth_grid {
                let config = ForestConfig {
                    trees,
                    max_depth: depth,
                    min_leaf: tuning.min_leaf,
                    seed: tuning.seed,
                };
                let mut sq = 0.0;
                for fold in &folds {
                    let fit_rows: Vec<usize> =
                        (0..train.nrows()).filter(|r| !fold.contains(r)).collect();
                    let fit = train.select_rows(&fit_rows);
                    let held = train.select_rows(fold);
                    let forest = train_target(&fit, k, target, &config)?;
                    let pred = predict_rows(&forest, &held);
                    let truth = held.target(target)?;
                    sq += pred
                        .iter()
                        .zip(truth)
                        .map(|(p, t)| (p - t).powi(2))
                        .sum::<f64>();
                }
                let cv_rmse = (sq / train.nrows() as f64).sqrt();
                if best.map_or(true, |(b, _, _)| cv_rmse < b) {
                    best = Some((cv_rmse, trees, depth));
                }
            }
        }
        let (cv_rmse, trees, max_depth) = best.expect("grid is non-empty");
        let config = ForestConfig {
            trees,
            max_depth,
            min_leaf: tuning.min_leaf,
            seed: tuning.seed,
        };
        let forest = train_target(&train, k, target, &config)?;
        let train_pred = predict_rows(&forest, &train);
        let train_truth = train.target(target)?;
        let (test_rmse, test_mape) = if test.nrows() > 0 {
            let test_pred = predict_rows(&forest, &test);
            let test_truth = test.target(target)?;
            (
                rmse(&test_pred, test_truth)?,
                mape(&test_pred, test_truth).ok().map(|m| m / 100.0),
            )
        } else {
            (f64::NAN, None)
        };
        reports.push(FitReport {
            target: target.to_string(),
            trees,
            max_depth,
            cv_rmse,
            train_rmse: rmse(&train_pred, train_truth)?,
            test_rmse,
            train_mape: mape(&train_pred, train_truth).ok().map(|m| m / 100.0),
            test_mape,
        });
        forests.push(forest);
    }
    Ok((
        ForestModel {
            format_version: MODEL_FORMAT_VERSION,
            feature_names: table.feature_names().to_vec(),
            forests,
        },
        reports,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constituent::features::TableBuilder;

    fn identity_table(n: usize) -> FeatureTable {
        let x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        TableBuilder::new((0..n).map(|i| format!("r{i}")).collect())
            .numeric("x", x.clone())
            .target("y", x)
            .build()
            .unwrap()
    }

    #[test]
    fn identity_target_is_learned() {
        let train = identity_table(200);
        let config = ForestConfig {
            trees: 50,
            max_depth: 10,
            ..Default::default()
        };
        let model = forest_train(&train, &["y"], &config).unwrap();
        // held-out points inside the training range
        let probe = [0.1234, 0.4321, 0.777];
        for p in probe {
            let got = model.predict("y", &[p]).unwrap();
            assert!((got - p).abs() < 0.02, "{p} -> {got}");
        }
    }

    #[test]
    fn constant_target_predicts_constant() {
        let t = TableBuilder::new((0..20).map(|i| format!("r{i}")).collect())
            .numeric("x", (0..20).map(f64::from).collect())
            .target("y", vec![3.5; 20])
            .build()
            .unwrap();
        let model = forest_train(&t, &["y"], &ForestConfig::default()).unwrap();
        for r in 0..20 {
            assert_eq!(model.predict("y", t.row(r)).unwrap(), 3.5);
        }
    }

    #[test]
    fn too_few_rows_and_missing_target() {
        let t = identity_table(2);
        assert!(matches!(
            forest_train(&t, &["y"], &ForestConfig::default()),
            Err(Error::TooFewRows { rows: 2, min: 10 })
        ));
        let t = identity_table(20);
        assert!(matches!(
            forest_train(&t, &["oas"], &ForestConfig::default()),
            Err(Error::TargetMissing(_))
        ));
    }

    #[test]
    fn proximity_is_symmetric_unit_diagonal_and_quantized() {
        let t = identity_table(40);
        let config = ForestConfig {
            trees: 7,
            max_depth: 3,
            ..Default::default()
        };
        let model = forest_train(&t, &["y"], &config).unwrap();
        let p = forest_proximity(&model, &t).unwrap();
        for a in 0..40 {
            assert_eq!(p.get(a, a), 1.0);
            for b in 0..40 {
                assert_eq!(p.get(a, b), p.get(b, a));
                let k = (p.get(a, b) * 7.0).round();
                assert_eq!(p.get(a, b), k / 7.0);
            }
        }
    }

    #[test]
    fn separated_clusters_share_no_leaf() {
        // Two well-separated groups with different targets: the first split of
        // every tree (on the only feature) separates them.
        let x: Vec<f64> = (0..40).map(|i| if i < 20 { i as f64 * 0.01 } else { 10.0 + i as f64 * 0.01 }).collect();
        let y: Vec<f64> = (0..40).map(|i| if i < 20 { 0.0 } else { 1.0 }).collect();
        let t = TableBuilder::new((0..40).map(|i| format!("r{i}")).collect())
            .numeric("x", x)
            .target("y", y)
            .build()
            .unwrap();
        let model = forest_train(&t, &["y"], &ForestConfig { trees: 25, max_depth: 1, ..Default::default() }).unwrap();
        let p = forest_proximity(&model, &t).unwrap();
        assert_eq!(p.get(0, 39), 0.0);
        assert_eq!(p.get(0, 19), 1.0);
    }

    #[test]
    fn model_json_round_trip_and_version_check() {
        let t = identity_table(30);
        let model = forest_train(&t, &["y"], &ForestConfig { trees: 3, max_depth: 3, ..Default::default() }).unwrap();
        let json = model.to_json().unwrap();
        assert_eq!(ForestModel::from_json(&json).unwrap(), model);
        let bumped = json.replacen("\"format_version\": 1", "\"format_version\": 99", 1);
        assert!(matches!(ForestModel::from_json(&bumped), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let t = identity_table(30);
        let model = forest_train(&t, &["y"], &ForestConfig { trees: 2, ..Default::default() }).unwrap();
        let other = TableBuilder::new(vec!["a".into()]).numeric("z", vec![1.0]).build().unwrap();
        assert!(matches!(forest_proximity(&model, &other), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn training_is_deterministic() {
        let t = identity_table(60);
        let c = ForestConfig { trees: 5, ..Default::default() };
        assert_eq!(forest_train(&t, &["y"], &c).unwrap(), forest_train(&t, &["y"], &c).unwrap());
    }
}
