//! Benchmark pipelines: tabular KNN tasks, movie-rating prediction and the
//! similarity-vs-return ranking study.
//!
//! Each runner returns its outputs as named in-memory files so that callers
//! can write all of them or none.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constituent::features::{feature_correlation_matrix, max_scale, FeatureTable};
use crate::constituent::tfidf::TfidfIndex;
use crate::error::{Error, Result};
use crate::eval::cv::{cross_validate, fold_assignment, summarize, CvConfig, Prediction, Targets};
use crate::eval::knn::{top_k, weighted_mean};
use crate::eval::ranking::{correlation_matrix, ranking_from_scores, write_ranking_csv, RankingRow, ReturnSeries};
use crate::eval::report::{write_reports_csv, write_summary_csv, EvalReport};
use crate::ingest::datasets::MovieData;
use crate::ingest::synthetic::{generate_synthetic_universe, SyntheticUniverseSpec};
use crate::matrix::SimilarityMatrix;
use crate::metrics::{pairwise_matrix, Metric, MetricOptions};
use crate::rng::{rng, rng_for};
use crate::set::{ConstituentId, WeightedSet};
use crate::trace::MetricResult;

pub const EXPERIMENTS: [&str; 6] = ["iris", "breast-cancer", "big-mac", "movies", "etf-ranking", "synthetic-etf"];

/// A named output produced by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

impl OutputFile {
    fn csv(name: impl Into<String>, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Self> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        Ok(Self {
            name: name.into(),
            contents: String::from_utf8(buf).expect("csv output is UTF-8"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub metrics: Vec<Metric>,
    /// Neighbour count for the headline table.
    pub k: usize,
    /// Extra neighbour counts evaluated for tabular tasks.
    pub k_sweep: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
    pub min_match_sim: f64,
    /// Normalize set weights to sum to one.
    pub normalize: bool,
    /// Users sampled for the movie task (0 keeps all).
    pub movie_users: usize,
    /// Share of each test user's ratings hidden and predicted.
    pub movie_holdout: f64,
    pub synthetic: SyntheticUniverseSpec,
    /// Number of consecutive seeds for the synthetic study.
    pub synthetic_seeds: usize,
    /// Portfolios in the planted-concordance universe.
    pub planted_portfolios: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            metrics: Metric::ALL.to_vec(),
            k: 5,
            k_sweep: vec![1, 3, 5, 10, 20],
            folds: 10,
            seed: 42,
            min_match_sim: 0.0,
            normalize: false,
            movie_users: 200,
            movie_holdout: 0.2,
            synthetic: SyntheticUniverseSpec::default(),
            synthetic_seeds: 10,
            planted_portfolios: 20,
        }
    }
}

impl ExperimentConfig {
    pub fn options(&self) -> MetricOptions {
        MetricOptions {
            min_match_sim: self.min_match_sim,
        }
    }

    fn k_values(&self) -> Vec<usize> {
        let mut ks = self.k_sweep.clone();
        ks.push(self.k);
        ks.sort_unstable();
        ks.dedup();
        ks
    }
}

/// Rows of a max-scaled table as weighted sets over feature names, plus the
/// feature-to-feature cosine matrix.
pub fn tabular_sets(table: &FeatureTable, normalize: bool) -> Result<(Vec<WeightedSet>, SimilarityMatrix)> {
    let scaled = max_scale(table)?;
    let s = feature_correlation_matrix(&scaled)?;
    let sets = (0..scaled.nrows())
        .map(|r| scaled.row_as_set(r, normalize))
        .collect::<Result<_>>()?;
    Ok((sets, s))
}

fn score_matrix(results: Vec<Vec<MetricResult>>) -> Vec<Vec<f64>> {
    results
        .into_iter()
        .map(|row| row.into_iter().map(|r| r.score).collect())
        .collect()
}

/// Outcome of a tabular KNN benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularOutcome {
    pub dataset: String,
    /// One report per (metric, k).
    pub reports: Vec<EvalReport>,
    pub headline_k: usize,
}

impl TabularOutcome {
    pub fn report(&self, metric: Metric, k: usize) -> Option<&EvalReport> {
        self.reports
            .iter()
            .find(|r| r.metric == metric.name() && r.k == Some(k))
    }

    pub fn headline(&self) -> Vec<EvalReport> {
        self.reports
            .iter()
            .filter(|r| r.k == Some(self.headline_k))
            .cloned()
            .collect()
    }

    pub fn files(&self) -> Result<Vec<OutputFile>> {
        Ok(vec![
            OutputFile::csv(format!("summary-{}.csv", self.dataset), |b| {
                write_summary_csv(&self.headline(), b)
            })?,
            OutputFile::csv(format!("k-sweep-{}.csv", self.dataset), |b| {
                write_reports_csv(&self.reports, b)
            })?,
            OutputFile {
                name: format!("report-{}.json", self.dataset),
                contents: serde_json::to_string_pretty(&self.reports)?,
            },
        ])
    }
}

/// KNN classification (when the table has labels) or regression on `target`
/// with every metric and every k in the sweep.
pub fn run_tabular(dataset: &str, table: &FeatureTable, target: Option<&str>, config: &ExperimentConfig) -> Result<TabularOutcome> {
    let targets = match (target, table.labels()) {
        (Some(name), _) => Targets::Values(table.target(name)?.to_vec()),
        (None, Some(labels)) => Targets::Labels(labels.to_vec()),
        (None, None) => return Err(Error::TargetMissing("class labels".into())),
    };
    let (sets, s) = tabular_sets(table, config.normalize)?;
    let options = config.options();
    let mut reports = Vec::new();
    for &metric in &config.metrics {
        let scores = score_matrix(pairwise_matrix(&sets, Some(&s), metric, &options)?);
        for k in config.k_values() {
            let cv = CvConfig {
                k,
                folds: config.folds,
                seed: config.seed,
            };
            let report = cross_validate(&targets, |q, r| scores[q][r], &cv)?;
            reports.push(report.labelled(dataset, metric.name()));
        }
    }
    Ok(TabularOutcome {
        dataset: dataset.to_string(),
        reports,
        headline_k: config.k,
    })
}

/// Per-user average residual share against the other sampled users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserResidual {
    pub user: String,
    pub metric: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieOutcome {
    pub users: Vec<String>,
    pub reports: Vec<EvalReport>,
    pub residuals: Vec<UserResidual>,
    /// Hidden ratings of movies no training user had rated.
    pub fallbacks: usize,
    pub predicted: usize,
}

impl MovieOutcome {
    pub fn report(&self, metric: &str) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.metric == metric)
    }

    pub fn mean_residual(&self, metric: Metric) -> f64 {
        let v: Vec<f64> = self
            .residuals
            .iter()
            .filter(|r| r.metric == metric.name())
            .map(|r| r.residual)
            .collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }

    pub fn files(&self) -> Result<Vec<OutputFile>> {
        let residuals = OutputFile::csv("residuals-movies.csv", |b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["user", "metric", "residual"])?;
            for r in &self.residuals {
                w.write_record([r.user.clone(), r.metric.clone(), r.residual.to_string()])?;
            }
            w.flush()?;
            Ok(())
        })?;
        let summary = OutputFile::csv("residual-summary-movies.csv", |b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["metric", "mean_residual"])?;
            let metrics: Vec<&str> = {
                let mut m: Vec<&str> = Vec::new();
                for r in &self.residuals {
                    if !m.contains(&r.metric.as_str()) {
                        m.push(&r.metric);
                    }
                }
                m
            };
            for name in metrics {
                let metric: Metric = name.parse()?;
                w.write_record([name.to_string(), self.mean_residual(metric).to_string()])?;
            }
            w.flush()?;
            Ok(())
        })?;
        Ok(vec![
            OutputFile::csv("summary-movies.csv", |b| write_summary_csv(&self.reports, b))?,
            OutputFile::csv("folds-movies.csv", |b| write_reports_csv(&self.reports, b))?,
            residuals,
            summary,
            OutputFile {
                name: "report-movies.json".into(),
                contents: serde_json::to_string_pretty(&self.reports)?,
            },
        ])
    }
}

/// Similarity between two movie profiles from TF-IDF cosine, built on demand.
fn movie_pair_matrix(index: &TfidfIndex, x: &Profile, y: &Profile) -> Result<SimilarityMatrix> {
    let mut values = Vec::with_capacity(x.positions.len() * y.positions.len());
    for &a in &x.positions {
        for &b in &y.positions {
            values.push(if a == b { 1.0 } else { index.cosine_at(a, b) });
        }
    }
    SimilarityMatrix::new(x.set.ids().to_vec(), y.set.ids().to_vec(), values)
}

struct Profile {
    set: WeightedSet,
    positions: Vec<usize>,
}

fn profile(index: &TfidfIndex, label: &str, ratings: &[(String, f64)], normalize: bool) -> Result<Profile> {
    let set = WeightedSet::new(label, ratings.iter().cloned(), normalize)?;
    let positions = set
        .ids()
        .iter()
        .map(|id| {
            index
                .position(id.as_str())
                .ok_or_else(|| Error::UnknownDocument(id.to_string()))
        })
        .collect::<Result<_>>()?;
    Ok(Profile { set, positions })
}

fn pair_scores(index: &TfidfIndex, x: &Profile, y: &Profile, metrics: &[Metric], options: &MetricOptions) -> Result<Vec<MetricResult>> {
    let s = if metrics.iter().any(|m| m.needs_similarity()) {
        Some(movie_pair_matrix(index, x, y)?)
    } else {
        None
    };
    metrics
        .iter()
        .map(|m| match &s {
            Some(s) if m.needs_similarity() => m.compute_aligned(&x.set, &y.set, s, options),
            _ => m.compute(&x.set, &y.set, None, options),
        })
        .collect()
}

/// Unmatched share of a metric result, comparable across metrics.
fn residual_share(metric: Metric, r: &MetricResult, x: &WeightedSet, y: &WeightedSet) -> f64 {
    match metric {
        Metric::Strapsim => r.residual / (x.total_weight() + y.total_weight()),
        _ => r.residual,
    }
}

/// Seeded user sample, returned in order of first appearance in the data.
fn sample_users(data: &MovieData, n: usize, seed: u64) -> Vec<String> {
    let all = data.users();
    if n == 0 || n >= all.len() {
        return all;
    }
    let mut picks: Vec<usize> = (0..all.len()).collect();
    picks.shuffle(&mut rng(seed));
    let mut chosen: Vec<usize> = picks[..n].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| all[i].clone()).collect()
}

/// User-based KNN rating prediction. Users are split into folds; each test
/// user hides a share of its ratings, is compared (on the visible rest) with
/// every training user, and each hidden rating is predicted from the `k`
/// most similar training users who rated that movie. When nobody did, the
/// test user's visible mean is used.
pub fn run_movies(data: &MovieData, config: &ExperimentConfig) -> Result<MovieOutcome> {
    let index = TfidfIndex::build(data.documents.iter().map(|(id, text)| (id.clone(), text.as_str())))?;
    let users = sample_users(data, config.movie_users, config.seed);
    let user_pos: HashMap<&str, usize> = users.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
    let mut ratings: Vec<Vec<(String, f64)>> = vec![Vec::new(); users.len()];
    let mut skipped = 0usize;
    for r in &data.ratings {
        if let Some(&u) = user_pos.get(r.user.as_str()) {
            if index.position(&r.movie).is_some() {
                ratings[u].push((r.movie.clone(), r.rating));
            } else {
                skipped += 1;
            }
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} ratings reference movies without metadata and were ignored");
    }
    if let Some(u) = ratings.iter().position(Vec::is_empty) {
        return Err(Error::InvalidConfig(format!(
            "user `{}` has no ratings of movies with metadata",
            users[u]
        )));
    }
    let n = users.len();
    let options = config.options();
    let metrics = &config.metrics;

    // hidden ratings per user
    let mut hidden: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (u, r) in ratings.iter().enumerate() {
        let mut idx: Vec<usize> = (0..r.len()).collect();
        idx.shuffle(&mut rng_for(config.seed, u as u64, 1));
        let h = ((r.len() as f64) * config.movie_holdout).ceil() as usize;
        let mut h: Vec<usize> = idx[..h.min(r.len() - 1)].to_vec();
        h.sort_unstable();
        hidden.push(h);
    }
    let full: Vec<Profile> = users
        .iter()
        .zip(&ratings)
        .map(|(u, r)| profile(&index, u, r, config.normalize))
        .collect::<Result<_>>()?;
    let rating_of: Vec<HashMap<&str, f64>> = ratings
        .iter()
        .map(|r| r.iter().map(|(m, v)| (m.as_str(), *v)).collect())
        .collect();

    let folds = fold_assignment(n, config.folds, config.seed)?;
    let mut fold_of = vec![0usize; n];
    for (f, fold) in folds.iter().enumerate() {
        for &u in fold {
            fold_of[u] = f;
        }
    }

    // (user, hidden index, per-metric prediction, uniform prediction, fallback)
    type UserPredictions = Vec<(usize, f64, Vec<f64>, f64, bool)>;
    let per_user: Vec<UserPredictions> = (0..n)
        .into_par_iter()
        .map(|u| -> Result<UserPredictions> {
            let hidden_set: Vec<usize> = hidden[u].clone();
            let visible: Vec<(String, f64)> = ratings[u]
                .iter()
                .enumerate()
                .filter(|(i, _)| hidden_set.binary_search(i).is_err())
                .map(|(_, r)| r.clone())
                .collect();
            let query = profile(&index, &users[u], &visible, config.normalize)?;
            let visible_mean = visible.iter().map(|r| r.1).sum::<f64>() / visible.len() as f64;
            let train: Vec<usize> = (0..n).filter(|&t| fold_of[t] != fold_of[u]).collect();
            let sims: Vec<Vec<MetricResult>> = train
                .iter()
                .map(|&t| pair_scores(&index, &query, &full[t], metrics, &options))
                .collect::<Result<_>>()?;
            let mut out = Vec::with_capacity(hidden_set.len());
            for &h in &hidden_set {
                let (movie, truth) = &ratings[u][h];
                let raters: Vec<usize> = (0..train.len())
                    .filter(|&k| rating_of[train[k]].contains_key(movie.as_str()))
                    .collect();
                if raters.is_empty() {
                    out.push((u, *truth, vec![visible_mean; metrics.len()], visible_mean, true));
                    continue;
                }
                let preds = (0..metrics.len())
                    .map(|m| {
                        let scored: Vec<(usize, f64)> = raters.iter().map(|&k| (k, sims[k][m].score)).collect();
                        let top = top_k(&scored, config.k);
                        weighted_mean(top.iter().map(|&(k, s)| (rating_of[train[k]][movie.as_str()], s)))
                            .expect("raters is non-empty")
                    })
                    .collect();
                let uniform = raters.iter().map(|&k| rating_of[train[k]][movie.as_str()]).sum::<f64>() / raters.len() as f64;
                out.push((u, *truth, preds, uniform, false));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let flat: Vec<(usize, f64, Vec<f64>, f64, bool)> = per_user.into_iter().flatten().collect();
    let truth = Targets::Values(flat.iter().map(|p| p.1).collect());
    let mut rating_folds: Vec<Vec<usize>> = vec![Vec::new(); folds.len()];
    for (i, p) in flat.iter().enumerate() {
        rating_folds[fold_of[p.0]].push(i);
    }
    let mut reports = Vec::new();
    for (m, metric) in metrics.iter().enumerate() {
        let mut r = summarize(&truth, &rating_folds, |i| Prediction::Value(flat[i].2[m]))?;
        r.k = Some(config.k);
        reports.push(r.labelled("movies", metric.name()));
    }
    let mut uniform = summarize(&truth, &rating_folds, |i| Prediction::Value(flat[i].3))?;
    uniform.k = None;
    reports.push(uniform.labelled("movies", "unweighted-average"));

    // residual report on full profiles, normalized so shares are comparable
    let shares: Vec<Profile> = users
        .iter()
        .zip(&ratings)
        .map(|(u, r)| profile(&index, u, r, true))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
    let pair_residuals: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let res = pair_scores(&index, &shares[a], &shares[b], metrics, &options)?;
            Ok(metrics
                .iter()
                .zip(&res)
                .map(|(&m, r)| residual_share(m, r, &shares[a].set, &shares[b].set))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut sums = vec![vec![0.0; metrics.len()]; n];
    for (&(a, b), r) in pairs.iter().zip(&pair_residuals) {
        for m in 0..metrics.len() {
            sums[a][m] += r[m];
            sums[b][m] += r[m];
        }
    }
    let mut residuals = Vec::new();
    for (u, user) in users.iter().enumerate() {
        for (m, metric) in metrics.iter().enumerate() {
            residuals.push(UserResidual {
                user: user.clone(),
                metric: metric.name().to_string(),
                residual: sums[u][m] / (n.max(2) - 1) as f64,
            });
        }
    }
    Ok(MovieOutcome {
        users,
        reports,
        residuals,
        fallbacks: flat.iter().filter(|p| p.4).count(),
        predicted: flat.len(),
    })
}

/// Ranking study on given holdings and returns.
pub fn run_ranking(
    sets: &[WeightedSet],
    s: Option<&SimilarityMatrix>,
    returns: &[ReturnSeries],
    config: &ExperimentConfig,
) -> Result<Vec<RankingRow>> {
    if sets.len() < 4 {
        return Err(Error::TooShort { len: sets.len(), min: 4 });
    }
    let corr = correlation_matrix(sets, returns)?;
    let options = config.options();
    config
        .metrics
        .iter()
        .map(|&metric| {
            let scores = score_matrix(pairwise_matrix(sets, s, metric, &options)?);
            ranking_from_scores(metric.name(), &scores, &corr)
        })
        .collect()
}

pub fn ranking_files(prefix: &str, rows: &[RankingRow], entities: &[String]) -> Result<Vec<OutputFile>> {
    Ok(vec![
        OutputFile::csv(format!("{prefix}.csv"), |b| write_ranking_csv(rows, b))?,
        OutputFile::csv(format!("{prefix}-per-entity.csv"), |b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["metric", "entity", "rho", "p_value"])?;
            for r in rows {
                for (e, (rho, p)) in entities.iter().zip(&r.per_entity) {
                    w.write_record([r.metric.clone(), e.clone(), rho.to_string(), p.to_string()])?;
                }
            }
            w.flush()?;
            Ok(())
        })?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticOutcome {
    /// `(seed, rows)` for each sector-tilted universe.
    pub per_seed: Vec<(u64, Vec<RankingRow>)>,
    pub planted: Vec<RankingRow>,
}

impl SyntheticOutcome {
    fn avg_rho(rows: &[RankingRow], metric: Metric) -> Option<f64> {
        rows.iter().find(|r| r.metric == metric.name()).map(|r| r.avg_rho)
    }

    /// Seeds in which `a` has a strictly higher average coefficient than `b`.
    pub fn wins(&self, a: Metric, b: Metric) -> usize {
        self.per_seed
            .iter()
            .filter(|(_, rows)| match (Self::avg_rho(rows, a), Self::avg_rho(rows, b)) {
                (Some(x), Some(y)) => x > y,
                _ => false,
            })
            .count()
    }

    pub fn files(&self) -> Result<Vec<OutputFile>> {
        let mut files = vec![OutputFile::csv("synthetic-summary.csv", |b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["seed", "metric", "avg_coefficient", "avg_p_value", "pct_significant_5", "pct_significant_10"])?;
            for (seed, rows) in &self.per_seed {
                for r in rows {
                    w.write_record([
                        seed.to_string(),
                        r.metric.clone(),
                        r.avg_rho.to_string(),
                        r.avg_p.to_string(),
                        r.pct_sig_5.to_string(),
                        r.pct_sig_10.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            Ok(())
        })?];
        if let Some((seed, rows)) = self.per_seed.first() {
            files.push(OutputFile::csv(format!("ranking-seed-{seed}.csv"), |b| write_ranking_csv(rows, b))?);
        }
        files.push(OutputFile::csv("ranking-planted.csv", |b| write_ranking_csv(&self.planted, b))?);
        Ok(files)
    }
}

/// Ranking study over `synthetic_seeds` sector-tilted universes (seeds
/// `seed`, `seed + 1`, ...) plus one planted-concordance universe.
pub fn run_synthetic(config: &ExperimentConfig) -> Result<SyntheticOutcome> {
    let mut per_seed = Vec::with_capacity(config.synthetic_seeds);
    for k in 0..config.synthetic_seeds as u64 {
        let seed = config.seed + k;
        let spec = SyntheticUniverseSpec {
            seed,
            ..config.synthetic.clone()
        };
        let u = generate_synthetic_universe(&spec)?;
        let s = u.constituent_similarity()?;
        per_seed.push((seed, run_ranking(&u.holdings, Some(&s), &u.portfolio_returns, config)?));
    }
    let planted = generate_synthetic_universe(&SyntheticUniverseSpec::planted(config.planted_portfolios, config.seed))?;
    let s = planted.constituent_similarity()?;
    let planted = run_ranking(&planted.holdings, Some(&s), &planted.portfolio_returns, config)?;
    Ok(SyntheticOutcome { per_seed, planted })
}

/// Ids for an entity list, for matrix outputs.
pub fn labels_of(sets: &[WeightedSet]) -> Result<Vec<ConstituentId>> {
    sets.iter().map(|s| ConstituentId::new(s.label())).collect()
}
