//! Residual-aware, weight-sensitive similarity between weighted sets.
//!
//! The crate compares *weighted sets* (portfolios of bonds, users' movie
//! ratings, feature vectors of tabular rows) with STRAPSim, a greedy
//! matching that moves the smaller available weight across the most similar
//! remaining pair of constituents and reports the unmatched residual. Three
//! baselines are provided alongside: Jaccard, weighted Jaccard and a
//! BERTScore-style argmax matcher.
//!
//! Constituent-level similarities come from [`constituent`]: cosine over
//! max-scaled feature columns, TF-IDF cosine, or random-forest proximity.
//! [`eval`] holds the KNN / cross-validation / Spearman harness and
//! [`experiments`] wires them into the benchmark pipelines.

pub mod cli;
pub mod constituent;
pub mod error;
pub mod experiments;
pub mod eval;
pub mod ingest;
pub mod matrix;
pub mod metrics;
pub mod rng;
pub mod set;
pub mod trace;

pub use error::{Error, Result};
pub use matrix::{align_matrix, SimilarityMatrix};
pub use metrics::{Metric, MetricOptions};
pub use set::{ConstituentId, WeightedSet, MASS_EPSILON};
pub use trace::{BertComponents, MatchStep, MatchTrace, MetricResult};
