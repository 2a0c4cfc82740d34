//! Constituent-level similarity sources.

pub mod features;
pub mod forest;
pub mod tfidf;

pub use features::{feature_correlation_matrix, max_scale, row_cosine_matrix, FeatureTable, TableBuilder};
pub use forest::{forest_proximity, forest_train, tune_and_train, ForestConfig, ForestModel, TuningConfig};
pub use tfidf::{tfidf_cosine_matrix, TfidfIndex};
