//! KNN prediction, cross-validation, error metrics and rank correlation.

pub mod cv;
pub mod knn;
pub mod ranking;
pub mod report;
pub mod scores;
pub mod spearman;

pub use cv::{cross_validate, fold_assignment, CvConfig, Targets};
pub use knn::{knn_classify, knn_regress, neighbor_list, NeighborList};
pub use ranking::{etf_ranking_study, Period, RankingRow, ReturnSeries};
pub use report::{EvalReport, FoldReport, TaskKind};
pub use spearman::{spearman, spearman_with, PValueMethod, Spearman};
