use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // weighted sets and matrices
    #[error("weighted set has no entries or no positive weight")]
    EmptySet,
    #[error("constituent id must be non-empty")]
    EmptyId,
    #[error("negative or non-finite weight {weight} for constituent `{id}`")]
    NegativeWeight { id: String, weight: f64 },
    #[error("duplicate constituent id `{0}`")]
    DuplicateId(String),
    #[error("unknown constituent `{0}`")]
    UnknownConstituent(String),
    #[error("matrix shape mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    // metrics
    #[error("weighted Jaccard union has zero total weight")]
    DegenerateUnion,
    #[error("transport oracle limited to {cap} cells, got {cells}")]
    TooLarge { cells: usize, cap: usize },
    #[error("metric `{metric}` failed for pair ({a}, {b}): {source}")]
    Pair {
        metric: String,
        a: String,
        b: String,
        #[source]
        source: Box<Error>,
    },

    // constituent similarity backends
    #[error("feature column `{0}` has non-positive maximum")]
    NonPositiveColumnMax(String),
    #[error("need at least {min} rows, got {rows}")]
    TooFewRows { rows: usize, min: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("unknown document `{0}`")]
    UnknownDocument(String),
    #[error("document `{0}` has an all-zero tf-idf vector")]
    ZeroVector(String),
    #[error("target column `{0}` not found")]
    TargetMissing(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    // evaluation
    #[error("neighbor pool is empty")]
    EmptyPool,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("MAPE undefined: truth value at index {0} is zero")]
    ZeroTruthForMape(usize),
    #[error("need at least {min} observations, got {len}")]
    TooShort { len: usize, min: usize },
    #[error("input has zero rank variance")]
    ConstantInput,
    #[error("no return series for `{0}`")]
    MissingReturns(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // ingest
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: duplicate holding ({portfolio}, {constituent})")]
    DuplicateHolding {
        path: PathBuf,
        line: u64,
        portfolio: String,
        constituent: String,
    },
    #[error("{path}:{line}: negative weight {weight}")]
    NegativeHoldingWeight { path: PathBuf, line: u64, weight: f64 },
    #[error("self-mode matrix must be square, got {rows}x{cols}")]
    NotSquareWhenSelfMode { rows: usize, cols: usize },
    #[error("matrix asymmetric at ({row}, {col}): |{a} - {b}| exceeds {tolerance}")]
    AsymmetryBeyondTolerance {
        row: String,
        col: String,
        a: f64,
        b: f64,
        tolerance: f64,
    },
    #[error("{path}:{line}: duplicate period {period} for `{entity}`")]
    DuplicatePeriod {
        path: PathBuf,
        line: u64,
        entity: String,
        period: String,
    },
    #[error("{path}:{line}: bad period `{value}`, expected YYYY-MM")]
    BadPeriodFormat {
        path: PathBuf,
        line: u64,
        value: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptySet => "EmptySet",
            Error::EmptyId => "EmptyId",
            Error::NegativeWeight { .. } => "NegativeWeight",
            Error::DuplicateId(_) => "DuplicateId",
            Error::UnknownConstituent(_) => "UnknownConstituent",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DegenerateUnion => "DegenerateUnion",
            Error::TooLarge { .. } => "TooLarge",
            Error::Pair { source, .. } => source.kind(),
            Error::NonPositiveColumnMax(_) => "NonPositiveColumnMax",
            Error::TooFewRows { .. } => "TooFewRows",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::UnknownDocument(_) => "UnknownDocument",
            Error::ZeroVector(_) => "ZeroVector",
            Error::TargetMissing(_) => "TargetMissing",
            Error::SchemaMismatch(_) => "SchemaMismatch",
            Error::EmptyPool => "EmptyPool",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::ZeroTruthForMape(_) => "ZeroTruthForMape",
            Error::TooShort { .. } => "TooShort",
            Error::ConstantInput => "ConstantInput",
            Error::MissingReturns(_) => "MissingReturns",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Parse { .. } => "Parse",
            Error::DuplicateHolding { .. } => "DuplicateHolding",
            Error::NegativeHoldingWeight { .. } => "NegativeHoldingWeight",
            Error::NotSquareWhenSelfMode { .. } => "NotSquareWhenSelfMode",
            Error::AsymmetryBeyondTolerance { .. } => "AsymmetryBeyondTolerance",
            Error::DuplicatePeriod { .. } => "DuplicatePeriod",
            Error::BadPeriodFormat { .. } => "BadPeriodFormat",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }

    /// True for errors caused by the inputs or the configuration rather than
    /// by the environment (file system failures while writing, and so on).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io(_) => false,
            Error::Csv(e) => !matches!(e.kind(), csv::ErrorKind::Io(_)),
            Error::Json(e) => !e.is_io(),
            Error::Pair { source, .. } => source.is_validation(),
            _ => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_errors_report_the_inner_kind() {
        let e = Error::Pair {
            metric: "strapsim".into(),
            a: "a".into(),
            b: "b".into(),
            source: Box::new(Error::UnknownConstituent("x".into())),
        };
        assert_eq!(e.kind(), "UnknownConstituent");
        assert!(e.is_validation());
        assert!(!Error::Io(std::io::Error::other("disk full")).is_validation());
    }
}
