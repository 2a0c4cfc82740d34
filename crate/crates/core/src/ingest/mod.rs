//! File formats: holdings, similarity matrices, return series, public
//! datasets and the synthetic universe generator.
//!
//! Every reader has a `read_*` form over any `io::Read` (the path argument is
//! only used in error messages) and a `load_*` form that opens a file.

pub mod datasets;
pub mod holdings;
pub mod matrix;
pub mod returns;
pub mod synthetic;

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

pub use datasets::{load_big_mac, load_breast_cancer, load_dataset, load_iris, load_movies, Dataset, MovieData};
pub use holdings::{load_holdings, read_holdings, write_holdings};
pub use matrix::{load_matrix, read_matrix_csv, read_matrix_json, write_matrix_csv, write_matrix_json};
pub use returns::{load_returns, read_returns, write_returns};
pub use synthetic::{generate_synthetic_universe, OverlapProfile, SyntheticUniverse, SyntheticUniverseSpec};

pub(crate) fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(input)
}

pub(crate) fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: format!("cannot open: {e}"),
    })
}

pub(crate) fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Wraps csv errors with the file name and line.
pub(crate) fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: err.to_string(),
    }
}

pub(crate) fn expect_header(path: &Path, headers: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("header {got:?}, expected {expected:?}"),
        });
    }
    Ok(())
}

pub(crate) fn parse_number(path: &Path, line: u64, field: &str, text: &str) -> Result<f64> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{field}: `{text}` is not a finite number"),
        }),
    }
}

/// Decimal text with at most 12 significant digits, shortest form.
pub fn format_weight(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}
