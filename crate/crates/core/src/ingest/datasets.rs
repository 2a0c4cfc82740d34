//! Loaders for the public benchmark datasets and generic feature CSVs.
//!
//! Files are user-supplied; nothing is downloaded. Headers are compared after
//! normalization (lowercase, runs of non-alphanumerics become `_`), so
//! `Sepal.Length` and `sepal_length` are the same column. Row counts that
//! differ from the reference sizes only produce a warning because public
//! copies of these datasets drift between sources.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::constituent::features::{FeatureTable, TableBuilder};
use crate::error::{Error, Result};
use crate::ingest::{csv_error, csv_reader, line_of, open, parse_number};

pub const IRIS_FEATURES: [&str; 4] = ["sepal_length", "sepal_width", "petal_length", "petal_width"];
pub const BREAST_CANCER_FEATURES: [&str; 9] = [
    "clump_thickness",
    "cell_size_uniformity",
    "cell_shape_uniformity",
    "marginal_adhesion",
    "epithelial_cell_size",
    "bare_nuclei",
    "bland_chromatin",
    "normal_nucleoli",
    "mitoses",
];
pub const BIG_MAC_TARGET: &str = "dollar_price";

const IRIS_ROWS: usize = 150;
const BREAST_CANCER_ROWS: usize = 699;
const BIG_MAC_ROWS: usize = 69;
const MOVIE_USERS: usize = 671;

pub fn normalize_header(h: &str) -> String {
    let mut out = String::new();
    for c in h.trim().chars() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

fn schema_error(path: &Path, message: String) -> Error {
    Error::SchemaMismatch(format!("{}: {message}", path.display()))
}

fn check_rows(path: &Path, what: &str, got: usize, expected: usize) {
    if got != expected {
        log::warn!("{}: {what} has {got} rows, reference size is {expected}", path.display());
    }
}

/// Header (normalized) and raw string rows with their line numbers.
fn read_table<R: Read>(input: R, path: &Path) -> Result<(Vec<String>, Vec<(u64, Vec<String>)>)> {
    let mut reader = csv_reader(input);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(normalize_header)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        rows.push((line_of(&record), record.iter().map(str::to_string).collect()));
    }
    Ok((headers, rows))
}

fn numeric_column(path: &Path, rows: &[(u64, Vec<String>)], col: usize, name: &str) -> Result<Vec<f64>> {
    rows.iter()
        .map(|(line, r)| parse_number(path, *line, name, &r[col]))
        .collect()
}

pub fn read_iris<R: Read>(input: R, path: &Path) -> Result<FeatureTable> {
    let (headers, rows) = read_table(input, path)?;
    let mut expected: Vec<&str> = IRIS_FEATURES.to_vec();
    expected.push("species");
    if headers != expected {
        return Err(schema_error(path, format!("iris header {headers:?}, expected {expected:?}")));
    }
    check_rows(path, "iris", rows.len(), IRIS_ROWS);
    let ids = (1..=rows.len()).map(|i| format!("iris-{i}")).collect();
    let mut b = TableBuilder::new(ids);
    for (c, name) in IRIS_FEATURES.iter().enumerate() {
        b = b.numeric(*name, numeric_column(path, &rows, c, name)?);
    }
    b.build()?.with_labels(rows.into_iter().map(|(_, r)| r[4].clone()).collect())
}

pub fn load_iris(path: &Path) -> Result<FeatureTable> {
    read_iris(open(path)?, path)
}

/// Wisconsin breast cancer: `id`, nine 1-10 cytology scores, `class`.
/// Rows with a missing cell (`?` or empty) are dropped.
pub fn read_breast_cancer<R: Read>(input: R, path: &Path) -> Result<FeatureTable> {
    let (headers, rows) = read_table(input, path)?;
    let mut expected = vec!["id"];
    expected.extend(BREAST_CANCER_FEATURES);
    expected.push("class");
    if headers != expected {
        return Err(schema_error(
            path,
            format!("breast-cancer header {headers:?}, expected {expected:?}"),
        ));
    }
    check_rows(path, "breast-cancer", rows.len(), BREAST_CANCER_ROWS);
    let total = rows.len();
    let rows: Vec<(u64, Vec<String>)> = rows
        .into_iter()
        .filter(|(_, r)| r.iter().all(|v| !v.is_empty() && v != "?"))
        .collect();
    if rows.len() < total {
        log::info!("{}: dropped {} rows with missing cells", path.display(), total - rows.len());
    }
    // sample code numbers repeat in the public file, so ids come from line numbers
    let ids = rows.iter().map(|(line, _)| format!("bc-{line}")).collect();
    let mut b = TableBuilder::new(ids);
    for (k, name) in BREAST_CANCER_FEATURES.iter().enumerate() {
        b = b.numeric(*name, numeric_column(path, &rows, k + 1, name)?);
    }
    b.build()?.with_labels(rows.into_iter().map(|(_, r)| r[10].clone()).collect())
}

pub fn load_breast_cancer(path: &Path) -> Result<FeatureTable> {
    read_breast_cancer(open(path)?, path)
}

/// Generic feature CSV. `id_column` names the row-id column (default: row
/// numbers), `targets` become numeric targets, `label` a class column.
/// Remaining columns are numeric when every cell parses, otherwise one-hot
/// encoded.
pub fn read_feature_csv<R: Read>(
    input: R,
    path: &Path,
    id_column: Option<&str>,
    targets: &[&str],
    label: Option<&str>,
) -> Result<FeatureTable> {
    let (headers, rows) = read_table(input, path)?;
    let find = |name: &str| {
        let key = normalize_header(name);
        headers
            .iter()
            .position(|h| *h == key)
            .ok_or_else(|| schema_error(path, format!("column `{name}` not found in {headers:?}")))
    };
    let id_col = id_column.map(find).transpose()?;
    let target_cols: Vec<usize> = targets
        .iter()
        .map(|t| find(t).map_err(|_| Error::TargetMissing(t.to_string())))
        .collect::<Result<_>>()?;
    let label_col = label.map(find).transpose()?;
    let reserved: BTreeSet<usize> = id_col.iter().chain(&target_cols).chain(&label_col).copied().collect();

    let ids: Vec<String> = match id_col {
        Some(c) => rows.iter().map(|(_, r)| r[c].clone()).collect(),
        None => (1..=rows.len()).map(|i| format!("row-{i}")).collect(),
    };
    let mut b = TableBuilder::new(ids);
    for (c, name) in headers.iter().enumerate() {
        if reserved.contains(&c) {
            continue;
        }
        let cells: Vec<&str> = rows.iter().map(|(_, r)| r[c].as_str()).collect();
        if cells.iter().all(|v| v.parse::<f64>().is_ok_and(f64::is_finite)) {
            b = b.numeric(name.clone(), numeric_column(path, &rows, c, name)?);
        } else {
            b = b.categorical(name, &cells);
        }
    }
    for (&c, name) in target_cols.iter().zip(targets) {
        b = b.target(normalize_header(name), numeric_column(path, &rows, c, name)?);
    }
    let table = b.build()?;
    match label_col {
        Some(c) => table.with_labels(rows.into_iter().map(|(_, r)| r[c].clone()).collect()),
        None => Ok(table),
    }
}

pub fn load_feature_csv(path: &Path, id_column: Option<&str>, targets: &[&str], label: Option<&str>) -> Result<FeatureTable> {
    read_feature_csv(open(path)?, path, id_column, targets, label)
}

/// Big Mac index extract: first column is the country id, `dollar_price` is
/// the regression target, every other column a feature.
pub fn read_big_mac<R: Read>(input: R, path: &Path) -> Result<FeatureTable> {
    let mut buf = Vec::new();
    let mut input = input;
    input.read_to_end(&mut buf)?;
    let (headers, _) = read_table(buf.as_slice(), path)?;
    if headers.len() < 3 || !headers.iter().any(|h| h == BIG_MAC_TARGET) {
        return Err(schema_error(
            path,
            format!("big-mac header {headers:?} needs an id column, features and `{BIG_MAC_TARGET}`"),
        ));
    }
    let id = headers[0].clone();
    if id == BIG_MAC_TARGET {
        return Err(schema_error(path, "first big-mac column must be the country id".into()));
    }
    let table = read_feature_csv(buf.as_slice(), path, Some(&id), &[BIG_MAC_TARGET], None)?;
    check_rows(path, "big-mac", table.nrows(), BIG_MAC_ROWS);
    Ok(table)
}

pub fn load_big_mac(path: &Path) -> Result<FeatureTable> {
    read_big_mac(open(path)?, path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rating {
    pub user: String,
    pub movie: String,
    pub rating: f64,
}

/// Ratings plus one text document per movie.
#[derive(Debug, Clone, PartialEq)]
pub struct MovieData {
    pub ratings: Vec<Rating>,
    pub documents: Vec<(String, String)>,
}

impl MovieData {
    /// Distinct users in order of first appearance.
    pub fn users(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        self.ratings
            .iter()
            .filter(|r| seen.insert(r.user.as_str()))
            .map(|r| r.user.clone())
            .collect()
    }
}

/// `user_id,movie_id,rating` and `movie_id,description,tagline`; the
/// document text is description and tagline joined by a space.
pub fn read_movies<R1: Read, R2: Read>(ratings: R1, ratings_path: &Path, movies: R2, movies_path: &Path) -> Result<MovieData> {
    let (headers, rows) = read_table(ratings, ratings_path)?;
    if headers != ["user_id", "movie_id", "rating"] {
        return Err(schema_error(ratings_path, format!("ratings header {headers:?}")));
    }
    let ratings: Vec<Rating> = rows
        .into_iter()
        .map(|(line, r)| {
            Ok(Rating {
                rating: parse_number(ratings_path, line, "rating", &r[2])?,
                user: r[0].clone(),
                movie: r[1].clone(),
            })
        })
        .collect::<Result<_>>()?;
    let (headers, rows) = read_table(movies, movies_path)?;
    if headers != ["movie_id", "description", "tagline"] {
        return Err(schema_error(movies_path, format!("movie metadata header {headers:?}")));
    }
    let documents = rows
        .into_iter()
        .map(|(_, r)| (r[0].clone(), format!("{} {}", r[1], r[2]).trim().to_string()))
        .collect();
    let data = MovieData { ratings, documents };
    let users = data.users().len();
    if users != MOVIE_USERS {
        log::warn!("{}: {users} users, reference size is {MOVIE_USERS}", ratings_path.display());
    }
    Ok(data)
}

/// Reads `ratings.csv` and `movies.csv` from `dir`.
pub fn load_movies(dir: &Path) -> Result<MovieData> {
    let (rp, mp) = (dir.join("ratings.csv"), dir.join("movies.csv"));
    read_movies(open(&rp)?, &rp, open(&mp)?, &mp)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Table(FeatureTable),
    Movies(MovieData),
}

/// `name` is one of `iris`, `breast-cancer`, `big-mac`, `movies`; `path` is
/// the CSV file (a directory for `movies`).
pub fn load_dataset(name: &str, path: &Path) -> Result<Dataset> {
    match name {
        "iris" => load_iris(path).map(Dataset::Table),
        "breast-cancer" => load_breast_cancer(path).map(Dataset::Table),
        "big-mac" => load_big_mac(path).map(Dataset::Table),
        "movies" => load_movies(path).map(Dataset::Movies),
        other => Err(Error::InvalidConfig(format!("unknown dataset `{other}`"))),
    }
}

/// Conventional location of a dataset under a data directory.
pub fn default_path(data_dir: &Path, name: &str) -> PathBuf {
    match name {
        "iris" => data_dir.join("iris.csv"),
        "breast-cancer" => data_dir.join("breast-cancer.csv"),
        "big-mac" => data_dir.join("bigmac.csv"),
        _ => data_dir.join(name),
    }
}
