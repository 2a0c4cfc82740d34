//! Similarity matrices as CSV (id header row and id first column) or JSON.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{csv_error, line_of, open, parse_number};
use crate::matrix::SimilarityMatrix;
use crate::set::ConstituentId;

/// `{ "ids": [...], "values": [[...]] }` for self mode, or separate
/// `row_ids` / `col_ids` for a rectangular matrix.
#[derive(Debug, Serialize, Deserialize)]
struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ids: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    row_ids: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    col_ids: Option<Vec<String>>,
    values: Vec<Vec<f64>>,
}

fn to_ids(raw: Vec<String>) -> Result<Vec<ConstituentId>> {
    raw.into_iter().map(ConstituentId::new).collect()
}

fn warn_clamped(m: &SimilarityMatrix, path: &Path) {
    if m.clamped_count() > 0 {
        log::warn!(
            "{}: {} similarity value(s) outside [0, 1] were clamped",
            path.display(),
            m.clamped_count()
        );
    }
}

fn build(row_ids: Vec<String>, col_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<SimilarityMatrix> {
    if row_ids == col_ids {
        let n = row_ids.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquareWhenSelfMode {
                rows: rows.len(),
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        return SimilarityMatrix::square(to_ids(row_ids)?, rows.into_iter().flatten().collect());
    }
    SimilarityMatrix::from_rows(to_ids(row_ids)?, to_ids(col_ids)?, rows)
}

/// Header row `<any>,id1,id2,...`; each following row `id,v1,v2,...`. When
/// the row ids equal the column ids the matrix is validated in self mode.
pub fn read_matrix_csv<R: Read>(input: R, path: &Path) -> Result<SimilarityMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.len() < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "matrix header needs a corner cell and at least one column id".into(),
        });
    }
    let col_ids: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let (mut row_ids, mut rows) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = line_of(&record);
        if record.len() != headers.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("{} fields, expected {}", record.len(), headers.len()),
            });
        }
        row_ids.push(record[0].to_string());
        rows.push(
            record
                .iter()
                .skip(1)
                .map(|v| parse_number(path, line, "similarity", v))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    let m = build(row_ids, col_ids, rows)?;
    warn_clamped(&m, path);
    Ok(m)
}

pub fn read_matrix_json<R: Read>(input: R, path: &Path) -> Result<SimilarityMatrix> {
    let raw: MatrixJson = serde_json::from_reader(input)?;
    let m = match (raw.ids, raw.row_ids, raw.col_ids) {
        (Some(ids), None, None) => build(ids.clone(), ids, raw.values)?,
        (None, Some(r), Some(c)) => build(r, c, raw.values)?,
        _ => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: "matrix JSON needs either `ids` or both `row_ids` and `col_ids`".into(),
            })
        }
    };
    warn_clamped(&m, path);
    Ok(m)
}

/// Dispatches on the extension: `.json` is JSON, anything else CSV.
pub fn load_matrix(path: &Path) -> Result<SimilarityMatrix> {
    let file = open(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        read_matrix_json(file, path)
    } else {
        read_matrix_csv(file, path)
    }
}

pub fn write_matrix_csv<W: Write>(m: &SimilarityMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string()];
    header.extend(m.col_ids().iter().map(|c| c.to_string()));
    w.write_record(&header)?;
    for (i, id) in m.row_ids().iter().enumerate() {
        let mut row = vec![id.to_string()];
        row.extend(m.row(i).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_json<W: Write>(m: &SimilarityMatrix, out: W) -> Result<()> {
    let rows: Vec<Vec<f64>> = (0..m.shape().0).map(|i| m.row(i).to_vec()).collect();
    let names = |ids: &[ConstituentId]| ids.iter().map(|c| c.to_string()).collect::<Vec<_>>();
    let doc = if m.is_self_mode() {
        MatrixJson {
            ids: Some(names(m.row_ids())),
            row_ids: None,
            col_ids: None,
            values: rows,
        }
    } else {
        MatrixJson {
            ids: None,
            row_ids: Some(names(m.row_ids())),
            col_ids: Some(names(m.col_ids())),
            values: rows,
        }
    };
    serde_json::to_writer_pretty(out, &doc)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str) -> Result<SimilarityMatrix> {
        read_matrix_csv(text.as_bytes(), Path::new("m.csv"))
    }

    #[test]
    fn identity_is_self_mode() {
        let m = csv("id,a,b\na,1,0\nb,0,1\n").unwrap();
        assert!(m.is_self_mode());
        assert_eq!(m.lookup("a", "b"), Some(0.0));
    }

    #[test]
    fn out_of_range_is_clamped() {
        let m = csv("id,a,b\na,1,1.3\nb,1.3,1\n").unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.clamped_count(), 2);
    }

    #[test]
    fn asymmetric_self_mode_rejected() {
        assert!(matches!(
            csv("id,a,b\na,1,0.5\nb,0.4,1\n"),
            Err(Error::AsymmetryBeyondTolerance { .. })
        ));
        assert!(matches!(
            read_matrix_json(r#"{"ids":["a","b"],"values":[[1,0.5]]}"#.as_bytes(), Path::new("m.json")),
            Err(Error::NotSquareWhenSelfMode { .. })
        ));
    }

    #[test]
    fn rectangular_csv() {
        let m = csv("id,x,y,z\na,0.1,0.2,0.3\n").unwrap();
        assert_eq!(m.shape(), (1, 3));
        assert!(!m.is_self_mode());
    }

    #[test]
    fn round_trips() {
        let m = csv("id,a,b,c\na,1,0.123456789,0\nb,0.123456789,1,0.5\nc,0,0.5,1\n").unwrap();
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        assert_eq!(read_matrix_csv(buf.as_slice(), Path::new("m.csv")).unwrap(), m);
        let mut buf = Vec::new();
        write_matrix_json(&m, &mut buf).unwrap();
        assert_eq!(read_matrix_json(buf.as_slice(), Path::new("m.json")).unwrap(), m);
        let r = csv("id,x,y\na,0.1,0.2\n").unwrap();
        let mut buf = Vec::new();
        write_matrix_json(&r, &mut buf).unwrap();
        assert_eq!(read_matrix_json(buf.as_slice(), Path::new("m.json")).unwrap(), r);
    }
}
