//! `portfolio_id,constituent_id,weight` files.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::{csv_error, csv_reader, expect_header, format_weight, line_of, open, parse_number};
use crate::set::WeightedSet;

pub const HOLDINGS_HEADER: [&str; 3] = ["portfolio_id", "constituent_id", "weight"];

/// One set per portfolio, in order of first appearance; entries keep file order.
pub fn read_holdings<R: Read>(input: R, path: &Path, normalize: bool) -> Result<Vec<WeightedSet>> {
    let mut reader = csv_reader(input);
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    expect_header(path, &headers, &HOLDINGS_HEADER)?;

    let mut order: Vec<String> = Vec::new();
    let mut entries: HashMap<String, Vec<(String, f64)>> = HashMap::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = line_of(&record);
        let (portfolio, constituent, weight) = (&record[0], &record[1], &record[2]);
        if portfolio.is_empty() || constituent.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: "empty portfolio or constituent id".into(),
            });
        }
        let weight = parse_number(path, line, "weight", weight)?;
        if weight < 0.0 {
            return Err(Error::NegativeHoldingWeight {
                path: path.to_path_buf(),
                line,
                weight,
            });
        }
        if !seen.insert((portfolio.to_string(), constituent.to_string())) {
            return Err(Error::DuplicateHolding {
                path: path.to_path_buf(),
                line,
                portfolio: portfolio.to_string(),
                constituent: constituent.to_string(),
            });
        }
        if !entries.contains_key(portfolio) {
            order.push(portfolio.to_string());
        }
        entries
            .entry(portfolio.to_string())
            .or_default()
            .push((constituent.to_string(), weight));
    }
    order
        .into_iter()
        .map(|p| {
            let rows = entries.remove(&p).expect("every ordered portfolio has entries");
            WeightedSet::new(p, rows, normalize)
        })
        .collect()
}

pub fn load_holdings(path: &Path, normalize: bool) -> Result<Vec<WeightedSet>> {
    read_holdings(open(path)?, path, normalize)
}

pub fn write_holdings<W: Write>(sets: &[WeightedSet], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HOLDINGS_HEADER)?;
    for set in sets {
        for (id, weight) in set.iter() {
            w.write_record([set.label(), id.as_str(), &format_weight(weight)])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<Vec<WeightedSet>> {
        read_holdings(text.as_bytes(), Path::new("h.csv"), false)
    }

    #[test]
    fn groups_by_portfolio_in_file_order() {
        let sets = read("portfolio_id,constituent_id,weight\r\np2,b,0.5\r\np1,a,1\r\np2,a,0.25\r\n").unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0].label(), "p2");
        assert_eq!(sets[0].ids()[1].as_str(), "a");
        assert_eq!(sets[0].weights(), &[0.5, 0.25]);
    }

    #[test]
    fn rejects_bad_rows() {
        let dup = read("portfolio_id,constituent_id,weight\np1,bondA,1\np1,bondA,2\n");
        assert!(matches!(dup, Err(Error::DuplicateHolding { line: 3, .. })));
        let neg = read("portfolio_id,constituent_id,weight\np1,a,-1\n");
        assert!(matches!(neg, Err(Error::NegativeHoldingWeight { line: 2, .. })));
        let junk = read("portfolio_id,constituent_id,weight\np1,a,abc\n");
        assert!(matches!(junk, Err(Error::Parse { line: 2, .. })));
        let header = read("portfolio,constituent,weight\n");
        assert!(matches!(header, Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn write_then_read_is_identity() {
        let sets = read("portfolio_id,constituent_id,weight\np,x,0.1\np,y,0.333333333333\nq,x,7\n").unwrap();
        let mut buf = Vec::new();
        write_holdings(&sets, &mut buf).unwrap();
        let back = read(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, sets);
    }
}
