//! Reading holdings and a similarity matrix from CSV text, computing one
//! metric matrix and writing it back out.
//!
//! Run with `cargo run --example file_formats`.

use std::path::Path;

use strapsim::experiments::labels_of;
use strapsim::ingest::{read_holdings, read_matrix_csv, write_matrix_csv};
use strapsim::metrics::pairwise_matrix;
use strapsim::{Metric, MetricOptions, SimilarityMatrix};

const HOLDINGS: &str = "portfolio_id,constituent_id,weight
core,a,40
core,b,35
core,c,25
tilt,a,10
tilt,d,60
tilt,c,30
";

const MATRIX: &str = "id,a,b,c,d
a,1,0.3,0.1,0.7
b,0.3,1,0.2,0.4
c,0.1,0.2,1,0.1
d,0.7,0.4,0.1,1
";

fn main() -> strapsim::Result<()> {
    // `true` rescales each portfolio's weights to sum to one
    let sets = read_holdings(HOLDINGS.as_bytes(), Path::new("holdings.csv"), true)?;
    let s = read_matrix_csv(MATRIX.as_bytes(), Path::new("matrix.csv"))?;
    let results = pairwise_matrix(&sets, Some(&s), Metric::Strapsim, &MetricOptions::default())?;

    let scores: Vec<f64> = results.iter().flatten().map(|r| r.score.min(1.0)).collect();
    let out = SimilarityMatrix::square(labels_of(&sets)?, scores)?;
    let mut buf = Vec::new();
    write_matrix_csv(&out, &mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));

    // errors carry file and line context
    let bad = "portfolio_id,constituent_id,weight\ncore,a,-1\n";
    if let Err(e) = read_holdings(bad.as_bytes(), Path::new("bad.csv"), false) {
        println!("rejected: {e}");
    }
    Ok(())
}
