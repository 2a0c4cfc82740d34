//! Iris rows as weighted sets over feature names: feature cosine matrix,
//! then 10-fold KNN classification with every metric.
//!
//! Run with `cargo run --release --example tabular_knn [path/to/iris.csv]`.

use std::path::PathBuf;

use strapsim::constituent::{feature_correlation_matrix, max_scale};
use strapsim::experiments::{run_tabular, ExperimentConfig};
use strapsim::ingest::load_iris;
use strapsim::Metric;

fn main() -> strapsim::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/iris.csv")));
    let iris = load_iris(&path)?;

    let s = feature_correlation_matrix(&max_scale(&iris)?)?;
    println!("feature similarity:");
    for (i, a) in s.row_ids().iter().enumerate() {
        let row: Vec<String> = s.row(i).iter().map(|v| format!("{v:.3}")).collect();
        println!("  {:<13} {}", a.as_str(), row.join(" "));
    }

    let config = ExperimentConfig::default();
    let outcome = run_tabular("iris", &iris, None, &config)?;
    println!("\naccuracy by k:");
    print!("  {:<17}", "metric");
    for k in &config.k_sweep {
        print!(" k={k:<4}");
    }
    println!();
    for metric in Metric::ALL {
        print!("  {:<17}", metric.name());
        for &k in &config.k_sweep {
            let acc = outcome.report(metric, k).and_then(|r| r.get("accuracy")).unwrap_or(f64::NAN);
            print!(" {acc:.3}");
        }
        println!();
    }
    Ok(())
}
