//! All four set metrics side by side on bond-like portfolios that share
//! few identical holdings but many similar ones.
//!
//! Run with `cargo run --example compare_metrics`.

use strapsim::metrics::pairwise_matrix;
use strapsim::{Metric, MetricOptions, SimilarityMatrix, WeightedSet};

fn main() -> strapsim::Result<()> {
    let funds = vec![
        WeightedSet::new("short-duration", [("ust-2y", 0.5), ("corp-a-3y", 0.3), ("corp-b-2y", 0.2)], true)?,
        WeightedSet::new("intermediate", [("ust-5y", 0.4), ("corp-a-5y", 0.4), ("corp-b-2y", 0.2)], true)?,
        WeightedSet::new("long-duration", [("ust-30y", 0.6), ("corp-c-20y", 0.4)], true)?,
    ];
    let ids = [
        "ust-2y", "ust-5y", "ust-30y", "corp-a-3y", "corp-a-5y", "corp-b-2y", "corp-c-20y",
    ];
    #[rustfmt::skip]
    let values = vec![
        // ust-2y ust-5y ust-30y a-3y  a-5y  b-2y  c-20y
        1.00, 0.85, 0.40, 0.60, 0.50, 0.65, 0.20,
        0.85, 1.00, 0.55, 0.55, 0.60, 0.50, 0.30,
        0.40, 0.55, 1.00, 0.20, 0.30, 0.15, 0.70,
        0.60, 0.55, 0.20, 1.00, 0.90, 0.75, 0.35,
        0.50, 0.60, 0.30, 0.90, 1.00, 0.65, 0.45,
        0.65, 0.50, 0.15, 0.75, 0.65, 1.00, 0.25,
        0.20, 0.30, 0.70, 0.35, 0.45, 0.25, 1.00,
    ];
    let s = SimilarityMatrix::square(
        ids.iter().map(|i| strapsim::ConstituentId::new(*i)).collect::<strapsim::Result<_>>()?,
        values,
    )?;

    let options = MetricOptions::default();
    for metric in Metric::ALL {
        let m = pairwise_matrix(&funds, Some(&s), metric, &options)?;
        println!("{metric}");
        for (a, row) in m.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|r| format!("{:.3} ({:.3})", r.score, r.residual)).collect();
            println!("  {:<15} {}", funds[a].label(), cells.join("  "));
        }
    }
    println!("\ncells are score (residual)");
    Ok(())
}
