//! Random-forest proximity as a constituent similarity: tune a forest on a
//! synthetic bond table, then compare two funds with STRAPSim using the
//! leaf-sharing proximity between their bonds.
//!
//! Run with `cargo run --release --example forest_proximity`.

use rand::Rng;
use strapsim::constituent::{forest_proximity, tune_and_train, TableBuilder, TuningConfig};
use strapsim::metrics::strapsim;
use strapsim::{align_matrix, WeightedSet};

fn main() -> strapsim::Result<()> {
    let mut rng = strapsim::rng::rng(3);
    let n = 120;
    let ids: Vec<String> = (0..n).map(|i| format!("bond-{i:03}")).collect();
    let maturity: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..30.0)).collect();
    let coupon: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..7.0)).collect();
    let sector: Vec<&str> = (0..n).map(|i| ["utility", "bank", "tech"][i % 3]).collect();
    let spread: Vec<f64> = maturity
        .iter()
        .zip(&coupon)
        .zip(&sector)
        .map(|((m, c), s)| 40.0 + 3.0 * m + 10.0 * c + if *s == "bank" { 35.0 } else { 0.0 })
        .collect();
    let table = TableBuilder::new(ids.clone())
        .numeric("maturity", maturity)
        .numeric("coupon", coupon)
        .categorical("sector", &sector)
        .target("spread", spread)
        .build()?;

    let tuning = TuningConfig {
        trees_grid: vec![25, 50],
        depth_grid: vec![4, 8],
        ..TuningConfig::default()
    };
    let (model, reports) = tune_and_train(&table, &["spread"], &tuning)?;
    for r in &reports {
        println!(
            "{}: {} trees, depth {}, test RMSE {:.2}",
            r.target, r.trees, r.max_depth, r.test_rmse
        );
    }
    let proximity = forest_proximity(&model, &table)?;

    let fund_a = WeightedSet::new("fund-a", ids[..10].iter().cloned().zip([0.1; 10]), false)?;
    let fund_b = WeightedSet::new("fund-b", ids[5..20].iter().cloned().zip([1.0 / 15.0; 15]), false)?;
    let s = align_matrix(&proximity, &fund_a, &fund_b)?;
    let trace = strapsim(&fund_a, &fund_b, &s)?;
    println!(
        "STRAPSim(fund-a, fund-b) = {:.4}, residual {:.4}, {} matches",
        trace.total_score,
        trace.total_residual,
        trace.steps.len()
    );
    Ok(())
}
