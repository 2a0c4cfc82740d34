//! Step-by-step STRAPSim trace on two small colour portfolios, checked
//! against the exact transport optimum.
//!
//! Run with `cargo run --example colour_trace`.

use strapsim::metrics::{exact_transport_oracle, strapsim};
use strapsim::{SimilarityMatrix, WeightedSet};

fn main() -> strapsim::Result<()> {
    let reference = WeightedSet::new(
        "reference",
        [("orange", 0.20), ("yellow", 0.30), ("green", 0.05), ("purple", 0.45)],
        false,
    )?;
    let candidate = WeightedSet::new(
        "candidate",
        [("orange", 0.25), ("yellow", 0.40), ("green", 0.07), ("pink", 0.03)],
        false,
    )?;
    // Same colours match perfectly; purple and pink are close.
    #[rustfmt::skip]
    let s = SimilarityMatrix::new(
        reference.ids().to_vec(),
        candidate.ids().to_vec(),
        vec![
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 0.98,
        ],
    )?;

    let trace = strapsim(&reference, &candidate, &s)?;
    println!("{:<8} {:<8} {:>6} {:>6} {:>8}", "from", "to", "S", "mass", "score");
    for step in &trace.steps {
        println!(
            "{:<8} {:<8} {:>6.2} {:>6.2} {:>8.4}",
            reference.ids()[step.row].as_str(),
            candidate.ids()[step.col].as_str(),
            step.score,
            step.mass,
            step.contribution
        );
    }
    println!("\nSTRAPSim score: {:.4}", trace.total_score);
    println!("residual total: {:.4}", trace.total_residual);
    for (id, r) in reference.ids().iter().zip(&trace.residual_x) {
        println!("  left on reference {:<7} {r:.2}", id.as_str());
    }
    for (id, r) in candidate.ids().iter().zip(&trace.residual_y) {
        println!("  left on candidate {:<7} {r:.2}", id.as_str());
    }

    let plan = exact_transport_oracle(&reference, &candidate, &s)?;
    println!("\nexact transport optimum: {:.4}", plan.objective);
    Ok(())
}
