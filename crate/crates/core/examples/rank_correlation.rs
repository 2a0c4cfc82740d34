//! Spearman rank correlation with the t-approximation and the exact
//! permutation p-value.
//!
//! Run with `cargo run --example rank_correlation`.

use strapsim::eval::{spearman_with, PValueMethod};

fn main() -> strapsim::Result<()> {
    let similarity = [0.91, 0.85, 0.40, 0.77, 0.12, 0.55];
    let correlation = [0.88, 0.79, 0.35, 0.81, 0.05, 0.30];
    for method in [PValueMethod::TApprox, PValueMethod::Exact] {
        let r = spearman_with(&similarity, &correlation, method)?;
        println!("{method:?}: rho = {:.4}, p = {:.4}", r.rho, r.p_value);
    }
    Ok(())
}
