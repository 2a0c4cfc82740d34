//! User-based rating prediction where users are weighted sets of rated
//! movies and movie similarity is TF-IDF cosine of their metadata.
//!
//! Run with `cargo run --release --example movie_ratings [data/movies] [users]`.

use std::path::PathBuf;

use strapsim::experiments::{run_movies, ExperimentConfig};
use strapsim::ingest::load_movies;
use strapsim::Metric;

fn main() -> strapsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/movies")));
    let users: usize = args.next().and_then(|u| u.parse().ok()).unwrap_or(60);

    let data = load_movies(&dir)?;
    let config = ExperimentConfig {
        k: 20,
        movie_users: users,
        ..ExperimentConfig::default()
    };
    let outcome = run_movies(&data, &config)?;
    println!(
        "{} users, {} hidden ratings predicted ({} without any neighbour rating)",
        outcome.users.len(),
        outcome.predicted,
        outcome.fallbacks
    );
    for r in &outcome.reports {
        let get = |m| r.get(m).unwrap_or(f64::NAN);
        println!(
            "  {:<19} rmse {:.4}  mae {:.4}  mape {:.2}%",
            r.metric,
            get("rmse"),
            get("mae"),
            get("mape")
        );
    }
    for metric in Metric::ALL {
        println!("  mean residual share {:<17} {:.4}", metric.name(), outcome.mean_residual(metric));
    }
    Ok(())
}
