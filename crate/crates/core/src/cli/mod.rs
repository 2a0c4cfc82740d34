//! Command-line front end: argument parsing, the serializable [`RunConfig`]
//! and the process entry point used by the `strapsim` binary.
//!
//! Every subcommand is first turned into a [`RunConfig`]; execution only
//! ever sees that value, so a `run-config.json` written next to the outputs
//! replays the exact run with `strapsim --config run-config.json`.

mod commands;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ranking::Period;
use crate::experiments::{ExperimentConfig, EXPERIMENTS};
use crate::ingest::datasets::default_path;
use crate::ingest::synthetic::{OverlapProfile, SyntheticUniverseSpec};
use crate::metrics::Metric;

pub use commands::{cmd_experiment, cmd_generate_synthetic, cmd_proximity, cmd_similarity, execute, write_outputs};

pub const RUN_CONFIG_FILE: &str = "run-config.json";
pub const LOG_ENV: &str = "STRAPSIM_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "strapsim",
    version,
    about = "Residual-aware similarity between weighted sets",
    long_about = "Residual-aware similarity between weighted sets.\n\n\
                  Log level is read from the STRAPSIM_LOG environment variable \
                  (error, warn, info, debug, trace; default warn)."
)]
pub struct Cli {
    /// Report errors as a single JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,

    /// Worker threads for parallel sections (default: available cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Output directory. Overrides the directory stored in `--config`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Replay a saved run-config.json instead of giving a subcommand.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pairwise set similarity and residual matrices for a holdings file.
    Similarity(SimilarityArgs),
    /// Train a random forest on constituent features and emit its proximity matrix.
    Proximity(ProximityArgs),
    /// Run a benchmark pipeline with every selected metric.
    Experiment(ExperimentArgs),
    /// Write a synthetic portfolio universe (holdings, returns, loadings).
    GenerateSynthetic(SyntheticArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Flags shared by the metric-computing subcommands.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Metrics to compute, comma separated or repeated; `all` selects every metric.
    #[arg(long = "metric", value_delimiter = ',', default_value = "all")]
    pub metrics: Vec<String>,
    /// Neighbour count (default 5, or 20 for the movie task).
    #[arg(long)]
    pub k: Option<usize>,
    /// Cross-validation folds (default 10, or 5 for proximity tuning).
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// STRAPSim only moves weight across pairs scoring strictly above this.
    #[arg(long, default_value_t = 0.0)]
    pub min_match_sim: f64,
    /// Rescale every set's weights to sum to one.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

/// Where weighted sets and their constituent similarities come from.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
pub struct SetInputs {
    /// Holdings CSV with header `portfolio_id,constituent_id,weight`.
    #[arg(long, value_name = "FILE")]
    pub holdings: Option<PathBuf>,
    /// Precomputed constituent similarity matrix (CSV, or JSON by extension).
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Constituent feature CSV. Similarity is the cosine between rows, or
    /// forest proximity when `--proximity-model` is given.
    #[arg(long, value_name = "FILE", conflicts_with = "matrix")]
    pub constituent_features: Option<PathBuf>,
    /// Column of `--constituent-features` holding constituent ids.
    #[arg(long, default_value = "constituent_id")]
    #[serde(default = "default_id_column")]
    pub id_column: String,
    /// Model JSON written by `strapsim proximity`.
    #[arg(long, value_name = "FILE", requires = "constituent_features")]
    pub proximity_model: Option<PathBuf>,
}

fn default_id_column() -> String {
    "constituent_id".into()
}

#[derive(Debug, Clone, Args)]
pub struct SimilarityArgs {
    #[command(flatten)]
    pub inputs: SetInputs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ProximityArgs {
    /// Feature CSV with one row per constituent.
    #[arg(long, value_name = "FILE")]
    pub features: PathBuf,
    /// Target column(s) the forest is trained on.
    #[arg(long = "target", value_delimiter = ',', required = true)]
    pub targets: Vec<String>,
    #[arg(long, default_value = "constituent_id")]
    pub id_column: String,
    /// Tree counts tried during tuning.
    #[arg(long, value_delimiter = ',', default_value = "50,100")]
    pub trees: Vec<usize>,
    /// Maximum depths tried during tuning.
    #[arg(long, value_delimiter = ',', default_value = "4,8,12")]
    pub depths: Vec<usize>,
    /// Share of rows held out for the test report.
    #[arg(long, default_value_t = 0.1)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 2)]
    pub min_leaf: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// One of iris, breast-cancer, big-mac, movies, etf-ranking, synthetic-etf.
    pub dataset: String,
    /// Dataset file (a directory holding ratings.csv and movies.csv for movies).
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Directory searched for datasets when `--data` is absent.
    #[arg(long, value_name = "DIR", default_value = "data")]
    pub data_dir: PathBuf,
    /// Return series CSV for etf-ranking (`entity_id,period,return`).
    #[arg(long, value_name = "FILE")]
    pub returns: Option<PathBuf>,
    #[command(flatten)]
    pub inputs: SetInputs,
    /// Additional neighbour counts reported for tabular tasks.
    #[arg(long, value_delimiter = ',', default_value = "1,3,5,10,20")]
    pub k_sweep: Vec<usize>,
    /// Users sampled for the movie task (0 keeps every user).
    #[arg(long, default_value_t = 200)]
    pub movie_users: usize,
    /// Share of each test user's ratings that is hidden and predicted.
    #[arg(long, default_value_t = 0.2)]
    pub movie_holdout: f64,
    /// Number of synthetic universes (consecutive seeds) for synthetic-etf.
    #[arg(long, default_value_t = 10)]
    pub synthetic_seeds: usize,
    /// Portfolios in the planted-concordance universe.
    #[arg(long, default_value_t = 20)]
    pub planted_portfolios: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 20)]
    pub portfolios: usize,
    #[arg(long, default_value_t = 2000)]
    pub constituents: usize,
    #[arg(long, default_value_t = 4)]
    pub factors: usize,
    #[arg(long, default_value_t = 100)]
    pub holdings_per_portfolio: usize,
    /// Probability that a holding comes from its sector's shared core.
    #[arg(long, default_value_t = 0.5)]
    pub overlap: f64,
    /// Standard deviation of idiosyncratic monthly returns.
    #[arg(long, default_value_t = 0.005)]
    pub noise: f64,
    #[arg(long, default_value_t = 26)]
    pub periods: usize,
    /// First return period, `YYYY-MM`.
    #[arg(long, default_value = "2022-02")]
    pub start: String,
    /// Build the planted-concordance universe (one constituent per portfolio).
    #[arg(long)]
    pub planted: bool,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

/// Everything a run depends on. Serialized as `run-config.json` into the
/// output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: CommandConfig,
    pub metrics: Vec<Metric>,
    pub k: usize,
    pub folds: usize,
    pub seed: u64,
    pub min_match_sim: f64,
    pub normalize: bool,
    pub out: PathBuf,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandConfig {
    Similarity {
        inputs: SetInputs,
    },
    Proximity {
        features: PathBuf,
        id_column: String,
        targets: Vec<String>,
        trees: Vec<usize>,
        depths: Vec<usize>,
        test_fraction: f64,
        min_leaf: usize,
    },
    Experiment {
        dataset: String,
        data: Option<PathBuf>,
        returns: Option<PathBuf>,
        inputs: SetInputs,
        k_sweep: Vec<usize>,
        movie_users: usize,
        movie_holdout: f64,
        synthetic: Option<SyntheticUniverseSpec>,
        synthetic_seeds: usize,
        planted_portfolios: usize,
    },
    GenerateSynthetic {
        spec: SyntheticUniverseSpec,
    },
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&commands::read_text(path)?)
    }

    /// Harness settings for `experiment` runs.
    pub fn experiment_config(&self) -> ExperimentConfig {
        let mut config = ExperimentConfig {
            metrics: self.metrics.clone(),
            k: self.k,
            folds: self.folds,
            seed: self.seed,
            min_match_sim: self.min_match_sim,
            normalize: self.normalize,
            ..ExperimentConfig::default()
        };
        if let CommandConfig::Experiment {
            k_sweep,
            movie_users,
            movie_holdout,
            synthetic,
            synthetic_seeds,
            planted_portfolios,
            ..
        } = &self.command
        {
            config.k_sweep = k_sweep.clone();
            config.movie_users = *movie_users;
            config.movie_holdout = *movie_holdout;
            if let Some(spec) = synthetic {
                config.synthetic = spec.clone();
            }
            config.synthetic_seeds = *synthetic_seeds;
            config.planted_portfolios = *planted_portfolios;
        }
        config
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.k == 0 {
            return bad("--k must be at least 1".into());
        }
        if !(self.min_match_sim.is_finite()) {
            return bad("--min-match-sim must be finite".into());
        }
        if self.metrics.is_empty() && !matches!(self.command, CommandConfig::GenerateSynthetic { .. }) {
            return bad("select at least one metric".into());
        }
        match &self.command {
            CommandConfig::Experiment {
                dataset,
                k_sweep,
                movie_holdout,
                ..
            } => {
                if !EXPERIMENTS.contains(&dataset.as_str()) {
                    return bad(format!(
                        "unknown dataset `{dataset}` (expected one of {})",
                        EXPERIMENTS.join(", ")
                    ));
                }
                if k_sweep.contains(&0) {
                    return bad("--k-sweep values must be at least 1".into());
                }
                if !(0.0..1.0).contains(movie_holdout) {
                    return bad("--movie-holdout must lie in [0, 1)".into());
                }
            }
            CommandConfig::Proximity { targets, .. } if targets.is_empty() => {
                return bad("proximity needs at least one --target".into());
            }
            CommandConfig::GenerateSynthetic { spec } => spec.validate()?,
            _ => {}
        }
        Ok(())
    }
}

fn parse_metrics(raw: &[String]) -> Result<Vec<Metric>> {
    let mut out: Vec<Metric> = Vec::new();
    for name in raw {
        let name = name.trim();
        if name.eq_ignore_ascii_case("all") {
            out.extend(Metric::ALL);
        } else {
            out.push(name.parse()?);
        }
    }
    let mut seen = Vec::new();
    out.retain(|m| {
        let fresh = !seen.contains(m);
        seen.push(*m);
        fresh
    });
    Ok(out)
}

fn base_config(command: CommandConfig, common: &CommonArgs, k: usize, folds: usize, out: PathBuf) -> Result<RunConfig> {
    Ok(RunConfig {
        command,
        metrics: parse_metrics(&common.metrics)?,
        k: common.k.unwrap_or(k),
        folds: common.folds.unwrap_or(folds),
        seed: common.seed,
        min_match_sim: common.min_match_sim,
        normalize: common.normalize,
        out,
        format: common.format,
    })
}

impl Command {
    /// Resolves defaults and produces the run configuration.
    pub fn into_run_config(self, out: PathBuf) -> Result<RunConfig> {
        let run = match self {
            Command::Similarity(a) => base_config(CommandConfig::Similarity { inputs: a.inputs }, &a.common, 5, 10, out)?,
            Command::Proximity(a) => base_config(
                CommandConfig::Proximity {
                    features: a.features,
                    id_column: a.id_column,
                    targets: a.targets,
                    trees: a.trees,
                    depths: a.depths,
                    test_fraction: a.test_fraction,
                    min_leaf: a.min_leaf,
                },
                &a.common,
                5,
                5,
                out,
            )?,
            Command::Experiment(a) => {
                let data = match a.dataset.as_str() {
                    "iris" | "breast-cancer" | "big-mac" | "movies" => {
                        Some(a.data.unwrap_or_else(|| default_path(&a.data_dir, &a.dataset)))
                    }
                    _ => a.data,
                };
                let k = if a.dataset == "movies" { 20 } else { 5 };
                let synthetic = (a.dataset == "synthetic-etf").then(SyntheticUniverseSpec::default);
                base_config(
                    CommandConfig::Experiment {
                        dataset: a.dataset,
                        data,
                        returns: a.returns,
                        inputs: a.inputs,
                        k_sweep: a.k_sweep,
                        movie_users: a.movie_users,
                        movie_holdout: a.movie_holdout,
                        synthetic,
                        synthetic_seeds: a.synthetic_seeds,
                        planted_portfolios: a.planted_portfolios,
                    },
                    &a.common,
                    k,
                    10,
                    out,
                )?
            }
            Command::GenerateSynthetic(a) => {
                let start: Period = a
                    .start
                    .parse()
                    .map_err(|()| Error::InvalidConfig(format!("--start `{}` is not YYYY-MM", a.start)))?;
                let spec = if a.planted {
                    SyntheticUniverseSpec {
                        n_periods: a.periods,
                        start,
                        ..SyntheticUniverseSpec::planted(a.portfolios, a.seed)
                    }
                } else {
                    SyntheticUniverseSpec {
                        n_portfolios: a.portfolios,
                        n_constituents: a.constituents,
                        n_factors: a.factors,
                        holdings_per_portfolio: a.holdings_per_portfolio,
                        overlap: a.overlap,
                        noise: a.noise,
                        n_periods: a.periods,
                        start,
                        profile: OverlapProfile::SectorTilted,
                        seed: a.seed,
                    }
                };
                RunConfig {
                    command: CommandConfig::GenerateSynthetic { spec },
                    metrics: Vec::new(),
                    k: 5,
                    folds: 10,
                    seed: a.seed,
                    min_match_sim: 0.0,
                    normalize: false,
                    out,
                    format: OutputFormat::Csv,
                }
            }
        };
        run.validate()?;
        Ok(run)
    }
}

/// Turns parsed arguments into a run configuration, loading `--config` when
/// no subcommand is given.
pub fn resolve(cli: Cli) -> Result<RunConfig> {
    match (cli.command, cli.config) {
        (Some(_), Some(_)) => Err(Error::InvalidConfig("give either a subcommand or --config, not both".into())),
        (None, None) => Err(Error::InvalidConfig("missing subcommand (or --config FILE)".into())),
        (None, Some(path)) => {
            let mut run = RunConfig::load(&path)?;
            if let Some(out) = cli.out {
                run.out = out;
            }
            run.validate()?;
            Ok(run)
        }
        (Some(command), None) => command.into_run_config(cli.out.unwrap_or_else(|| PathBuf::from("out"))),
    }
}

/// Runs `run` on a pool of `threads` workers and writes every output file
/// plus `run-config.json` into `run.out`. Nothing is written on failure.
pub fn run(run: &RunConfig, threads: Option<usize>) -> Result<Vec<PathBuf>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::InvalidConfig("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    let files = pool.install(|| execute(run))?;
    write_outputs(run, &files)
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn report_error(err: &Error, json: bool) -> ExitCode {
    let code: u8 = if err.is_validation() { 2 } else { 1 };
    if json {
        let doc = serde_json::json!({
            "error": err.kind(),
            "message": err.to_string(),
            "exit_code": code,
        });
        eprintln!("{doc}");
    } else {
        eprintln!("error: {err}");
    }
    ExitCode::from(code)
}

/// Process entry point: exit 0 on success, 2 on invalid input or
/// configuration, 1 on internal failures.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    init_logging();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if args.iter().any(|a| a == "--json-errors") {
                let doc = serde_json::json!({
                    "error": "Usage",
                    "message": e.kind().to_string(),
                    "exit_code": 2,
                });
                eprintln!("{doc}");
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    let (json, threads) = (cli.json_errors, cli.threads);
    let outcome = resolve(cli).and_then(|config| {
        let started = std::time::Instant::now();
        let written = run(&config, threads)?;
        log::info!(
            "wrote {} files to {} in {:.1?}",
            written.len(),
            config.out.display(),
            started.elapsed()
        );
        Ok(())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report_error(&e, json),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig> {
        let mut full = vec!["strapsim"];
        full.extend(args);
        resolve(Cli::try_parse_from(full).expect("arguments parse"))
    }

    #[test]
    fn metric_selection() {
        let run = parse(&["similarity", "--holdings", "h.csv", "--metric", "strapsim,jaccard"]).unwrap();
        assert_eq!(run.metrics, vec![Metric::Strapsim, Metric::Jaccard]);
        let run = parse(&["similarity", "--holdings", "h.csv"]).unwrap();
        assert_eq!(run.metrics, Metric::ALL.to_vec());
        assert!(matches!(
            parse(&["similarity", "--metric", "cosine"]),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn movie_default_k_is_twenty() {
        let run = parse(&["experiment", "movies"]).unwrap();
        assert_eq!(run.k, 20);
        assert_eq!(run.experiment_config().k, 20);
        let run = parse(&["experiment", "iris", "--k", "3", "--out", "x"]).unwrap();
        assert_eq!((run.k, run.out.as_path()), (3, Path::new("x")));
    }

    #[test]
    fn unknown_dataset_is_a_validation_error() {
        let err = parse(&["experiment", "mnist"]).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn run_config_round_trips() {
        for args in [
            &["similarity", "--holdings", "h.csv", "--matrix", "m.json", "--min-match-sim", "0.1"][..],
            &["proximity", "--features", "f.csv", "--target", "oas,yield"][..],
            &["experiment", "synthetic-etf", "--synthetic-seeds", "3"][..],
            &["generate-synthetic", "--planted", "--portfolios", "8"][..],
        ] {
            let run = parse(args).unwrap();
            let back = RunConfig::from_json(&run.to_json().unwrap()).unwrap();
            assert_eq!(back, run);
        }
    }
}
