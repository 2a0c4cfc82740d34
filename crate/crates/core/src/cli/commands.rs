use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use super::{CommandConfig, OutputFormat, RunConfig, SetInputs, RUN_CONFIG_FILE};
use crate::constituent::features::row_cosine_matrix;
use crate::constituent::forest::{forest_proximity, tune_and_train, ForestModel, TuningConfig};
use crate::error::{Error, Result};
use crate::experiments::{labels_of, ranking_files, run_movies, run_ranking, run_synthetic, run_tabular, OutputFile};
use crate::ingest::datasets::{load_dataset, load_feature_csv, Dataset, BIG_MAC_TARGET};
use crate::ingest::holdings::load_holdings;
use crate::ingest::matrix::{load_matrix, write_matrix_csv, write_matrix_json};
use crate::ingest::returns::load_returns;
use crate::ingest::synthetic::generate_synthetic_universe;
use crate::matrix::SimilarityMatrix;
use crate::metrics::{pairwise_matrix, Metric};
use crate::set::WeightedSet;

/// Reads a whole input file, reporting a missing file as an input error.
pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: format!("cannot read: {e}"),
    })
}

fn text_file(name: impl Into<String>, contents: Vec<u8>) -> OutputFile {
    OutputFile {
        name: name.into(),
        contents: String::from_utf8(contents).expect("writers emit UTF-8"),
    }
}

/// Constituent similarity from `--matrix`, or from `--constituent-features`
/// (row cosine, or forest proximity with `--proximity-model`).
fn constituent_similarity(inputs: &SetInputs) -> Result<Option<SimilarityMatrix>> {
    match (&inputs.matrix, &inputs.constituent_features) {
        (Some(_), Some(_)) => Err(Error::InvalidConfig(
            "give either --matrix or --constituent-features, not both".into(),
        )),
        (Some(m), None) => load_matrix(m).map(Some),
        (None, Some(f)) => {
            let table = load_feature_csv(f, Some(&inputs.id_column), &[], None)?;
            match &inputs.proximity_model {
                Some(p) => {
                    let model = ForestModel::from_json(&read_text(p)?)?;
                    let table = table.select_features(&model.feature_names)?;
                    forest_proximity(&model, &table).map(Some)
                }
                None => row_cosine_matrix(&table).map(Some),
            }
        }
        (None, None) => {
            if inputs.proximity_model.is_some() {
                return Err(Error::InvalidConfig("--proximity-model needs --constituent-features".into()));
            }
            Ok(None)
        }
    }
}

fn require_similarity(metrics: &[Metric], s: Option<&SimilarityMatrix>) -> Result<()> {
    if let (Some(m), None) = (metrics.iter().find(|m| m.needs_similarity()), s) {
        return Err(Error::InvalidConfig(format!(
            "metric `{m}` needs --matrix or --constituent-features"
        )));
    }
    Ok(())
}

fn load_sets(inputs: &SetInputs, normalize: bool) -> Result<Vec<WeightedSet>> {
    let path = inputs
        .holdings
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--holdings is required".into()))?;
    load_holdings(path, normalize)
}

fn square_table(name: &str, labels: &[String], values: &[Vec<f64>], format: OutputFormat) -> Result<OutputFile> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut buf);
            let mut header = vec!["id".to_string()];
            header.extend(labels.iter().cloned());
            w.write_record(&header)?;
            for (label, row) in labels.iter().zip(values) {
                let mut record = vec![label.clone()];
                record.extend(row.iter().map(f64::to_string));
                w.write_record(&record)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut buf, &serde_json::json!({ "ids": labels, "values": values }))?;
            buf.push(b'\n');
        }
    }
    Ok(text_file(format!("{name}.{}", extension(format)), buf))
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

/// Score and residual matrices per metric plus a long-format `pairs.csv`
/// (`a,b,metric,score,residual`) covering every ordered pair.
pub fn cmd_similarity(run: &RunConfig, inputs: &SetInputs) -> Result<Vec<OutputFile>> {
    let sets = load_sets(inputs, run.normalize)?;
    let s = constituent_similarity(inputs)?;
    require_similarity(&run.metrics, s.as_ref())?;
    let labels: Vec<String> = sets.iter().map(|s| s.label().to_string()).collect();
    let options = crate::metrics::MetricOptions {
        min_match_sim: run.min_match_sim,
    };

    let mut files = Vec::new();
    let mut pairs = csv::Writer::from_writer(Vec::new());
    pairs.write_record(["a", "b", "metric", "score", "residual"])?;
    for &metric in &run.metrics {
        let results = pairwise_matrix(&sets, s.as_ref(), metric, &options)?;
        let scores: Vec<Vec<f64>> = results.iter().map(|r| r.iter().map(|x| x.score).collect()).collect();
        let residuals: Vec<Vec<f64>> = results.iter().map(|r| r.iter().map(|x| x.residual).collect()).collect();
        files.push(square_table(&format!("matrix-{metric}"), &labels, &scores, run.format)?);
        files.push(square_table(&format!("residuals-{metric}"), &labels, &residuals, run.format)?);
        for (a, row) in results.iter().enumerate() {
            for (b, r) in row.iter().enumerate() {
                pairs.write_record([
                    labels[a].as_str(),
                    labels[b].as_str(),
                    metric.name(),
                    &r.score.to_string(),
                    &r.residual.to_string(),
                ])?;
            }
        }
    }
    let pairs = pairs.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    files.push(text_file("pairs.csv", pairs));
    convert_tables(files, run.format)
}

/// Tunes and trains a forest, then writes `model.json`, `fit-report.csv` and
/// the proximity matrix over every row of the feature file.
pub fn cmd_proximity(run: &RunConfig) -> Result<Vec<OutputFile>> {
    let CommandConfig::Proximity {
        features,
        id_column,
        targets,
        trees,
        depths,
        test_fraction,
        min_leaf,
    } = &run.command
    else {
        return Err(Error::InvalidConfig("not a proximity run".into()));
    };
    let target_refs: Vec<&str> = targets.iter().map(String::as_str).collect();
    let table = load_feature_csv(features, Some(id_column), &target_refs, None)?;
    let tuning = TuningConfig {
        trees_grid: trees.clone(),
        depth_grid: depths.clone(),
        cv_folds: run.folds,
        test_fraction: *test_fraction,
        min_leaf: *min_leaf,
        seed: run.seed,
    };
    // Target names are stored normalized by the loader.
    let stored: Vec<String> = table.target_names().map(str::to_string).collect();
    let stored_refs: Vec<&str> = stored.iter().map(String::as_str).collect();
    let (model, reports) = tune_and_train(&table, &stored_refs, &tuning)?;
    let proximity = forest_proximity(&model, &table)?;

    let mut model_json = model.to_json()?;
    model_json.push('\n');
    let mut report = csv::Writer::from_writer(Vec::new());
    report.write_record([
        "target",
        "trees",
        "max_depth",
        "cv_rmse",
        "train_rmse",
        "test_rmse",
        "train_mape",
        "test_mape",
    ])?;
    let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
    for r in &reports {
        report.write_record([
            r.target.clone(),
            r.trees.to_string(),
            r.max_depth.to_string(),
            r.cv_rmse.to_string(),
            r.train_rmse.to_string(),
            r.test_rmse.to_string(),
            opt(r.train_mape),
            opt(r.test_mape),
        ])?;
    }
    let report = report.into_inner().map_err(|e| Error::Io(e.into_error()))?;

    let mut matrix = Vec::new();
    match run.format {
        OutputFormat::Csv => write_matrix_csv(&proximity, &mut matrix)?,
        OutputFormat::Json => {
            write_matrix_json(&proximity, &mut matrix)?;
            matrix.push(b'\n');
        }
    }
    let files = vec![
        OutputFile {
            name: "model.json".into(),
            contents: model_json,
        },
        text_file("fit-report.csv", report),
        text_file(format!("proximity.{}", extension(run.format)), matrix),
    ];
    convert_tables(files, run.format)
}

/// Runs one benchmark pipeline; see [`crate::experiments`] for the outputs.
pub fn cmd_experiment(run: &RunConfig) -> Result<Vec<OutputFile>> {
    let CommandConfig::Experiment {
        dataset,
        data,
        returns,
        inputs,
        ..
    } = &run.command
    else {
        return Err(Error::InvalidConfig("not an experiment run".into()));
    };
    let config = run.experiment_config();
    let data_path = || {
        data.as_deref()
            .ok_or_else(|| Error::InvalidConfig(format!("dataset `{dataset}` needs --data")))
    };
    let files = match dataset.as_str() {
        "iris" | "breast-cancer" | "big-mac" | "movies" => match load_dataset(dataset, data_path()?)? {
            Dataset::Table(table) => {
                let target = (dataset == "big-mac").then_some(BIG_MAC_TARGET);
                run_tabular(dataset, &table, target, &config)?.files()?
            }
            Dataset::Movies(movies) => run_movies(&movies, &config)?.files()?,
        },
        "etf-ranking" => {
            let sets = load_sets(inputs, run.normalize)?;
            let s = constituent_similarity(inputs)?;
            require_similarity(&run.metrics, s.as_ref())?;
            let path = returns
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("etf-ranking needs --returns".into()))?;
            let series = load_returns(path)?;
            let rows = run_ranking(&sets, s.as_ref(), &series, &config)?;
            let entities: Vec<String> = labels_of(&sets)?.iter().map(|c| c.to_string()).collect();
            ranking_files("ranking-etf-ranking", &rows, &entities)?
        }
        "synthetic-etf" => run_synthetic(&config)?.files()?,
        other => return Err(Error::InvalidConfig(format!("unknown dataset `{other}`"))),
    };
    convert_tables(files, run.format)
}

/// Holdings, returns, factor returns, loadings and the generator spec.
pub fn cmd_generate_synthetic(run: &RunConfig) -> Result<Vec<OutputFile>> {
    let CommandConfig::GenerateSynthetic { spec } = &run.command else {
        return Err(Error::InvalidConfig("not a generate-synthetic run".into()));
    };
    let universe = generate_synthetic_universe(spec)?;
    Ok(universe
        .files()?
        .into_iter()
        .map(|(name, contents)| text_file(name, contents))
        .collect())
}

/// Output files of `run`, in memory.
pub fn execute(run: &RunConfig) -> Result<Vec<OutputFile>> {
    match &run.command {
        CommandConfig::Similarity { inputs } => cmd_similarity(run, inputs),
        CommandConfig::Proximity { .. } => cmd_proximity(run),
        CommandConfig::Experiment { .. } => cmd_experiment(run),
        CommandConfig::GenerateSynthetic { .. } => cmd_generate_synthetic(run),
    }
}

/// With JSON output, every CSV table becomes an array of records; cells
/// that parse as finite numbers are emitted as numbers.
fn convert_tables(files: Vec<OutputFile>, format: OutputFormat) -> Result<Vec<OutputFile>> {
    if format == OutputFormat::Csv {
        return Ok(files);
    }
    files
        .into_iter()
        .map(|f| match f.name.strip_suffix(".csv") {
            Some(stem) => Ok(OutputFile {
                name: format!("{stem}.json"),
                contents: csv_to_json(&f.contents)?,
            }),
            None => Ok(f),
        })
        .collect()
}

fn csv_to_json(text: &str) -> Result<String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let mut records = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mut obj = Map::new();
        for (h, cell) in headers.iter().zip(record.iter()) {
            let value = cell
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or_else(|| Value::String(cell.to_string()), Value::Number);
            obj.insert(h.to_string(), value);
        }
        records.push(Value::Object(obj));
    }
    let mut out = serde_json::to_string_pretty(&records)?;
    out.push('\n');
    Ok(out)
}

/// Writes `files` and `run-config.json` into `run.out`.
pub fn write_outputs(run: &RunConfig, files: &[OutputFile]) -> Result<Vec<PathBuf>> {
    let config = run.to_json()?;
    std::fs::create_dir_all(&run.out)?;
    let mut written = Vec::with_capacity(files.len() + 1);
    for (name, contents) in files
        .iter()
        .map(|f| (f.name.as_str(), f.contents.as_str()))
        .chain([(RUN_CONFIG_FILE, config.as_str())])
    {
        let path = run.out.join(name);
        std::fs::write(&path, contents)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_tables_become_json_records() {
        let json = csv_to_json("metric,score\nstrapsim,0.5\njaccard,x\n").unwrap();
        let v: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v[0]["score"], serde_json::json!(0.5));
        assert_eq!(v[1]["score"], serde_json::json!("x"));
    }
}
