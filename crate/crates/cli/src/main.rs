//! Command-line interface: build axes, score corpora, train and evaluate
//! moral-foundation classifiers, run the partisanship experiment, and emit
//! correlation reports.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use clap::{Args, Parser, Subcommand};
use moralframe::axes::build_axis_set;
use moralframe::embedding::{load_embeddings_with, LoadOptions};
use moralframe::lexicon::{parse_lexicon, MoralLexicon};
use moralframe::pipeline::{
    read_documents, run_correlation_report, run_mf_experiment, run_partisanship_experiment,
    save_artifacts, score_corpus_to_csv, train_mf_models, write_manifest, Artifacts,
    ExperimentConfig, FeatureMode, PipelineError,
};
use serde_json::json;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "moralframe",
    version,
    about = "Moral framing scores and partisanship classification for text corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build semantic axes from an embedding file and a lexicon
    BuildAxes(CommonArgs),
    /// Score a document corpus: per-dimension bias and intensity CSV
    Score(CommonArgs),
    /// Train per-dimension moral-foundation models on an annotated corpus
    TrainMf(CommonArgs),
    /// Repeated-split evaluation of moral-foundation classifiers
    EvalMf(CommonArgs),
    /// Classify headline partisanship per topic and feature mode
    Partisan(CommonArgs),
    /// Correlation matrices over votes and predicted likelihoods
    Correlate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Word-vector text file
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Lexicon JSON (bundled six-dimension default when omitted)
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Document/headline corpus CSV
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Annotated corpus CSV/TSV with per-dimension vote counts
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// External per-document feature CSV for the active corpus
    #[arg(long)]
    features: Option<PathBuf>,
    /// External feature CSV for the annotation corpus (when it differs)
    #[arg(long)]
    annotation_features: Option<PathBuf>,
    /// Source-to-leaning JSON map (bundled default when omitted)
    #[arg(long)]
    leanings: Option<PathBuf>,
    /// Topic keyword JSON (bundled immigration/election lists when omitted)
    #[arg(long)]
    topics: Option<PathBuf>,
    /// Directory of previously trained models (from train-mf)
    #[arg(long)]
    models: Option<PathBuf>,
    /// frame_axis, external, or combined
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, default_value_t = 0.75)]
    train_fraction: f64,
    #[arg(long, default_value_t = 10)]
    splits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    min_votes: u64,
    /// Require this embedding dimension at load time
    #[arg(long)]
    expected_dimension: Option<usize>,
    /// Unit-normalize embedding vectors at load time
    #[arg(long, default_value_t = false)]
    normalize_embeddings: bool,
    /// Output directory for reports and artifacts
    #[arg(long, default_value = "moralframe-out")]
    out: PathBuf,
    /// JSON config file; its fields override the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<PipelineError> for CliError {
    fn from(err: PipelineError) -> Self {
        match err {
            PipelineError::MissingInput(_) | PipelineError::ModeUnavailable { .. } => {
                CliError::Usage(err.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

macro_rules! impl_data_error {
    ($($ty:ty),* $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(err: $ty) -> Self {
                CliError::Data(err.to_string())
            }
        }
    )*};
}
impl_data_error!(
    moralframe::embedding::EmbeddingError,
    moralframe::lexicon::LexiconError,
    moralframe::axes::AxisError,
    moralframe::scorer::ScoreError,
    moralframe::classifier::TrainError,
    moralframe::eval::EvalError,
    serde_json::Error,
    std::io::Error,
);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Data(message)) => {
            eprintln!("data error: {message}");
            ExitCode::from(2)
        }
    }
}

fn resolve_config(args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mode = match &args.mode {
        Some(raw) => Some(raw.parse::<FeatureMode>().map_err(CliError::Usage)?),
        None => None,
    };
    if !(args.train_fraction > 0.0 && args.train_fraction < 1.0) {
        return Err(CliError::Usage(format!(
            "--train-fraction must lie strictly between 0 and 1, got {}",
            args.train_fraction
        )));
    }
    if args.splits == 0 {
        return Err(CliError::Usage("--splits must be at least 1".to_string()));
    }
    let base = ExperimentConfig {
        embeddings: args.embeddings.clone(),
        expected_dimension: args.expected_dimension,
        normalize_embeddings: args.normalize_embeddings,
        lexicon: args.lexicon.clone(),
        corpus: args.corpus.clone(),
        annotations: args.annotations.clone(),
        features: args.features.clone(),
        annotation_features: args.annotation_features.clone(),
        leanings: args.leanings.clone(),
        topics: args.topics.clone(),
        models_dir: args.models.clone(),
        mode,
        train_fraction: args.train_fraction,
        splits: args.splits,
        seed: args.seed,
        min_votes: args.min_votes,
        aggregate: None,
        classifier: Default::default(),
        out: Some(args.out.clone()),
    };
    match &args.config {
        None => Ok(base),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read --config {path:?}: {e}")))?;
            let overlay: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("--config is not valid JSON: {e}")))?;
            let object = overlay
                .as_object()
                .ok_or_else(|| CliError::Usage("--config must hold a JSON object".to_string()))?;
            let mut merged = serde_json::to_value(&base)?;
            for (key, value) in object {
                merged[key.as_str()] = value.clone();
            }
            let config: ExperimentConfig = serde_json::from_value(merged)
                .map_err(|e| CliError::Usage(format!("invalid --config contents: {e}")))?;
            Ok(config)
        }
    }
}

fn out_dir(config: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let dir = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("moralframe-out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn manifest_value(
    command: &str,
    config: &ExperimentConfig,
    extra: serde_json::Value,
) -> serde_json::Value {
    json!({
        "schema_version": moralframe::SCHEMA_VERSION,
        "tool": {"name": "moralframe", "version": env!("CARGO_PKG_VERSION")},
        "command": command,
        "config": config,
        "run": extra,
    })
}

fn load_lexicon(config: &ExperimentConfig) -> Result<MoralLexicon, CliError> {
    Ok(match &config.lexicon {
        Some(path) => parse_lexicon(path)?,
        None => MoralLexicon::builtin(),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::BuildAxes(args) => build_axes(&resolve_config(&args)?),
        Command::Score(args) => score(&resolve_config(&args)?),
        Command::TrainMf(args) => train_mf(&resolve_config(&args)?),
        Command::EvalMf(args) => eval_mf(&resolve_config(&args)?),
        Command::Partisan(args) => partisan(&resolve_config(&args)?),
        Command::Correlate(args) => correlate(&resolve_config(&args)?),
    }
}

fn build_axes(config: &ExperimentConfig) -> Result<(), CliError> {
    let embeddings_path = config.embeddings.as_ref().ok_or_else(|| {
        CliError::Usage("build-axes needs an embeddings file (--embeddings)".to_string())
    })?;
    let dir = out_dir(config)?;
    let (store, load_report) = load_embeddings_with(
        embeddings_path,
        LoadOptions {
            expected_dimension: config.expected_dimension,
            normalize: config.normalize_embeddings,
        },
    )?;
    let lexicon = load_lexicon(config)?;
    let coverage = lexicon.coverage(&store);
    let mut axes = build_axis_set(&store, &lexicon)?;

    // with a corpus at hand, compute and persist its baselines
    let mut baseline_documents = 0usize;
    if let Some(corpus_path) = &config.corpus {
        let (_, texts) = read_documents(corpus_path)?;
        let bags = moralframe::scorer::tokenize_corpus(&texts);
        moralframe::scorer::compute_baselines(&bags, &mut axes, &store)?;
        baseline_documents = bags.len();
    }

    axes.save(dir.join("axes.json"))?;
    fs::write(
        dir.join("coverage.json"),
        serde_json::to_string_pretty(&coverage)?,
    )?;
    fs::write(
        dir.join("load_report.json"),
        serde_json::to_string_pretty(&load_report)?,
    )?;
    write_manifest(
        dir.join("manifest.json"),
        &manifest_value(
            "build-axes",
            config,
            json!({
                "axes": axes.axis_names(),
                "embedding_entries": store.len(),
                "baseline_documents": baseline_documents,
            }),
        ),
    )?;
    println!(
        "built {} axes over {} vectors -> {}",
        axes.axes.len(),
        store.len(),
        dir.display()
    );
    Ok(())
}

fn score(config: &ExperimentConfig) -> Result<(), CliError> {
    let corpus_path = config
        .corpus
        .as_ref()
        .ok_or_else(|| CliError::Usage("score needs a corpus (--corpus)".to_string()))?;
    if config.embeddings.is_none() {
        return Err(CliError::Usage(
            "score needs an embeddings file (--embeddings)".to_string(),
        ));
    }
    let dir = out_dir(config)?;
    let (ids, texts) = read_documents(corpus_path)?;
    let scores_path = dir.join("scores.csv");
    let file = fs::File::create(&scores_path)?;
    let axes = score_corpus_to_csv(config, &ids, &texts, file)?;
    axes.save(dir.join("axes.json"))?;
    write_manifest(
        dir.join("manifest.json"),
        &manifest_value(
            "score",
            config,
            json!({
                "documents": ids.len(),
                "axes": axes.axis_names(),
            }),
        ),
    )?;
    println!(
        "scored {} documents on {} axes -> {}",
        ids.len(),
        axes.axes.len(),
        scores_path.display()
    );
    Ok(())
}

fn train_mf(config: &ExperimentConfig) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let (models, axes) = train_mf_models(config)?;
    let dimensions: Vec<String> = models.keys().cloned().collect();
    let artifacts = Artifacts { axes, models };
    save_artifacts(&dir, &artifacts)?;
    write_manifest(
        dir.join("manifest.json"),
        &manifest_value(
            "train-mf",
            config,
            json!({
                "dimensions": dimensions,
                "mode": config.mode().to_string(),
            }),
        ),
    )?;
    println!(
        "trained {} models ({}) -> {}",
        dimensions.len(),
        config.mode(),
        dir.display()
    );
    Ok(())
}

fn eval_mf(config: &ExperimentConfig) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let report = run_mf_experiment(config)?;
    let csv_path = dir.join("mf_metrics.csv");
    report.write_csv(fs::File::create(&csv_path)?)?;
    fs::write(
        dir.join("mf_metrics.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    write_manifest(
        dir.join("manifest.json"),
        &manifest_value(
            "eval-mf",
            config,
            json!({
                "mode": report.mode.to_string(),
                "documents_used": report.documents_used,
                "documents_dropped_without_features": report.documents_dropped_without_features,
                "oov_only_documents": report.oov_only_documents,
                "dimensions": report.rows.iter().map(|r| r.dimension.clone()).collect::<Vec<_>>(),
            }),
        ),
    )?;
    for row in &report.rows {
        println!(
            "{}: f1 {:.3} acc {:.3} (baseline f1 {:.3} acc {:.3})",
            row.dimension, row.f1, row.accuracy, row.baseline_f1, row.baseline_accuracy
        );
    }
    println!("report -> {}", csv_path.display());
    Ok(())
}

fn partisan(config: &ExperimentConfig) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let report = run_partisanship_experiment(config)?;
    let metrics_path = dir.join("partisan_metrics.csv");
    report.write_metrics_csv(fs::File::create(&metrics_path)?)?;
    if !report.coefficients.is_empty() {
        let coefficients_path = dir.join("partisan_coefficients.csv");
        report.write_coefficients_csv(fs::File::create(&coefficients_path)?)?;
    }
    fs::write(
        dir.join("partisan_report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    write_manifest(
        dir.join("manifest.json"),
        &manifest_value(
            "partisan",
            config,
            json!({
                "rows": report.rows.len(),
                "coefficient_reports": report.coefficients.len(),
                "coefficient_feature_space": "standardized",
                "unavailable_modes": report.unavailable,
            }),
        ),
    )?;
    for row in &report.rows {
        println!(
            "{} [{}] n={}: f1 {:.3} acc {:.3} (baseline f1 {:.3} acc {:.3})",
            row.topic,
            row.mode,
            row.documents,
            row.f1,
            row.accuracy,
            row.baseline_f1,
            row.baseline_accuracy
        );
    }
    for (mode, reason) in &report.unavailable {
        eprintln!("mode {mode} not run: {reason}");
    }
    println!("reports -> {}", dir.display());
    Ok(())
}

fn correlate(config: &ExperimentConfig) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let bundle = run_correlation_report(config)?;

    let write_matrix =
        |matrix: &moralframe::eval::CorrelationMatrix, stem: &str| -> Result<(), CliError> {
            let csv_path = dir.join(format!("{stem}.csv"));
            matrix.write_csv(fs::File::create(&csv_path)?)?;
            fs::write(
                dir.join(format!("{stem}.json")),
                serde_json::to_string_pretty(matrix)?,
            )?;
            println!("{stem} -> {}", csv_path.display());
            Ok(())
        };
    write_matrix(&bundle.votes, "votes_correlation")?;
    if let Some(matrix) = &bundle.corpus_likelihoods {
        write_matrix(matrix, "corpus_likelihood_correlation")?;
    }
    if let Some(matrix) = &bundle.headline_likelihoods {
        write_matrix(matrix, "headline_likelihood_correlation")?;
    }
    for (what, reason) in &bundle.skipped {
        eprintln!("{what} skipped: {reason}");
    }
    write_manifest(
        dir.join("manifest.json"),
        &manifest_value(
            "correlate",
            config,
            json!({
                "votes_dimensions": bundle.votes.labels,
                "corpus_likelihoods": bundle.corpus_likelihoods.is_some(),
                "headline_likelihoods": bundle.headline_likelihoods.is_some(),
                "skipped": bundle.skipped,
            }),
        ),
    )?;
    Ok(())
}
