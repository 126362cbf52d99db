use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tracebot::corpus::{load_jsonl, synth_generate, write_jsonl, Corpus, SplitRatios, SynthSpec};
use tracebot::detector::{evaluate, load_checkpoint};
use tracebot::experiments::{
    embeddings_csv, encode_for_bundle, metrics_json, predictions_csv, report_cell, run_ablation, run_cell, run_label_efficiency,
    run_robustness, AblationVariant, DataSource, ExperimentConfig, Workspace,
};
use tracebot::features::{assemble_behavior, behavior_columns, fit_train_thresholds, score_dump_csv};
use tracebot::profile_features::PromptTemplate;
use tracebot::{Error, Result};

#[derive(Parser)]
#[command(name = "tracebot", version, about = "Dual-channel social bot detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a JSONL corpus and print a summary.
    Ingest(DataArgs),
    /// Write a synthetic corpus as JSONL.
    Synth(SynthArgs),
    /// Write raw X_behav features and per-tweet AIGC scores.
    Featurize(ExperimentArgs),
    /// Run the full pipeline and write metrics, history, embeddings and a checkpoint.
    Train(ExperimentArgs),
    /// Evaluate a checkpoint on a labelled corpus.
    Evaluate(CheckpointArgs),
    /// Predict labels with a checkpoint.
    Predict(CheckpointArgs),
    /// Module and modality ablation table.
    Ablate(ExperimentArgs),
    /// Label-efficiency curve.
    StudyLabels(ExperimentArgs),
    /// Split-size and class-ratio robustness sweeps.
    StudyRobust(ExperimentArgs),
    /// Export fused embeddings of a corpus under a checkpoint.
    ExportEmbeddings(CheckpointArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    users: PathBuf,
    #[arg(long)]
    tweets: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    humans: usize,
    #[arg(long, default_value_t = 1000)]
    bots: usize,
    #[arg(long, default_value_t = 1.0)]
    separability: f64,
    #[arg(long, default_value_t = 3)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckpointArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Output directory; results go to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Every flag mirrors an `ExperimentConfig` field and overrides the file.
#[derive(Args, Default)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["synth_humans", "synth_bots", "separability", "synth_seed"])]
    users: Option<PathBuf>,
    #[arg(long, requires = "users")]
    tweets: Option<PathBuf>,
    #[arg(long, requires = "users")]
    labels: Option<PathBuf>,
    #[arg(long)]
    synth_humans: Option<usize>,
    #[arg(long)]
    synth_bots: Option<usize>,
    #[arg(long)]
    separability: Option<f64>,
    #[arg(long)]
    synth_seed: Option<u64>,
    /// Train/validation/test fractions, e.g. `0.6,0.2,0.2`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    split: Option<Vec<f64>>,
    #[arg(long)]
    split_seed: Option<u64>,
    #[arg(long)]
    no_undersample: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr_text: Option<f64>,
    #[arg(long)]
    lr_mlp: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    d_model: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    heads: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    behavior_dim: Option<usize>,
    #[arg(long)]
    quantile: Option<f64>,
    #[arg(long)]
    template: Option<String>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, value_delimiter = ',')]
    ablations: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    train_fractions: Option<Vec<f64>>,
    /// Bot:human ratios, e.g. `1:3,1:1,3:1`.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<String>>,
}

fn parse_ratio(s: &str) -> Result<[usize; 2]> {
    let bad = || Error::Config(format!("ratio {s:?} is not of the form bots:humans"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok([a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?])
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(users) = &self.users {
            let tweets = self.tweets.clone().ok_or_else(|| Error::Config("--users needs --tweets".into()))?;
            c.data = DataSource::Jsonl { users: users.clone(), tweets, labels: self.labels.clone() };
        }
        if self.synth_humans.is_some() || self.synth_bots.is_some() || self.separability.is_some() || self.synth_seed.is_some() {
            let (mut spec, mut seed) = c.data.synth_spec().unwrap_or((SynthSpec::new(1000, 1000, 1.0), 3));
            if let Some(v) = self.synth_humans {
                spec.humans = v;
            }
            if let Some(v) = self.synth_bots {
                spec.bots = v;
            }
            if let Some(v) = self.separability {
                spec.separability = v;
            }
            if let Some(v) = self.synth_seed {
                seed = v;
            }
            c.data = DataSource::synth(spec, seed);
        }
        if let Some(s) = &self.split {
            c.split = SplitRatios::new(s[0], s[1], s[2]);
        }
        if let Some(v) = self.split_seed {
            c.split_seed = v;
        }
        if self.no_undersample {
            c.undersample = false;
        }
        let t = &mut c.train;
        if let Some(v) = self.seed {
            t.seed = v;
        }
        if let Some(v) = self.epochs {
            t.max_epochs = v;
        }
        if let Some(v) = self.batch_size {
            t.batch_size = v;
        }
        if let Some(v) = self.lr_text {
            t.lr_text = v;
        }
        if let Some(v) = self.lr_mlp {
            t.lr_mlp = v;
        }
        if let Some(v) = self.patience {
            t.patience = v;
        }
        if let Some(v) = self.dropout {
            t.dropout = v;
        }
        let m = &mut c.model;
        if let Some(v) = self.d_model {
            m.d_model = v;
        }
        if let Some(v) = self.layers {
            m.n_layers = v;
        }
        if let Some(v) = self.heads {
            m.n_heads = v;
        }
        if let Some(v) = self.max_len {
            m.max_len = v;
        }
        if let Some(v) = self.behavior_dim {
            m.behavior_dim = v;
        }
        if let Some(v) = self.quantile {
            m.quantile = v;
        }
        if let Some(v) = &self.template {
            c.template = PromptTemplate::parse(v)?;
        }
        if let Some(v) = &self.variant {
            c.variant = AblationVariant::parse(v)?;
        }
        if let Some(v) = &self.ablations {
            c.ablations = v.iter().map(|s| AblationVariant::parse(s)).collect::<Result<_>>()?;
        }
        if let Some(v) = &self.fractions {
            c.label_fractions = v.clone();
        }
        if let Some(v) = self.repeats {
            c.label_repeats = v;
        }
        if let Some(v) = &self.train_fractions {
            c.train_fractions = v.clone();
        }
        if let Some(v) = &self.ratios {
            c.ratio_grid = v.iter().map(|s| parse_ratio(s)).collect::<Result<_>>()?;
        }
        if let Some(v) = &self.output {
            c.output_dir = v.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| Error::io(&path, e))
}

fn emit(output: &Option<PathBuf>, name: &str, content: &str) -> Result<()> {
    match output {
        Some(dir) => write_out(dir, name, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load(data: &DataArgs) -> Result<Corpus> {
    load_jsonl(&data.users, &data.tweets, data.labels.as_deref())
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn featurize(config: &ExperimentConfig) -> Result<()> {
    let ws = Workspace::prepare(config)?;
    let split = ws.standard_split()?;
    let train = split.train_handle().map(|ids| ids.iter().map(|id| &ws.raw[id]).collect());
    let thresholds = fit_train_thresholds(&train, config.model.quantile)?;
    let part = |id: &String| {
        if split.train.contains(id) {
            "train"
        } else if split.validation.contains(id) {
            "validation"
        } else if split.test.contains(id) {
            "test"
        } else {
            "unused"
        }
    };
    let mut csv = format!("user_id,label,split,{}\n", behavior_columns().join(","));
    let mut users: Vec<_> = ws.raw.values().collect();
    users.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    for u in &users {
        let x = assemble_behavior(u, &thresholds, &[]);
        let cols: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
        csv.push_str(&format!("{},{},{},{}\n", u.user_id, u.label.as_str(), part(&u.user_id), cols.join(",")));
    }
    let owned: Vec<_> = users.into_iter().cloned().collect();
    write_out(&config.output_dir, "features.csv", &csv)?;
    write_out(&config.output_dir, "tweet_scores.csv", &score_dump_csv(&owned))?;
    write_out(&config.output_dir, "thresholds.json", &pretty(&thresholds)?)
}

fn run(cli: Cli) -> Result<()> {
    tracebot::nn::configure_threads();
    match cli.command {
        Command::Ingest(d) => {
            let c = load(&d)?;
            let labels = c.labels();
            let count = |l: tracebot::corpus::Label| labels.values().filter(|&&x| x == l).count();
            let summary = serde_json::json!({
                "users": c.len(),
                "tweets": c.num_tweets(),
                "humans": count(tracebot::corpus::Label::Human),
                "bots": count(tracebot::corpus::Label::Bot),
                "unknown": count(tracebot::corpus::Label::Unknown),
            });
            print!("{}", pretty(&summary)?);
        }
        Command::Synth(s) => {
            let corpus = synth_generate(&SynthSpec::new(s.humans, s.bots, s.separability), s.seed)?;
            write_jsonl(&corpus, &s.out)?;
            eprintln!("wrote {} users and {} tweets to {}", corpus.len(), corpus.num_tweets(), s.out.display());
        }
        Command::Featurize(a) => featurize(&a.resolve()?)?,
        Command::Train(a) => {
            let config = a.resolve()?;
            let ws = Workspace::prepare(&config)?;
            let cell = run_cell(&ws, &ws.standard_split()?, config.variant)?;
            let report = report_cell(&ws, &cell, true)?;
            print!("{}", pretty(&report)?);
        }
        Command::Evaluate(a) => {
            let bundle = load_checkpoint(&a.checkpoint)?;
            let set = encode_for_bundle(&bundle, &load(&a.data)?, true)?;
            let metrics = evaluate(&bundle.model, &set)?;
            let hash = bundle.config["config_hash"].as_str().unwrap_or_default().to_string();
            emit(&a.output, "metrics.json", &pretty(&metrics_json(&metrics, &hash))?)?;
        }
        Command::Predict(a) => {
            let bundle = load_checkpoint(&a.checkpoint)?;
            let set = encode_for_bundle(&bundle, &load(&a.data)?, false)?;
            emit(&a.output, "predictions.csv", &predictions_csv(&bundle, &set)?)?;
        }
        Command::Ablate(a) => {
            let table = run_ablation(&a.resolve()?)?;
            print!("{}", table.to_csv());
        }
        Command::StudyLabels(a) => {
            let curve = run_label_efficiency(&a.resolve()?)?;
            print!("{}", curve.to_csv());
        }
        Command::StudyRobust(a) => {
            let report = run_robustness(&a.resolve()?)?;
            print!("{}", report.to_csv());
        }
        Command::ExportEmbeddings(a) => {
            let bundle = load_checkpoint(&a.checkpoint)?;
            let labelled = a.data.labels.is_some();
            let set = encode_for_bundle(&bundle, &load(&a.data)?, labelled)?;
            emit(&a.output, "embeddings.csv", &embeddings_csv(&bundle.model, &set)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
