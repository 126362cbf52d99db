use super::config::{AblationVariant, DataSource, ExperimentConfig};
use crate::aigc_signals::{shared_scorer, BundledScorer, Thresholds};
use crate::behavior_channel::{fit_scaler, BehaviorEncoder, Scaler};
use crate::corpus::{load_jsonl, split_dataset, synth_generate_with, undersample_majority, Corpus, DatasetSplit, Label, Train};
use crate::detector::{
    class_weights, clustering_metrics, evaluate, predict_probs, predict_class, train, BehaviorBranch, ClusterQuality, DetectionHead,
    DetectorBundle, DetectorModel, EncodedSet, Metrics, TextBranch, TrainHistory,
};
use crate::error::{Error, Result, StageExt};
use crate::features::{assemble_behavior, fit_train_thresholds, raw_features, FeatureGroup, UserRaw, BEHAVIOR_FEATURE_DIM};
use crate::nn::Tensor;
use crate::profile_features::{assemble_profile_text, PromptTemplate};
use crate::text_channel::{TextEncoder, Tokenizer, TokenWindow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::HashMap;
use std::path::Path;

/// A loaded and featurized corpus shared by every cell of a study.
pub struct Workspace {
    pub config: ExperimentConfig,
    pub corpus: Corpus,
    pub raw: HashMap<String, UserRaw>,
    pub labels: HashMap<String, Label>,
    /// Split before any undersampling.
    pub base_split: DatasetSplit,
    pub tokenizer: Tokenizer,
}

pub fn load_corpus(source: &DataSource, scorer: &BundledScorer) -> Result<Corpus> {
    match source {
        DataSource::Jsonl { users, tweets, labels } => load_jsonl(users, tweets, labels.as_deref()),
        DataSource::Synth { .. } => {
            let (spec, seed) = source.synth_spec().expect("synth source");
            synth_generate_with(&spec, seed, scorer)
        }
    }
}

/// Featurizes every labelled user of a corpus.
pub fn featurize_corpus(corpus: &Corpus, scorer: &BundledScorer) -> Result<HashMap<String, UserRaw>> {
    let reference = corpus.reference_time().ok_or_else(|| Error::Data("corpus has no timestamps".into()))?;
    let positions: Vec<usize> = (0..corpus.len()).filter(|&i| corpus.users[i].label != Label::Unknown).collect();
    Ok(raw_features(corpus, &positions, scorer, reference)?.into_iter().map(|u| (u.user_id.clone(), u)).collect())
}

impl Workspace {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let scorer = shared_scorer();
        let corpus = load_corpus(&config.data, scorer).stage("ingest")?;
        let labelled = corpus.labeled_ids();
        let base_split = split_dataset(&labelled, config.split, config.split_seed).stage("split")?;
        let raw = featurize_corpus(&corpus, scorer).stage("featurize")?;
        let labels = corpus.labels();
        Ok(Self { config: config.clone(), corpus, raw, labels, base_split, tokenizer: scorer.tokenizer.clone() })
    }

    /// Train/validation undersampled when configured; test untouched.
    pub fn balance(&self, split: &DatasetSplit) -> Result<DatasetSplit> {
        if !self.config.undersample {
            return Ok(split.clone());
        }
        let seed = self.config.split_seed;
        let train = undersample_majority(&split.train, &self.labels, seed)?;
        let validation = undersample_majority(&split.validation, &self.labels, seed)?;
        Ok(split.with_train_validation(train, validation))
    }

    pub fn standard_split(&self) -> Result<DatasetSplit> {
        self.balance(&self.base_split).stage("split")
    }

    pub fn class_counts(&self, ids: &[String]) -> [usize; 2] {
        let mut c = [0usize; 2];
        for id in ids {
            if let Some(k) = self.labels.get(id).and_then(|l| l.class()) {
                c[k] += 1;
            }
        }
        c
    }

    fn profile_text(&self, id: &str, template: PromptTemplate) -> String {
        let i = self.corpus.position(id).expect("featurized users come from the corpus");
        assemble_profile_text(&self.corpus.users[i], template)
    }
}

/// Train-fitted transforms turning raw user features into model inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureContext {
    pub thresholds: Thresholds,
    pub scaler: Scaler,
    pub template: PromptTemplate,
    pub max_len: usize,
    pub variant: AblationVariant,
}

impl FeatureContext {
    pub fn dropped(&self) -> Vec<FeatureGroup> {
        self.variant.dropped_groups()
    }

    pub fn window(&self, tokenizer: &Tokenizer, text: &str) -> TokenWindow {
        let text = if self.variant.blank_text() { "" } else { text };
        tokenizer.tokenize(text, self.max_len)
    }

    pub fn behavior(&self, user: &UserRaw) -> Result<Vec<f32>> {
        let x = assemble_behavior(user, &self.thresholds, &self.dropped());
        Ok(self.scaler.transform(&x)?.into_iter().map(|v| v as f32).collect())
    }

    pub fn encode(&self, tokenizer: &Tokenizer, users: &[(&UserRaw, String)]) -> Result<EncodedSet<f32>> {
        let mut set = EncodedSet::default();
        for (u, text) in users {
            set.user_ids.push(u.user_id.clone());
            set.windows.push(self.window(tokenizer, text));
            set.x.push(self.behavior(u)?);
            set.labels.push(u.label.class().ok_or_else(|| Error::Data(format!("user {} is unlabelled", u.user_id)))?);
        }
        Ok(set)
    }
}

/// Outcome of one trained configuration.
pub struct CellResult {
    pub variant: AblationVariant,
    pub metrics: Metrics,
    pub history: TrainHistory,
    pub bundle: DetectorBundle,
    pub context: FeatureContext,
    pub test: EncodedSet<f32>,
    pub test_counts: [usize; 2],
    pub train_counts: [usize; 2],
}

impl CellResult {
    pub fn embeddings_csv(&self) -> Result<String> {
        embeddings_csv(&self.bundle.model, &self.test)
    }

    pub fn clustering(&self) -> Result<ClusterQuality> {
        let z = embeddings(&self.bundle.model, &self.test)?;
        clustering_metrics(&z, &self.test.labels)
    }
}

pub fn embeddings(model: &DetectorModel<f32>, set: &EncodedSet<f32>) -> Result<Vec<Vec<f64>>> {
    (0..set.len())
        .map(|i| Ok(model.embed(&set.windows[i], &set.x[i])?.into_iter().map(f64::from).collect()))
        .collect()
}

/// `user_id,label,z_0..z_{d-1}` for external visualization.
pub fn embeddings_csv(model: &DetectorModel<f32>, set: &EncodedSet<f32>) -> Result<String> {
    let z = embeddings(model, set)?;
    let d = model.d_h() + model.d_m();
    let mut out = String::from("user_id,label");
    (0..d).for_each(|j| out.push_str(&format!(",z{j}")));
    out.push('\n');
    for (i, row) in z.iter().enumerate() {
        out.push_str(&format!("{},{}", set.user_ids[i], Label::from_class(set.labels[i]).as_str()));
        row.iter().for_each(|v| out.push_str(&format!(",{v:.6}")));
        out.push('\n');
    }
    Ok(out)
}

/// Fresh, seeded model for a variant.
pub fn build_model(config: &ExperimentConfig, variant: AblationVariant, vocab_size: usize) -> DetectorModel<f32> {
    let seed = config.train.seed;
    let m = &config.model;
    let text = if variant.raw_text() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e47);
        TextBranch::RawEmbedding(Tensor::randn(&[vocab_size, m.d_model], 1.0, &mut rng))
    } else {
        TextBranch::Encoder(TextEncoder::new(m.text_config(vocab_size), seed))
    };
    let behavior = if variant.raw_behavior() {
        BehaviorBranch::Raw(BEHAVIOR_FEATURE_DIM)
    } else {
        BehaviorBranch::Encoder(BehaviorEncoder::new(BEHAVIOR_FEATURE_DIM, m.behavior_dim, config.train.dropout, seed.wrapping_add(1)))
    };
    let d = text.dim() + behavior.dim();
    DetectorModel { text, behavior, head: DetectionHead::new(d, config.train.dropout, seed.wrapping_add(2)) }
}

/// Fits train-only transforms, trains, and evaluates on the test partition.
pub fn run_cell(ws: &Workspace, split: &DatasetSplit, variant: AblationVariant) -> Result<CellResult> {
    let config = &ws.config;
    let users = |ids: &[String]| -> Vec<(&UserRaw, String)> {
        ids.iter().map(|id| (&ws.raw[id], ws.profile_text(id, config.template))).collect()
    };
    let train_users: Train<Vec<&UserRaw>> = split.train_handle().map(|ids| ids.iter().map(|id| &ws.raw[id]).collect());
    let thresholds = fit_train_thresholds(&train_users, config.model.quantile).stage("fit")?;
    let dropped = variant.dropped_groups();
    let train_rows = train_users.map(|us| us.into_iter().map(|u| assemble_behavior(u, &thresholds, &dropped)).collect());
    let scaler = fit_scaler(&train_rows).stage("fit")?;
    let weights = class_weights(&split.train_handle().map(|ids| ids.iter().filter_map(|id| ws.labels[id].class()).collect()))
        .stage("fit")?;
    let context = FeatureContext { thresholds, scaler, template: config.template, max_len: config.model.max_len, variant };

    let train_set = context.encode(&ws.tokenizer, &users(&split.train)).stage("encode")?;
    let val_set = context.encode(&ws.tokenizer, &users(&split.validation)).stage("encode")?;
    let test_set = context.encode(&ws.tokenizer, &users(&split.test)).stage("encode")?;

    let model = build_model(config, variant, ws.tokenizer.vocab_size());
    let (model, history) = train(model, &train_set, &val_set, weights, &config.train).stage("train")?;
    let metrics = evaluate(&model, &test_set).stage("evaluate")?;
    let mut test_counts = [0usize; 2];
    test_set.labels.iter().for_each(|&y| test_counts[y] += 1);
    let bundle = DetectorBundle {
        model,
        scaler: context.scaler.clone(),
        thresholds: context.thresholds.clone(),
        tokenizer: ws.tokenizer.clone(),
        config: json!({ "experiment": config, "config_hash": config.hash(), "features": context }),
    };
    Ok(CellResult {
        variant,
        metrics,
        history,
        bundle,
        context,
        test: test_set,
        test_counts,
        train_counts: ws.class_counts(&split.train),
    })
}

/// Report of a full pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config_hash: String,
    pub variant: AblationVariant,
    pub metrics: Metrics,
    pub clustering: Option<ClusterQuality>,
    /// Test labels recounted from the evaluated set, `[human, bot]`.
    pub test_counts: [usize; 2],
    /// Test labels of the split before any undersampling.
    pub test_counts_pre_undersampling: [usize; 2],
    pub train_counts_pre_undersampling: [usize; 2],
    pub train_counts: [usize; 2],
    pub best_epoch: usize,
    pub epochs_run: usize,
}

pub(crate) fn write_file(dir: &Path, name: &str, content: &[u8]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| Error::io(&path, e))
}

/// Cell report plus its four artifacts under `config.output_dir`.
pub fn report_cell(ws: &Workspace, cell: &CellResult, write: bool) -> Result<PipelineReport> {
    let report = PipelineReport {
        config_hash: ws.config.hash(),
        variant: cell.variant,
        metrics: cell.metrics,
        clustering: cell.clustering().ok(),
        test_counts: cell.test_counts,
        test_counts_pre_undersampling: ws.class_counts(&ws.base_split.test),
        train_counts_pre_undersampling: ws.class_counts(&ws.base_split.train),
        train_counts: cell.train_counts,
        best_epoch: cell.history.best_epoch,
        epochs_run: cell.history.epochs.len(),
    };
    if write {
        let dir = &ws.config.output_dir;
        write_file(dir, "metrics.json", &serde_json::to_vec_pretty(&report)?)?;
        write_file(dir, "history.csv", cell.history.to_csv().as_bytes())?;
        write_file(dir, "embeddings.csv", cell.embeddings_csv()?.as_bytes())?;
        cell.bundle.save(&dir.join("checkpoint.tbm"))?;
    }
    Ok(report)
}

/// ingest → featurize → fit (train only) → train → evaluate, writing
/// `metrics.json`, `history.csv`, `embeddings.csv` and `checkpoint.tbm`.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<PipelineReport> {
    let ws = Workspace::prepare(config)?;
    let split = ws.standard_split()?;
    let cell = run_cell(&ws, &split, config.variant)?;
    report_cell(&ws, &cell, true)
}

/// Loads a checkpoint's feature transforms.
pub fn bundle_context(bundle: &DetectorBundle) -> Result<FeatureContext> {
    serde_json::from_value(bundle.config["features"].clone()).map_err(|e| Error::Checkpoint(format!("feature context: {e}")))
}

/// Encodes all labelled (or, with `require_labels = false`, all) users of a
/// corpus with a checkpoint's transforms.
pub fn encode_for_bundle(bundle: &DetectorBundle, corpus: &Corpus, require_labels: bool) -> Result<EncodedSet<f32>> {
    let ctx = bundle_context(bundle)?;
    let scorer = shared_scorer();
    let reference = corpus.reference_time().ok_or_else(|| Error::Data("corpus has no timestamps".into()))?;
    let positions: Vec<usize> =
        (0..corpus.len()).filter(|&i| !require_labels || corpus.users[i].label != Label::Unknown).collect();
    let raws = raw_features(corpus, &positions, scorer, reference).stage("featurize")?;
    let mut set = EncodedSet::default();
    for (u, &i) in raws.iter().zip(&positions) {
        set.user_ids.push(u.user_id.clone());
        set.windows.push(ctx.window(&bundle.tokenizer, &assemble_profile_text(&corpus.users[i], ctx.template)));
        set.x.push(ctx.behavior(u)?);
        set.labels.push(u.label.class().unwrap_or(0));
    }
    Ok(set)
}

/// `user_id,label,confidence,p_bot` per user.
pub fn predictions_csv(bundle: &DetectorBundle, set: &EncodedSet<f32>) -> Result<String> {
    let probs = predict_probs(&bundle.model, set)?;
    let mut out = String::from("user_id,label,confidence,p_bot\n");
    for (id, (_, p)) in set.user_ids.iter().zip(&probs) {
        let (class, conf) = predict_class(*p);
        out.push_str(&format!("{id},{},{conf:.6},{:.6}\n", Label::from_class(class).as_str(), p[1]));
    }
    Ok(out)
}

pub fn metrics_json(metrics: &Metrics, config_hash: &str) -> Value {
    json!({ "config_hash": config_hash, "metrics": metrics })
}
