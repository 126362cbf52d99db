use crate::corpus::{SplitRatios, SynthSpec};
use crate::detector::TrainConfig;
use crate::error::{Error, Result};
use crate::features::FeatureGroup;
use crate::profile_features::PromptTemplate;
use crate::text_channel::{TransformerConfig, DEFAULT_D_MODEL, DEFAULT_HEADS, DEFAULT_LAYERS, DEFAULT_MAX_LEN};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synth {
        humans: usize,
        bots: usize,
        separability: f64,
        seed: u64,
        #[serde(default = "default_min_tweets")]
        min_tweets: usize,
        #[serde(default = "default_max_tweets")]
        max_tweets: usize,
    },
    Jsonl {
        users: PathBuf,
        tweets: PathBuf,
        #[serde(default)]
        labels: Option<PathBuf>,
    },
}

fn default_min_tweets() -> usize {
    SynthSpec::new(1, 1, 0.0).min_tweets
}

fn default_max_tweets() -> usize {
    SynthSpec::new(1, 1, 0.0).max_tweets
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::synth(SynthSpec::new(1000, 1000, 1.0), 3)
    }
}

impl DataSource {
    pub fn synth(spec: SynthSpec, seed: u64) -> Self {
        DataSource::Synth {
            humans: spec.humans,
            bots: spec.bots,
            separability: spec.separability,
            seed,
            min_tweets: spec.min_tweets,
            max_tweets: spec.max_tweets,
        }
    }

    /// The generator spec and seed of a synthetic source.
    pub fn synth_spec(&self) -> Option<(SynthSpec, u64)> {
        match *self {
            DataSource::Synth { humans, bots, separability, seed, min_tweets, max_tweets } => {
                Some((SynthSpec { humans, bots, separability, min_tweets, max_tweets }, seed))
            }
            DataSource::Jsonl { .. } => None,
        }
    }
}

/// Architecture of the text and behavior channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    pub max_len: usize,
    pub text_dropout: f64,
    pub behavior_dim: usize,
    pub quantile: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            d_model: DEFAULT_D_MODEL,
            n_layers: DEFAULT_LAYERS,
            n_heads: DEFAULT_HEADS,
            max_len: DEFAULT_MAX_LEN,
            text_dropout: 0.1,
            behavior_dim: crate::behavior_channel::DEFAULT_BEHAVIOR_DIM,
            quantile: crate::aigc_signals::DEFAULT_QUANTILE,
        }
    }
}

impl ModelConfig {
    pub fn text_config(&self, vocab_size: usize) -> TransformerConfig {
        TransformerConfig {
            vocab_size,
            max_len: self.max_len,
            d_model: self.d_model,
            n_layers: self.n_layers,
            n_heads: self.n_heads,
            ffn_mult: 4,
            dropout: self.text_dropout,
        }
    }
}

/// Rows of the module and modality ablation tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationVariant {
    Full,
    NoTextChannel,
    NoBehaviorChannel,
    NoBothChannels,
    DropPersonalInfo,
    DropInteractionBehavior,
    DropTweetData,
    DropPersonalInteraction,
    DropPersonalTweet,
    DropInteractionTweet,
}

impl AblationVariant {
    pub const ALL: [AblationVariant; 10] = [
        AblationVariant::Full,
        AblationVariant::NoTextChannel,
        AblationVariant::NoBehaviorChannel,
        AblationVariant::NoBothChannels,
        AblationVariant::DropPersonalInfo,
        AblationVariant::DropInteractionBehavior,
        AblationVariant::DropTweetData,
        AblationVariant::DropPersonalInteraction,
        AblationVariant::DropPersonalTweet,
        AblationVariant::DropInteractionTweet,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AblationVariant::Full => "full",
            AblationVariant::NoTextChannel => "no_text_channel",
            AblationVariant::NoBehaviorChannel => "no_behavior_channel",
            AblationVariant::NoBothChannels => "no_both_channels",
            AblationVariant::DropPersonalInfo => "drop_personal_info",
            AblationVariant::DropInteractionBehavior => "drop_interaction_behavior",
            AblationVariant::DropTweetData => "drop_tweet_data",
            AblationVariant::DropPersonalInteraction => "drop_personal_interaction",
            AblationVariant::DropPersonalTweet => "drop_personal_tweet",
            AblationVariant::DropInteractionTweet => "drop_interaction_tweet",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s).ok_or_else(|| Error::Config(format!("unknown ablation variant {s:?}")))
    }

    /// The text channel is replaced by the mean of raw token embeddings.
    pub fn raw_text(self) -> bool {
        matches!(self, AblationVariant::NoTextChannel | AblationVariant::NoBothChannels)
    }

    /// The behavior encoder is bypassed; standardized X_behav feeds the head.
    pub fn raw_behavior(self) -> bool {
        matches!(self, AblationVariant::NoBehaviorChannel | AblationVariant::NoBothChannels)
    }

    pub fn dropped_groups(self) -> Vec<FeatureGroup> {
        use FeatureGroup::*;
        match self {
            AblationVariant::DropPersonalInfo => vec![Personal],
            AblationVariant::DropInteractionBehavior => vec![Interaction],
            AblationVariant::DropTweetData => vec![Tweet],
            AblationVariant::DropPersonalInteraction => vec![Personal, Interaction],
            AblationVariant::DropPersonalTweet => vec![Personal, Tweet],
            AblationVariant::DropInteractionTweet => vec![Interaction, Tweet],
            _ => Vec::new(),
        }
    }

    /// Dropping personal information also empties the profile text.
    pub fn blank_text(self) -> bool {
        self.dropped_groups().contains(&FeatureGroup::Personal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub split: SplitRatios,
    pub split_seed: u64,
    pub undersample: bool,
    pub train: TrainConfig,
    pub model: ModelConfig,
    pub variant: AblationVariant,
    pub ablations: Vec<AblationVariant>,
    pub template: PromptTemplate,
    pub label_fractions: Vec<f64>,
    pub label_repeats: usize,
    pub train_fractions: Vec<f64>,
    /// `[bots, humans]` parts.
    pub ratio_grid: Vec<[usize; 2]>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::default(),
            split: SplitRatios::default(),
            split_seed: 7,
            undersample: true,
            train: TrainConfig::default(),
            model: ModelConfig::default(),
            variant: AblationVariant::Full,
            ablations: AblationVariant::ALL.to_vec(),
            template: PromptTemplate::None,
            label_fractions: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            label_repeats: 5,
            train_fractions: vec![0.8, 0.7, 0.6, 0.5],
            ratio_grid: vec![[1, 3], [1, 1], [3, 1]],
            output_dir: PathBuf::from("runs/default"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.train.validate()?;
        if let Some((spec, _)) = self.data.synth_spec() {
            spec.validate()?;
        }
        let m = &self.model;
        if m.d_model == 0 || m.n_layers == 0 || m.n_heads == 0 || !m.d_model.is_multiple_of(m.n_heads) || m.max_len == 0 || m.behavior_dim == 0 {
            return Err(Error::Config(format!("invalid model config {m:?}")));
        }
        if !(m.quantile > 0.0 && m.quantile < 1.0) {
            return Err(Error::Config(format!("quantile {} outside (0, 1)", m.quantile)));
        }
        Ok(())
    }

    /// Short hash of everything that determines emitted numbers (the output
    /// directory is excluded).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
