//! The in-repo scoring model: a grammar-generated corpus, a BPE vocabulary
//! trained on it, and a small causal LM pre-trained on that corpus.

use super::lm::{LanguageModel, Sampling};
use super::scorer::{log_softmax, LanguageModelScorer};
use crate::corpus::lexicon::*;
use crate::error::{Error, Result};
use crate::nn::archive::{read_archive, restore_params, write_archive};
use crate::nn::{chunked_grads, Adam, AdamConfig, Mode, Parameters};
use crate::text_channel::{Tokenizer, TransformerConfig, DEFAULT_VOCAB_SIZE};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

const SCORER_MAGIC: &[u8; 4] = b"TBS1";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundledConfig {
    pub vocab_size: usize,
    pub sentences: usize,
    pub context: usize,
    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    pub steps: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for BundledConfig {
    fn default() -> Self {
        Self {
            vocab_size: DEFAULT_VOCAB_SIZE,
            sentences: 3000,
            context: 48,
            d_model: 64,
            n_layers: 2,
            n_heads: 2,
            steps: 240,
            batch: 8,
            lr: 3e-3,
            seed: 2024,
        }
    }
}

impl BundledConfig {
    pub fn lm_config(&self, vocab_size: usize) -> TransformerConfig {
        TransformerConfig {
            vocab_size,
            max_len: self.context,
            d_model: self.d_model,
            n_layers: self.n_layers,
            n_heads: self.n_heads,
            ffn_mult: 4,
            dropout: 0.0,
        }
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&(FORMAT_VERSION, self)).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))[..16].to_string()
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn pick<'a, R: Rng>(rng: &mut R, words: &[&'a str]) -> &'a str {
    words.choose(rng).expect("non-empty word list")
}

/// Fills `{adj}`, `{noun}`, `{topic}`, `{verb}`, `{opener}`, `{closer}` slots.
pub fn fill_template<R: Rng>(template: &str, rng: &mut R) -> String {
    let mut out = String::with_capacity(template.len() + 32);
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let end = start + rest[start..].find('}').expect("closed slot");
        let words = match &rest[start + 1..end] {
            "adj" => STYLE_ADJECTIVES,
            "noun" => STYLE_NOUNS,
            "topic" => STYLE_TOPICS,
            "verb" => STYLE_VERBS,
            "opener" => STYLE_OPENERS,
            "closer" => STYLE_CLOSERS,
            other => panic!("unknown slot {other}"),
        };
        out.push_str(pick(rng, words));
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    out
}

const SENTENCE_TEMPLATES: &[&str] = &[
    "{opener} the {adj} {noun} of {topic} {closer}",
    "{topic} {verb} the {adj} {noun} {closer}",
    "the {topic} {noun} {verb} {adj} and {adj} {closer}",
    "{opener} our {adj} {topic} {noun} {closer}",
    "{adj} {noun} for every {topic} {noun} {closer}",
    "our {noun} {verb} the {noun} of {topic} {closer}",
    "{opener} the {topic} {noun} {closer} #{topic}",
    "{topic} {noun} {verb} the {adj} {topic} {noun} #{topic} #{topic}",
];

/// The fixed pre-training corpus: promotional-register sentences plus
/// slot-filled bios.
pub fn bundled_corpus(sentences: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..sentences)
        .map(|i| {
            let templates = if i % 5 == 4 { BOT_BIO_TEMPLATES } else { SENTENCE_TEMPLATES };
            fill_template(pick(&mut rng, templates), &mut rng)
        })
        .collect()
}

/// Extra tokenizer-training text so every lexicon word exists as a token.
fn lexicon_texts() -> Vec<String> {
    let lists: [&[&str]; 8] =
        [BROAD, FIRST_NAMES, LAST_NAMES, CITIES, BOT_NAME_PREFIXES, BOT_NAME_SUFFIXES, STYLE_OPENERS, STYLE_CLOSERS];
    let mut out = Vec::new();
    for list in lists {
        let joined = list.join(" ");
        out.push(format!("{joined} {joined}"));
    }
    out
}

/// A frozen tokenizer + LM pair implementing [`LanguageModelScorer`].
#[derive(Debug, Clone, PartialEq)]
pub struct BundledScorer {
    pub tokenizer: Tokenizer,
    pub lm: LanguageModel<f32>,
}

impl BundledScorer {
    /// Builds the vocabulary and pre-trains the LM from scratch.
    pub fn train(config: &BundledConfig) -> Self {
        let corpus = bundled_corpus(config.sentences, config.seed);
        let lex = lexicon_texts();
        let tokenizer = Tokenizer::train(corpus.iter().chain(&lex).map(String::as_str), config.vocab_size);
        let eot = tokenizer.eot_id();
        let mut stream = Vec::new();
        for s in &corpus {
            stream.push(eot);
            stream.extend(tokenizer.encode(s));
        }
        stream.push(eot);

        let ctx = config.context;
        let mut lm = LanguageModel::<f32>::new(config.lm_config(tokenizer.vocab_size()), config.seed);
        let mut adam = Adam::new(AdamConfig::with_lr(config.lr), &lm.params_mut());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
        let steps = config.steps.max(1);
        for step in 0..steps {
            let starts: Vec<usize> = (0..config.batch).map(|_| rng.gen_range(0..stream.len() - ctx - 1)).collect();
            let (_, grad) = chunked_grads(&lm, &starts, |_, &s, g| {
                lm.loss_and_grad(&stream[s..s + ctx], &stream[s + 1..s + ctx + 1], &mut Mode::Eval, g)
            });
            let scale = 1.0 / (config.batch * ctx) as f32;
            let mut grad = grad;
            grad.params_mut().into_iter().for_each(|t| t.data_mut().iter_mut().for_each(|v| *v *= scale));
            // Linear decay to a tenth of the base rate.
            adam.set_lr(config.lr * (1.0 - 0.9 * step as f64 / steps as f64));
            adam.step(lm.params_mut(), grad.params().into_iter().map(|(_, t)| t).collect());
        }
        Self { tokenizer, lm }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let meta = serde_json::json!({
            "format_version": FORMAT_VERSION,
            "lm": self.lm.transformer.config,
            "tokenizer": self.tokenizer.to_vocab_file(),
        });
        write_archive(SCORER_MAGIC, &meta, &self.lm.params())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (meta, mut tensors) = read_archive(SCORER_MAGIC, bytes)?;
        if meta["format_version"] != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported scorer format {}", meta["format_version"])));
        }
        let config: TransformerConfig = serde_json::from_value(meta["lm"].clone())?;
        let vocab = meta["tokenizer"].as_str().ok_or_else(|| Error::Checkpoint("missing tokenizer".into()))?;
        let tokenizer = Tokenizer::from_vocab_file(vocab)?;
        let mut lm = LanguageModel::new(config, 0);
        restore_params(&mut lm, &mut tensors)?;
        Ok(Self { tokenizer, lm })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }

    /// Trains once per config and caches the result under
    /// `TRACEBOT_CACHE_DIR` (default: the system temp dir).
    pub fn cached(config: &BundledConfig) -> Result<Self> {
        let dir = std::env::var_os("TRACEBOT_CACHE_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| std::env::temp_dir().join("tracebot-cache"));
        let path = dir.join(format!("scorer-{}.tbs", config.hash()));
        if let Ok(s) = Self::load(&path) {
            return Ok(s);
        }
        let scorer = Self::train(config);
        if std::fs::create_dir_all(&dir).is_ok() {
            let tmp = dir.join(format!("scorer-{}.{}.tmp", config.hash(), std::process::id()));
            if scorer.save(&tmp).is_ok() {
                let _ = std::fs::rename(&tmp, &path);
            }
        }
        Ok(scorer)
    }

    /// Samples a tweet-like text.
    pub fn generate<R: Rng>(&self, max_tokens: usize, sampling: Sampling, rng: &mut R) -> String {
        let eot = self.tokenizer.eot_id();
        let ids = self.lm.sample(eot, eot, max_tokens.min(self.max_context() - 1), sampling, rng);
        self.tokenizer.decode(&ids)
    }
}

/// Process-wide default scorer.
pub fn shared_scorer() -> &'static BundledScorer {
    static SCORER: OnceLock<BundledScorer> = OnceLock::new();
    SCORER.get_or_init(|| BundledScorer::cached(&BundledConfig::default()).expect("bundled scorer builds"))
}

impl LanguageModelScorer for BundledScorer {
    fn vocab_size(&self) -> usize {
        self.lm.vocab_size()
    }

    fn max_context(&self) -> usize {
        self.lm.max_len()
    }

    fn encode(&self, text: &str) -> Vec<u32> {
        self.tokenizer.encode(text)
    }

    fn logprobs(&self, tokens: &[u32]) -> Vec<Vec<f64>> {
        // The end-of-text token doubles as BOS, so row 0 is the
        // unconditional first-token distribution.
        let mut input = Vec::with_capacity(tokens.len());
        input.push(self.tokenizer.eot_id());
        input.extend_from_slice(&tokens[..tokens.len() - 1]);
        let v = self.vocab_size();
        self.lm
            .logits(&input)
            .chunks_exact(v)
            .map(|row| {
                let mut r: Vec<f64> = row.iter().map(|&x| f64::from(x)).collect();
                log_softmax(&mut r);
                r
            })
            .collect()
    }
}
