//! Text channel: BPE tokenization, causal transformer, masked mean pooling.

mod encoder;
mod tokenizer;
mod transformer;

pub use encoder::{encode_text, raw_embedding_mean, EncodeCache, TextEncoder, POOL_EPS};
pub use tokenizer::{normalize_whitespace, TokenWindow, Tokenizer, END_OF_TEXT, PAD};
pub use transformer::{Block, KvCache, Transformer, TransformerCache, TransformerConfig};

/// Desk-scale text channel defaults.
pub const DEFAULT_VOCAB_SIZE: usize = 4096;
pub const DEFAULT_MAX_LEN: usize = 128;
pub const DEFAULT_D_MODEL: usize = 128;
pub const DEFAULT_LAYERS: usize = 4;
pub const DEFAULT_HEADS: usize = 4;

/// Default text encoder shape for a tokenizer's vocabulary.
pub fn default_text_config(vocab_size: usize) -> TransformerConfig {
    TransformerConfig {
        vocab_size,
        max_len: DEFAULT_MAX_LEN,
        d_model: DEFAULT_D_MODEL,
        n_layers: DEFAULT_LAYERS,
        n_heads: DEFAULT_HEADS,
        ffn_mult: 4,
        dropout: 0.1,
    }
}
