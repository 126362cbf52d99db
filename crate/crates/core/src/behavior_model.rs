//! Interaction typing, chronological behavior sequences and
//! compression-based regularity features.

use crate::corpus::TweetRecord;
use flate2::write::ZlibEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const COMPRESSION_LEVEL: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InteractionType {
    O,
    R,
    P,
}

impl InteractionType {
    pub fn symbol(self) -> char {
        match self {
            InteractionType::O => 'O',
            InteractionType::R => 'R',
            InteractionType::P => 'P',
        }
    }
}

/// Reply if either reply field is set, else retweet, else original.
pub fn classify_tweet(tweet: &TweetRecord) -> InteractionType {
    let set = |f: &Option<String>| f.as_deref().is_some_and(|s| !s.is_empty());
    if set(&tweet.in_reply_to_status_id) || set(&tweet.in_reply_to_user_id) {
        InteractionType::P
    } else if set(&tweet.retweeted_status_id) {
        InteractionType::R
    } else {
        InteractionType::O
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorSequence {
    pub symbols: String,
    pub original_len: usize,
    pub compressed_len: usize,
    pub compression_ratio: f64,
    /// Fractions of O, R, P.
    pub type_fractions: [f64; 3],
    pub mean_gap_seconds: f64,
    pub std_gap_seconds: f64,
}

/// zlib-container DEFLATE stream of the symbol bytes at level 6.
pub fn compress_symbols(symbols: &str) -> Vec<u8> {
    let mut enc = ZlibEncoder::new(Vec::new(), Compression::new(COMPRESSION_LEVEL));
    enc.write_all(symbols.as_bytes()).expect("in-memory write");
    enc.finish().expect("in-memory write")
}

/// `(compressed_len, compressed_len / original_len)`; the empty string maps to `(0, 1.0)`.
pub fn compression_features(symbols: &str) -> (usize, f64) {
    if symbols.is_empty() {
        return (0, 1.0);
    }
    let len = compress_symbols(symbols).len();
    (len, len as f64 / symbols.len() as f64)
}

pub fn build_sequence(tweets: &[TweetRecord]) -> BehaviorSequence {
    let mut order: Vec<&TweetRecord> = tweets.iter().collect();
    order.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.tweet_id.cmp(&b.tweet_id)));
    let symbols: String = order.iter().map(|t| classify_tweet(t).symbol()).collect();
    let n = symbols.len();
    let mut counts = [0usize; 3];
    for c in symbols.chars() {
        counts[match c {
            'O' => 0,
            'R' => 1,
            _ => 2,
        }] += 1;
    }
    let type_fractions = if n == 0 { [0.0; 3] } else { counts.map(|c| c as f64 / n as f64) };
    let gaps: Vec<f64> = order
        .windows(2)
        .map(|w| (w[1].created_at - w[0].created_at).num_milliseconds() as f64 / 1000.0)
        .collect();
    let (mean_gap_seconds, std_gap_seconds) = if gaps.is_empty() {
        (0.0, 0.0)
    } else {
        let m = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let var = gaps.iter().map(|g| (g - m) * (g - m)).sum::<f64>() / gaps.len() as f64;
        (m, var.sqrt())
    };
    let (compressed_len, compression_ratio) = compression_features(&symbols);
    BehaviorSequence {
        symbols,
        original_len: n,
        compressed_len,
        compression_ratio,
        type_fractions,
        mean_gap_seconds,
        std_gap_seconds,
    }
}
