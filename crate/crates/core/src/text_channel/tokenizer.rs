//! Byte-level BPE tokenizer.
//!
//! Text is whitespace-normalized, split into words, and every word after
//! the first carries a leading space byte. Ids `0..256` are raw bytes,
//! merges follow in rank order, then the two special tokens.
//!
//! Vocabulary file format (UTF-8, line oriented):
//!
//! ```text
//! #tracebot-bpe v1
//! merges <M>
//! <left_id> <right_id>        # M lines, rank order
//! vocab <V>
//! <id>\t<token>               # V lines, bytes outside printable ASCII as \xNN
//! ```
//!
//! Only the merge list is load-bearing; the vocab listing is for humans and
//! is checked for a matching count.

use crate::error::{Error, Result};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

pub const END_OF_TEXT: &str = "<|endoftext|>";
pub const PAD: &str = "<|pad|>";

#[derive(Debug, Clone)]
pub struct Tokenizer {
    merges: Vec<(u32, u32)>,
    ranks: HashMap<(u32, u32), u32>,
    token_bytes: Vec<Vec<u8>>,
    known_words: HashMap<Vec<u8>, Vec<u32>>,
}

impl PartialEq for Tokenizer {
    fn eq(&self, other: &Self) -> bool {
        self.merges == other.merges
    }
}

/// Padded token window plus attention mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenWindow {
    pub ids: Vec<u32>,
    pub mask: Vec<u8>,
}

impl TokenWindow {
    pub fn real_len(&self) -> usize {
        self.mask.iter().filter(|&&m| m == 1).count()
    }
}

/// Collapses whitespace runs to single spaces and trims.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn words(text: &str) -> impl Iterator<Item = Vec<u8>> + '_ {
    text.split_whitespace().enumerate().map(|(i, w)| {
        let mut b = Vec::with_capacity(w.len() + 1);
        if i > 0 {
            b.push(b' ');
        }
        b.extend_from_slice(w.as_bytes());
        b
    })
}

impl Tokenizer {
    /// Trains merges until `vocab_size` (including the two specials) is
    /// reached or no pair occurs at least twice. Ties on pair frequency go
    /// to the smallest `(left, right)` id pair.
    pub fn train<'a>(texts: impl IntoIterator<Item = &'a str>, vocab_size: usize) -> Self {
        let mut counts: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
        for t in texts {
            for w in words(t) {
                *counts.entry(w).or_default() += 1;
            }
        }
        let mut seqs: Vec<(Vec<u32>, usize)> =
            counts.into_iter().map(|(w, c)| (w.into_iter().map(u32::from).collect(), c)).collect();
        let max_merges = vocab_size.saturating_sub(258);
        let mut merges = Vec::new();
        while merges.len() < max_merges {
            let mut pairs: HashMap<(u32, u32), usize> = HashMap::new();
            for (s, c) in &seqs {
                for p in s.windows(2) {
                    *pairs.entry((p[0], p[1])).or_default() += c;
                }
            }
            let best = pairs.into_iter().filter(|&(_, c)| c >= 2).max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
            let Some((pair, _)) = best else { break };
            let new_id = 256 + merges.len() as u32;
            merges.push(pair);
            for (s, _) in seqs.iter_mut() {
                *s = merge_pair(s, pair, new_id);
            }
        }
        Self::from_merges(merges)
    }

    pub fn from_merges(merges: Vec<(u32, u32)>) -> Self {
        let mut token_bytes: Vec<Vec<u8>> = (0..=255u8).map(|b| vec![b]).collect();
        let mut ranks = HashMap::with_capacity(merges.len());
        for (r, &(a, b)) in merges.iter().enumerate() {
            let mut bytes = token_bytes[a as usize].clone();
            bytes.extend_from_slice(&token_bytes[b as usize]);
            token_bytes.push(bytes);
            ranks.insert((a, b), r as u32);
        }
        token_bytes.push(END_OF_TEXT.as_bytes().to_vec());
        token_bytes.push(PAD.as_bytes().to_vec());
        let mut tok = Self { merges, ranks, token_bytes, known_words: HashMap::new() };
        // Cache the encoding of every merged single-word token.
        let cache: HashMap<Vec<u8>, Vec<u32>> = (256..256 + tok.merges.len() as u32)
            .map(|id| {
                let b = tok.token_bytes[id as usize].clone();
                let ids = tok.encode_word(&b);
                (b, ids)
            })
            .collect();
        tok.known_words = cache;
        tok
    }

    pub fn vocab_size(&self) -> usize {
        self.token_bytes.len()
    }

    pub fn merges(&self) -> &[(u32, u32)] {
        &self.merges
    }

    pub fn eot_id(&self) -> u32 {
        256 + self.merges.len() as u32
    }

    pub fn pad_id(&self) -> u32 {
        self.eot_id() + 1
    }

    pub fn is_special(&self, id: u32) -> bool {
        id >= self.eot_id()
    }

    fn encode_word(&self, word: &[u8]) -> Vec<u32> {
        if let Some(ids) = self.known_words.get(word) {
            return ids.clone();
        }
        let mut ids: Vec<u32> = word.iter().map(|&b| u32::from(b)).collect();
        loop {
            let best = ids
                .windows(2)
                .filter_map(|p| self.ranks.get(&(p[0], p[1])).map(|&r| (r, (p[0], p[1]))))
                .min();
            let Some((r, pair)) = best else { break };
            ids = merge_pair(&ids, pair, 256 + r);
        }
        ids
    }

    /// Unpadded token ids of the whitespace-normalized text.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        words(text).flat_map(|w| self.encode_word(&w)).collect()
    }

    /// Fixed-length window: truncated, or right-padded with the pad id.
    pub fn tokenize(&self, text: &str, max_len: usize) -> TokenWindow {
        let mut ids = self.encode(text);
        ids.truncate(max_len);
        let mut mask = vec![1u8; ids.len()];
        ids.resize(max_len, self.pad_id());
        mask.resize(max_len, 0);
        TokenWindow { ids, mask }
    }

    /// Concatenated token bytes, specials skipped, invalid UTF-8 replaced.
    pub fn decode(&self, ids: &[u32]) -> String {
        let bytes: Vec<u8> = ids
            .iter()
            .filter(|&&id| !self.is_special(id) && (id as usize) < self.token_bytes.len())
            .flat_map(|&id| self.token_bytes[id as usize].iter().copied())
            .collect();
        let s = String::from_utf8_lossy(&bytes);
        s.strip_prefix(' ').unwrap_or(&s).to_string()
    }

    pub fn to_vocab_file(&self) -> String {
        let mut out = String::from("#tracebot-bpe v1\n");
        let _ = writeln!(out, "merges {}", self.merges.len());
        for (a, b) in &self.merges {
            let _ = writeln!(out, "{a} {b}");
        }
        let _ = writeln!(out, "vocab {}", self.vocab_size());
        for (id, bytes) in self.token_bytes.iter().enumerate() {
            let _ = writeln!(out, "{id}\t{}", escape(bytes));
        }
        out
    }

    pub fn from_vocab_file(content: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Checkpoint(format!("tokenizer line {line}: {msg}"));
        let mut lines = content.lines().enumerate();
        match lines.next() {
            Some((_, "#tracebot-bpe v1")) => {}
            _ => return Err(bad(1, "missing header")),
        }
        let (ln, head) = lines.next().ok_or_else(|| bad(2, "missing merges count"))?;
        let m: usize = head
            .strip_prefix("merges ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(ln + 1, "bad merges count"))?;
        let mut merges = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, l) = lines.next().ok_or_else(|| bad(0, "truncated merge list"))?;
            let mut it = l.split(' ').map(str::parse::<u32>);
            match (it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b))) if (a as usize) < 256 + merges.len() && (b as usize) < 256 + merges.len() => {
                    merges.push((a, b))
                }
                _ => return Err(bad(ln + 1, "bad merge")),
            }
        }
        let tok = Self::from_merges(merges);
        if let Some((ln, l)) = lines.next() {
            let v: usize = l.strip_prefix("vocab ").and_then(|s| s.parse().ok()).ok_or_else(|| bad(ln + 1, "bad vocab count"))?;
            if v != tok.vocab_size() {
                return Err(bad(ln + 1, "vocab count disagrees with merges"));
            }
        }
        Ok(tok)
    }
}

fn merge_pair(ids: &[u32], pair: (u32, u32), new_id: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(ids.len());
    let mut i = 0;
    while i < ids.len() {
        if i + 1 < ids.len() && (ids[i], ids[i + 1]) == pair {
            out.push(new_id);
            i += 2;
        } else {
            out.push(ids[i]);
            i += 1;
        }
    }
    out
}

fn escape(bytes: &[u8]) -> String {
    let mut s = String::new();
    for &b in bytes {
        if (0x21..0x7f).contains(&b) && b != b'\\' {
            s.push(b as char);
        } else {
            let _ = write!(s, "\\x{b:02x}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small() -> Tokenizer {
        let text = "the cat sat on the mat the cat ate the rat that sat on the hat";
        Tokenizer::train(std::iter::repeat_n(text, 5), 300)
    }

    #[test]
    fn learns_frequent_words() {
        let t = small();
        assert!(t.vocab_size() > 258 && t.vocab_size() <= 300);
        let ids = t.encode("the cat");
        assert!(ids.len() <= 2, "{ids:?}");
        assert_eq!(t.decode(&ids), "the cat");
    }

    #[test]
    fn empty_string_is_all_padding() {
        let t = small();
        let w = t.tokenize("", 16);
        assert_eq!(w.ids, vec![t.pad_id(); 16]);
        assert!(w.mask.iter().all(|&m| m == 0));
    }

    #[test]
    fn long_text_truncates_with_full_mask() {
        let t = small();
        let text = "zebra quokka axolotl narwhal ".repeat(6);
        let full = t.encode(&text);
        assert!(full.len() >= 40);
        let w = t.tokenize(&text, 16);
        assert_eq!(w.ids, full[..16].to_vec());
        assert!(w.mask.iter().all(|&m| m == 1));
    }

    #[test]
    fn vocab_file_round_trip() {
        let t = small();
        let file = t.to_vocab_file();
        let back = Tokenizer::from_vocab_file(&file).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_vocab_file(), file);
        assert!(Tokenizer::from_vocab_file("nonsense").is_err());
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(s in "[ -~\\t\\n]{0,80}") {
            let t = small();
            prop_assert_eq!(t.decode(&t.encode(&s)), normalize_whitespace(&s));
        }

        #[test]
        fn unpadded_prefix_decodes_to_input_prefix(s in "[a-z ]{0,60}", len in 1usize..32) {
            let t = small();
            let w = t.tokenize(&s, len);
            let n = w.real_len();
            let decoded = t.decode(&w.ids[..n]);
            prop_assert!(normalize_whitespace(&s).starts_with(&decoded));
        }
    }
}
