use crate::error::{Error, Result};

/// Causal LM backend shared by both AIGC detectors.
///
/// Row `t` of [`LanguageModelScorer::logprobs`] is the full log-probability
/// distribution over the vocabulary for token `t` given tokens `< t`; row 0
/// is the unconditional first-token distribution.
pub trait LanguageModelScorer: Send + Sync {
    fn vocab_size(&self) -> usize;

    fn max_context(&self) -> usize;

    /// Tokenizes text into the scorer's vocabulary.
    fn encode(&self, text: &str) -> Vec<u32>;

    /// Implementations may assume `1 <= tokens.len() <= max_context()`.
    fn logprobs(&self, tokens: &[u32]) -> Vec<Vec<f64>>;
}

/// Length-checked per-position conditional log-probabilities.
pub fn conditional_logprobs<S: LanguageModelScorer + ?Sized>(scorer: &S, tokens: &[u32]) -> Result<Vec<Vec<f64>>> {
    if tokens.is_empty() {
        return Err(Error::Length("token sequence is empty".into()));
    }
    if tokens.len() > scorer.max_context() {
        return Err(Error::Length(format!("{} tokens exceed context {}", tokens.len(), scorer.max_context())));
    }
    if let Some(&bad) = tokens.iter().find(|&&t| t as usize >= scorer.vocab_size()) {
        return Err(Error::Length(format!("token id {bad} outside vocabulary of {}", scorer.vocab_size())));
    }
    Ok(scorer.logprobs(tokens))
}

/// In-place log-softmax.
pub fn log_softmax(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
    row.iter_mut().for_each(|v| *v -= lse);
}
