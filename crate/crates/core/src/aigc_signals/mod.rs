//! AIGC detector signals: GLTR-style token ranks and analytic probability
//! curvature, both scored by a small causal LM, then aggregated per user.

mod aggregate;
mod bundled;
mod detectors;
mod lm;
mod scorer;

pub use aggregate::{
    aggregate_user_scores, dim_value, fit_thresholds, quantile, AigcProfile, DimStats, Thresholds, DEFAULT_QUANTILE,
    DIM_CURVATURE, DIM_MEAN_LOG_RANK, DIM_TOP10, SCORE_DIMS,
};
pub use bundled::{bundled_corpus, fill_template, shared_scorer, BundledConfig, BundledScorer};
pub use detectors::{
    curvature_from_logprobs, gltr_from_logprobs, score_curvature, score_gltr, score_tweet, token_rank, CurvatureScore,
    GltrScore, TweetScore,
};
pub use lm::{LanguageModel, Sampling};
pub use scorer::{conditional_logprobs, log_softmax, LanguageModelScorer};

/// Greedy (argmax, lowest id on ties) continuation of `prefix` computed
/// through the scorer itself, so its ranks are exactly 1 under that scorer.
pub fn greedy_tokens<S: LanguageModelScorer + ?Sized>(scorer: &S, n: usize) -> Vec<u32> {
    let mut tokens: Vec<u32> = Vec::with_capacity(n);
    for _ in 0..n.min(scorer.max_context()) {
        // Row `len` of a sequence extended by a placeholder conditions only on `tokens`.
        let mut probe = tokens.clone();
        probe.push(0);
        let rows = scorer.logprobs(&probe);
        let row = &rows[tokens.len()];
        let best = row.iter().enumerate().fold(0, |b, (i, &v)| if v > row[b] { i } else { b });
        tokens.push(best as u32);
    }
    tokens
}
