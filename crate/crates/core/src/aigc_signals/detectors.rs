//! GLTR-style rank statistics and Fast-DetectGPT-style analytic curvature.

use super::scorer::{conditional_logprobs, LanguageModelScorer};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GltrScore {
    pub top10_frac: f64,
    pub top100_frac: f64,
    pub rest_frac: f64,
    pub mean_log_rank: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureScore {
    pub value: f64,
    /// Set when the summed per-position variance is zero; `value` is 0.
    pub degenerate: bool,
}

/// Per-tweet detector outputs. `curvature` is absent for single-token text.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TweetScore {
    pub gltr_top10_frac: f64,
    pub gltr_top100_frac: f64,
    pub gltr_rest_frac: f64,
    pub gltr_mean_log_rank: f64,
    pub curvature: Option<f64>,
    pub token_count: usize,
}

/// 1-based rank of `token` in `logprobs`; ties go to the lower token id.
pub fn token_rank(logprobs: &[f64], token: u32) -> usize {
    let x = token as usize;
    let lx = logprobs[x];
    1 + logprobs.iter().enumerate().filter(|&(w, &lw)| lw > lx || (lw == lx && w < x)).count()
}

pub fn gltr_from_logprobs(tokens: &[u32], logprobs: &[Vec<f64>]) -> GltrScore {
    let n = tokens.len();
    let (mut top10, mut top100, mut log_rank) = (0usize, 0usize, 0.0f64);
    for (row, &tok) in logprobs.iter().zip(tokens) {
        let r = token_rank(row, tok);
        if r <= 10 {
            top10 += 1;
        } else if r <= 100 {
            top100 += 1;
        }
        log_rank += (r as f64).ln();
    }
    let nf = n as f64;
    GltrScore {
        top10_frac: top10 as f64 / nf,
        top100_frac: top100 as f64 / nf,
        rest_frac: (n - top10 - top100) as f64 / nf,
        mean_log_rank: log_rank / nf,
    }
}

/// `(sum_t log p(x_t) - sum_t mu_t) / sqrt(sum_t var_t)` with the mean and
/// variance of `log p(w)` under `w ~ p`, summed exactly over the vocabulary.
pub fn curvature_from_logprobs(tokens: &[u32], logprobs: &[Vec<f64>]) -> CurvatureScore {
    let (mut ll, mut mu_sum, mut var_sum) = (0.0, 0.0, 0.0);
    for (row, &tok) in logprobs.iter().zip(tokens) {
        let mut mu = 0.0;
        for &lp in row {
            let p = lp.exp();
            if p > 0.0 {
                mu += p * lp;
            }
        }
        let mut var = 0.0;
        for &lp in row {
            let p = lp.exp();
            if p > 0.0 {
                var += p * (lp - mu) * (lp - mu);
            }
        }
        ll += row[tok as usize];
        mu_sum += mu;
        var_sum += var;
    }
    if var_sum <= 0.0 || !var_sum.is_finite() {
        return CurvatureScore { value: 0.0, degenerate: true };
    }
    CurvatureScore { value: (ll - mu_sum) / var_sum.sqrt(), degenerate: false }
}

fn scorer_tokens<S: LanguageModelScorer + ?Sized>(text: &str, scorer: &S) -> Vec<u32> {
    let mut t = scorer.encode(text);
    t.truncate(scorer.max_context());
    t
}

pub fn score_gltr<S: LanguageModelScorer + ?Sized>(text: &str, scorer: &S) -> Result<GltrScore> {
    let tokens = scorer_tokens(text, scorer);
    if tokens.is_empty() {
        return Err(Error::Score("text produced no tokens".into()));
    }
    let lp = conditional_logprobs(scorer, &tokens)?;
    Ok(gltr_from_logprobs(&tokens, &lp))
}

pub fn score_curvature<S: LanguageModelScorer + ?Sized>(text: &str, scorer: &S) -> Result<CurvatureScore> {
    let tokens = scorer_tokens(text, scorer);
    if tokens.len() < 2 {
        return Err(Error::Score(format!("curvature needs at least 2 tokens, got {}", tokens.len())));
    }
    let lp = conditional_logprobs(scorer, &tokens)?;
    Ok(curvature_from_logprobs(&tokens, &lp))
}

/// Both detectors from a single scorer pass.
pub fn score_tweet<S: LanguageModelScorer + ?Sized>(text: &str, scorer: &S) -> Result<TweetScore> {
    let tokens = scorer_tokens(text, scorer);
    if tokens.is_empty() {
        return Err(Error::Score("text produced no tokens".into()));
    }
    let lp = conditional_logprobs(scorer, &tokens)?;
    let g = gltr_from_logprobs(&tokens, &lp);
    let curvature = (tokens.len() >= 2).then(|| curvature_from_logprobs(&tokens, &lp).value);
    Ok(TweetScore {
        gltr_top10_frac: g.top10_frac,
        gltr_top100_frac: g.top100_frac,
        gltr_rest_frac: g.rest_frac,
        gltr_mean_log_rank: g.mean_log_rank,
        curvature,
        token_count: tokens.len(),
    })
}
