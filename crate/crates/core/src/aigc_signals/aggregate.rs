use super::detectors::TweetScore;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Score dimensions in the order used by thresholds, profiles and the CSV dump.
pub const SCORE_DIMS: [&str; 5] = ["gltr_top10_frac", "gltr_top100_frac", "gltr_rest_frac", "gltr_mean_log_rank", "curvature"];
pub const DIM_TOP10: usize = 0;
pub const DIM_MEAN_LOG_RANK: usize = 3;
pub const DIM_CURVATURE: usize = 4;

pub const DEFAULT_QUANTILE: f64 = 0.9;

pub fn dim_value(score: &TweetScore, dim: usize) -> Option<f64> {
    match dim {
        0 => Some(score.gltr_top10_frac),
        1 => Some(score.gltr_top100_frac),
        2 => Some(score.gltr_rest_frac),
        3 => Some(score.gltr_mean_log_rank),
        4 => score.curvature,
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DimStats {
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub min: f64,
    pub frac_above: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AigcProfile {
    pub dims: [DimStats; 5],
    pub tweet_count: usize,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub q: f64,
    pub values: [f64; 5],
}

/// Empirical quantile with linear interpolation between order statistics
/// at rank `(n - 1) q`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn fit_thresholds(train_scores: &[TweetScore], q: f64) -> Result<Thresholds> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Config(format!("threshold quantile {q} outside (0, 1)")));
    }
    if train_scores.is_empty() {
        return Err(Error::Fit("no training tweet scores to fit thresholds".into()));
    }
    let mut values = [0.0; 5];
    for (d, slot) in values.iter_mut().enumerate() {
        let col: Vec<f64> = train_scores.iter().filter_map(|s| dim_value(s, d)).collect();
        if col.is_empty() {
            return Err(Error::Fit(format!("no training values for {}", SCORE_DIMS[d])));
        }
        *slot = quantile(&col, q);
    }
    Ok(Thresholds { q, values })
}

fn stats(values: &[f64], threshold: f64) -> DimStats {
    if values.is_empty() {
        return DimStats::default();
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    DimStats {
        mean,
        std: var.sqrt(),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        frac_above: values.iter().filter(|&&v| v > threshold).count() as f64 / n,
    }
}

/// Per-dimension summary with population std; dimensions with no values are zero.
pub fn aggregate_user_scores(tweet_scores: &[TweetScore], thresholds: &Thresholds) -> AigcProfile {
    let mut dims = [DimStats::default(); 5];
    for (d, slot) in dims.iter_mut().enumerate() {
        // Sorting makes the floating-point sums independent of tweet order.
        let mut col: Vec<f64> = tweet_scores.iter().filter_map(|s| dim_value(s, d)).collect();
        col.sort_by(f64::total_cmp);
        *slot = stats(&col, thresholds.values[d]);
    }
    AigcProfile { dims, tweet_count: tweet_scores.len(), q: thresholds.q }
}
