//! Per-user raw features and assembly of the 40-column X_behav vector.
//! Column order is documented in `docs/feature_schema.md`.

use crate::aigc_signals::{aggregate_user_scores, fit_thresholds, score_tweet, LanguageModelScorer, Thresholds, TweetScore, SCORE_DIMS};
use crate::behavior_model::{build_sequence, BehaviorSequence};
use crate::corpus::{Corpus, Label, Train};
use crate::error::{Error, Result};
use crate::profile_features::{extract_profile_numeric, PROFILE_COLUMNS, PROFILE_DIM};
use chrono::{DateTime, Utc};
use rayon::prelude::*;
use std::collections::HashMap;

pub const BEHAVIOR_FEATURE_DIM: usize = 40;

const SEQUENCE_COLUMNS: [&str; 8] = [
    "seq_original_len",
    "seq_frac_original",
    "seq_frac_retweet",
    "seq_frac_reply",
    "seq_mean_gap_seconds",
    "seq_std_gap_seconds",
    "seq_compressed_len",
    "seq_compression_ratio",
];

const AIGC_COLUMNS: [&str; 12] = [
    "aigc_curvature_mean",
    "aigc_curvature_std",
    "aigc_curvature_max",
    "aigc_curvature_min",
    "aigc_curvature_frac_above",
    "aigc_top10_mean",
    "aigc_top10_std",
    "aigc_top10_max",
    "aigc_top10_min",
    "aigc_top10_frac_above",
    "aigc_tweet_count",
    "aigc_mean_log_rank_mean",
];

/// Column names of X_behav in order.
pub fn behavior_columns() -> Vec<&'static str> {
    PROFILE_COLUMNS.iter().chain(&SEQUENCE_COLUMNS).chain(&AIGC_COLUMNS).copied().collect()
}

/// Input groups that modality ablations remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureGroup {
    /// Profile numerics (and, on the text side, the profile text).
    Personal,
    /// Behavior-sequence statistics.
    Interaction,
    /// AIGC score statistics over the user's tweets.
    Tweet,
}

impl FeatureGroup {
    pub fn columns(self) -> std::ops::Range<usize> {
        match self {
            FeatureGroup::Personal => 0..PROFILE_DIM,
            FeatureGroup::Interaction => PROFILE_DIM..PROFILE_DIM + 8,
            FeatureGroup::Tweet => PROFILE_DIM + 8..BEHAVIOR_FEATURE_DIM,
        }
    }
}

/// Everything about one user that does not depend on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct UserRaw {
    pub user_id: String,
    pub label: Label,
    pub profile: [f64; PROFILE_DIM],
    pub sequence: BehaviorSequence,
    /// `(tweet_id, score)` for every tweet that tokenized to at least one token.
    pub scores: Vec<(String, TweetScore)>,
}

impl UserRaw {
    pub fn tweet_scores(&self) -> Vec<TweetScore> {
        self.scores.iter().map(|(_, s)| *s).collect()
    }
}

/// Scores each distinct text once, in parallel.
fn score_texts<S: LanguageModelScorer + ?Sized>(texts: &[&str], scorer: &S) -> Result<HashMap<String, Option<TweetScore>>> {
    let mut unique: Vec<&str> = texts.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let scored: Vec<(String, Option<TweetScore>)> = unique
        .par_iter()
        .map(|&t| match score_tweet(t, scorer) {
            Ok(s) => Ok((t.to_string(), Some(s))),
            Err(Error::Score(_)) => Ok((t.to_string(), None)),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    Ok(scored.into_iter().collect())
}

/// Raw features for the users at `positions` in the corpus.
pub fn raw_features<S: LanguageModelScorer + ?Sized>(
    corpus: &Corpus,
    positions: &[usize],
    scorer: &S,
    reference_time: DateTime<Utc>,
) -> Result<Vec<UserRaw>> {
    let texts: Vec<&str> = positions.iter().flat_map(|&i| corpus.tweets[i].iter().map(|t| t.text.as_str())).collect();
    let scores = score_texts(&texts, scorer)?;
    positions
        .iter()
        .map(|&i| {
            let user = &corpus.users[i];
            let tweets = &corpus.tweets[i];
            Ok(UserRaw {
                user_id: user.user_id.clone(),
                label: user.label,
                profile: extract_profile_numeric(user, reference_time)?,
                sequence: build_sequence(tweets),
                scores: tweets
                    .iter()
                    .filter_map(|t| scores[t.text.as_str()].map(|s| (t.tweet_id.clone(), s)))
                    .collect(),
            })
        })
        .collect()
}

/// Quantile thresholds from the tweets of training users only.
pub fn fit_train_thresholds(train_users: &Train<Vec<&UserRaw>>, q: f64) -> Result<Thresholds> {
    let scores: Vec<TweetScore> = train_users.get().iter().flat_map(|u| u.tweet_scores()).collect();
    fit_thresholds(&scores, q)
}

/// The 40-column X_behav vector, with `dropped` groups zeroed.
pub fn assemble_behavior(user: &UserRaw, thresholds: &Thresholds, dropped: &[FeatureGroup]) -> Vec<f64> {
    let s = &user.sequence;
    let profile = aggregate_user_scores(&user.tweet_scores(), thresholds);
    let mut x = Vec::with_capacity(BEHAVIOR_FEATURE_DIM);
    x.extend_from_slice(&user.profile);
    x.extend([
        s.original_len as f64,
        s.type_fractions[0],
        s.type_fractions[1],
        s.type_fractions[2],
        s.mean_gap_seconds,
        s.std_gap_seconds,
        s.compressed_len as f64,
        s.compression_ratio,
    ]);
    for d in [crate::aigc_signals::DIM_CURVATURE, crate::aigc_signals::DIM_TOP10] {
        let st = profile.dims[d];
        x.extend([st.mean, st.std, st.max, st.min, st.frac_above]);
    }
    x.push(profile.tweet_count as f64);
    x.push(profile.dims[crate::aigc_signals::DIM_MEAN_LOG_RANK].mean);
    for g in dropped {
        x[g.columns()].iter_mut().for_each(|v| *v = 0.0);
    }
    x
}

/// Per-tweet audit dump: `user_id,tweet_id` and the five score columns.
pub fn score_dump_csv(users: &[UserRaw]) -> String {
    let mut out = format!("user_id,tweet_id,{}\n", SCORE_DIMS.join(","));
    for u in users {
        for (tid, s) in &u.scores {
            let curv = s.curvature.map(|c| format!("{c:.6}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{}\n",
                u.user_id, tid, s.gltr_top10_frac, s.gltr_top100_frac, s.gltr_rest_frac, s.gltr_mean_log_rank, curv
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_cover_the_vector() {
        assert_eq!(behavior_columns().len(), BEHAVIOR_FEATURE_DIM);
        let total: usize = [FeatureGroup::Personal, FeatureGroup::Interaction, FeatureGroup::Tweet].iter().map(|g| g.columns().len()).sum();
        assert_eq!(total, BEHAVIOR_FEATURE_DIM);
    }
}
