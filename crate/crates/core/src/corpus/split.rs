use super::Label;
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.6, validation: 0.2, test: 0.2 }
    }
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Self {
        Self { train, validation, test }
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Config(format!("split ratios must be non-negative, got {parts:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios must sum to 1, got {sum}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
    pub ratios: SplitRatios,
}

/// Data derived from the training partition only. Fitting APIs (scaler,
/// thresholds, class weights) accept nothing else; the only public way to
/// obtain one is [`DatasetSplit::train_handle`].
#[derive(Debug, Clone, PartialEq)]
pub struct Train<T>(T);

impl<T> Train<T> {
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) fn new(inner: T) -> Self {
        Self(inner)
    }

    pub fn get(&self) -> &T {
        &self.0
    }

    pub fn into_inner(self) -> T {
        self.0
    }

    /// Derives further training-side data from the held ids.
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Train<U> {
        Train(f(self.0))
    }
}

impl DatasetSplit {
    pub fn train_handle(&self) -> Train<Vec<String>> {
        Train(self.train.clone())
    }

    /// Replaces the train and validation ids (for undersampling or
    /// subsampling); the test partition cannot be changed this way.
    pub fn with_train_validation(&self, train: Vec<String>, validation: Vec<String>) -> Self {
        Self { train, validation, ..self.clone() }
    }
}

fn floor_share(n: usize, ratio: f64) -> usize {
    // Guards against 0.29 * 100 = 28.999999999999996.
    ((n as f64) * ratio + 1e-9).floor() as usize
}

/// Seeded shuffle, then floor allocation for validation and test with the
/// remainder going to train.
pub fn split_dataset(user_ids: &[String], ratios: SplitRatios, seed: u64) -> Result<DatasetSplit> {
    ratios.validate()?;
    if user_ids.is_empty() {
        return Err(Error::Config("cannot split an empty id set".into()));
    }
    let mut ids = user_ids.to_vec();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = ids.len();
    let n_val = floor_share(n, ratios.validation);
    let n_test = floor_share(n, ratios.test);
    let n_train = n - n_val - n_test;
    let test = ids.split_off(n_train + n_val);
    let validation = ids.split_off(n_train);
    Ok(DatasetSplit { train: ids, validation, test, seed, ratios })
}

/// Randomly drops majority-class ids (without replacement) down to the
/// minority count. Minority ids and the relative order of kept ids are
/// preserved.
pub fn undersample_majority(ids: &[String], labels: &HashMap<String, Label>, seed: u64) -> Result<Vec<String>> {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, id) in ids.iter().enumerate() {
        let class = labels
            .get(id)
            .and_then(|l| l.class())
            .ok_or_else(|| Error::Data(format!("user {id:?} is not labelled human or bot")))?;
        by_class[class].push(i);
    }
    let (humans, bots) = (by_class[0].len(), by_class[1].len());
    if humans == 0 || bots == 0 {
        return Err(Error::Imbalance(format!("cannot undersample with {humans} humans and {bots} bots")));
    }
    if humans == bots {
        return Ok(ids.to_vec());
    }
    let (minority, majority) = if humans < bots { (0, 1) } else { (1, 0) };
    let target = by_class[minority].len();
    let mut chosen = by_class[majority].clone();
    chosen.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    chosen.truncate(target);
    let keep: HashSet<usize> = chosen.into_iter().chain(by_class[minority].iter().copied()).collect();
    Ok(ids.iter().enumerate().filter(|(i, _)| keep.contains(i)).map(|(_, id)| id.clone()).collect())
}

/// Seeded resampling (without replacement) to `bots : humans` parts, using
/// as many users as the available counts allow. At 1:1 this coincides with
/// [`undersample_majority`].
pub fn resample_to_ratio(ids: &[String], labels: &HashMap<String, Label>, bots: usize, humans: usize, seed: u64) -> Result<Vec<String>> {
    if bots == 0 || humans == 0 {
        return Err(Error::Config(format!("ratio {bots}:{humans} must have positive parts")));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, id) in ids.iter().enumerate() {
        let class = labels
            .get(id)
            .and_then(|l| l.class())
            .ok_or_else(|| Error::Data(format!("user {id:?} is not labelled human or bot")))?;
        by_class[class].push(i);
    }
    let k = (by_class[1].len() / bots).min(by_class[0].len() / humans);
    if k == 0 {
        return Err(Error::Config(format!(
            "bot:human ratio {bots}:{humans} is infeasible with {} bots and {} humans",
            by_class[1].len(),
            by_class[0].len()
        )));
    }
    let targets = [humans * k, bots * k];
    let mut keep = HashSet::new();
    for (class, members) in by_class.iter().enumerate() {
        let mut chosen = members.clone();
        if chosen.len() > targets[class] {
            chosen.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            chosen.truncate(targets[class]);
        }
        keep.extend(chosen);
    }
    Ok(ids.iter().enumerate().filter(|(i, _)| keep.contains(i)).map(|(_, id)| id.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("u{i}")).collect()
    }

    #[test]
    fn ten_ids_sixty_twenty_twenty() {
        let s = split_dataset(&ids(10), SplitRatios::default(), 7).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (6, 2, 2));
        let again = split_dataset(&ids(10), SplitRatios::default(), 7).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn bad_ratios_are_config_errors() {
        let err = split_dataset(&ids(10), SplitRatios::new(0.5, 0.5, 0.5), 1).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(matches!(split_dataset(&[], SplitRatios::default(), 1), Err(Error::Config(_))));
    }

    fn labelled(humans: usize, bots: usize) -> (Vec<String>, HashMap<String, Label>) {
        let all = ids(humans + bots);
        let labels = all
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), if i < humans { Label::Human } else { Label::Bot }))
            .collect();
        (all, labels)
    }

    #[test]
    fn botsim_like_imbalance_is_balanced() {
        let (all, labels) = labelled(1000, 1906);
        let kept = undersample_majority(&all, &labels, 3).unwrap();
        let bots = kept.iter().filter(|id| labels[*id] == Label::Bot).count();
        assert_eq!(kept.len(), 2000);
        assert_eq!(bots, 1000);
        // every human survives
        assert!(all[..1000].iter().all(|h| kept.contains(h)));
    }

    #[test]
    fn balanced_input_unchanged_and_empty_class_rejected() {
        let (all, labels) = labelled(50, 50);
        assert_eq!(undersample_majority(&all, &labels, 1).unwrap(), all);
        let (all, labels) = labelled(10, 0);
        assert!(matches!(undersample_majority(&all, &labels, 1), Err(Error::Imbalance(_))));
    }

    proptest! {
        #[test]
        fn split_partitions_ids(n in 1usize..300, a in 0.0f64..1.0, b in 0.0f64..1.0, seed in any::<u64>()) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let ratios = SplitRatios::new(lo, hi - lo, 1.0 - hi);
            let all = ids(n);
            let s = split_dataset(&all, ratios, seed).unwrap();
            let mut union: Vec<String> = s.train.iter().chain(&s.validation).chain(&s.test).cloned().collect();
            prop_assert_eq!(union.len(), n);
            union.sort();
            let mut expected = all.clone();
            expected.sort();
            prop_assert_eq!(union, expected);
        }

        #[test]
        fn undersampling_keeps_minority(h in 1usize..60, b in 1usize..60, seed in any::<u64>()) {
            let (all, labels) = labelled(h, b);
            let kept = undersample_majority(&all, &labels, seed).unwrap();
            let minority = if h <= b { Label::Human } else { Label::Bot };
            let before: Vec<&String> = all.iter().filter(|id| labels[*id] == minority).collect();
            let after: Vec<&String> = kept.iter().filter(|id| labels[*id] == minority).collect();
            prop_assert_eq!(before, after);
            prop_assert_eq!(kept.len(), 2 * h.min(b));
        }
    }
}
