use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Confusion counts with bot as the positive class, and derived scores.
/// A zero denominator yields 0 and sets the matching `*_undefined` flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub acc: f64,
    pub pre: f64,
    pub rec: f64,
    pub f1: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let (pre, precision_undefined) = ratio(tp, tp + fp);
        let (rec, recall_undefined) = ratio(tp, tp + fn_);
        let (acc, _) = ratio(tp + tn, tp + fp + fn_ + tn);
        let f1_undefined = pre + rec == 0.0;
        let f1 = if f1_undefined { 0.0 } else { 2.0 * pre * rec / (pre + rec) };
        Self { tp, fp, fn_, tn, acc, pre, rec, f1, precision_undefined, recall_undefined, f1_undefined }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Metrics from class predictions and labels (1 = bot).
pub fn compute_metrics(predictions: &[usize], labels: &[usize]) -> Result<Metrics> {
    if predictions.is_empty() {
        return Err(Error::Evaluation("empty dataset".into()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::Shape { expected: labels.len(), actual: predictions.len() });
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &y) in predictions.iter().zip(labels) {
        match (p == 1, y == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(Metrics::from_counts(tp, fp, fn_, tn))
}

/// Argmax with ties going to human (class 0).
pub fn predict_class(probs: [f64; 2]) -> (usize, f64) {
    if probs[1] > probs[0] {
        (1, probs[1])
    } else {
        (0, probs[0])
    }
}
