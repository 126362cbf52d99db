use crate::corpus::Train;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Lower clamp on the probability inside the log.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub w: [f64; 2],
}

impl ClassWeights {
    pub const EQUAL: ClassWeights = ClassWeights { w: [1.0, 1.0] };
}

/// `w_k = N / (2 N_k)` from per-class counts.
pub fn class_weights_from_counts(counts: [usize; 2]) -> Result<ClassWeights> {
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::Imbalance(format!("class counts {counts:?} leave a class empty")));
    }
    let n = (counts[0] + counts[1]) as f64;
    Ok(ClassWeights { w: [n / (2.0 * counts[0] as f64), n / (2.0 * counts[1] as f64)] })
}

/// Class weights from training labels (0 = human, 1 = bot).
pub fn class_weights(train_labels: &Train<Vec<usize>>) -> Result<ClassWeights> {
    let mut counts = [0usize; 2];
    for &y in train_labels.get() {
        counts[y.min(1)] += 1;
    }
    class_weights_from_counts(counts)
}

/// Batch mean of `-w_y ln max(p_y, 1e-12)`.
pub fn weighted_ce_loss(probs: &[[f64; 2]], labels: &[usize], weights: ClassWeights) -> f64 {
    let total: f64 = probs.iter().zip(labels).map(|(p, &y)| -weights.w[y] * p[y].max(PROB_FLOOR).ln()).sum();
    total / probs.len().max(1) as f64
}

/// Per-sample loss from logits via log-sum-exp, with its logit gradient.
pub fn weighted_ce_from_logits(o: [f64; 2], y: usize, weights: ClassWeights) -> (f64, [f64; 2]) {
    let m = o[0].max(o[1]);
    let lse = m + ((o[0] - m).exp() + (o[1] - m).exp()).ln();
    let log_p = o[y] - lse;
    let floor = PROB_FLOOR.ln();
    let w = weights.w[y];
    if log_p < floor {
        return (-w * floor, [0.0, 0.0]);
    }
    let p = [(o[0] - lse).exp(), (o[1] - lse).exp()];
    let mut g = [w * p[0], w * p[1]];
    g[y] -= w;
    (-w * log_p, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_from_counts() {
        assert_eq!(class_weights_from_counts([50, 50]).unwrap().w, [1.0, 1.0]);
        assert_eq!(class_weights_from_counts([100, 25]).unwrap().w, [0.625, 2.5]);
        assert!(matches!(class_weights_from_counts([0, 3]), Err(Error::Imbalance(_))));
    }

    #[test]
    fn symmetric_point_is_ln2() {
        let l = weighted_ce_loss(&[[0.5, 0.5]], &[1], ClassWeights::EQUAL);
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
        let (l2, _) = weighted_ce_from_logits([0.3, 0.3], 1, ClassWeights::EQUAL);
        assert!((l2 - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn clamp_kills_gradient() {
        let (l, g) = weighted_ce_from_logits([100.0, -100.0], 1, ClassWeights::EQUAL);
        assert!((l + PROB_FLOOR.ln()).abs() < 1e-12);
        assert_eq!(g, [0.0, 0.0]);
    }
}
