#![allow(dead_code)]

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tracebot::aigc_signals::{log_softmax, LanguageModelScorer};
use tracebot::nn::{Parameters, Tensor};

/// Worst per-tensor relative error `|a - n| / max(|a|, |n|)` between the
/// analytic gradient and central differences, over up to `per_tensor`
/// sampled coordinates of each tensor. Tensors whose sampled gradients are
/// all below `floor` in magnitude are compared in absolute terms.
pub fn grad_check<M, L>(model: &M, analytic: &M, per_tensor: usize, h: f64, mut loss: L) -> Vec<(String, f64)>
where
    M: Parameters<f64> + Clone,
    L: FnMut(&M) -> f64,
{
    let floor = 1e-7;
    let names: Vec<String> = model.params().into_iter().map(|(n, _)| n).collect();
    let grads: Vec<Tensor<f64>> = analytic.params().into_iter().map(|(_, t)| t.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut out = Vec::new();
    let mut probe = model.clone();
    for (ti, name) in names.iter().enumerate() {
        let len = grads[ti].len();
        let idx = sample(&mut rng, len, per_tensor.min(len)).into_vec();
        let (mut diff, mut norm_a, mut norm_n) = (0.0f64, 0.0f64, 0.0f64);
        for &i in &idx {
            let orig = probe.params()[ti].1.data()[i];
            probe.params_mut()[ti].data_mut()[i] = orig + h;
            let up = loss(&probe);
            probe.params_mut()[ti].data_mut()[i] = orig - h;
            let down = loss(&probe);
            probe.params_mut()[ti].data_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = grads[ti].data()[i];
            diff += (a - numeric).powi(2);
            norm_a += a * a;
            norm_n += numeric * numeric;
        }
        let scale = norm_a.sqrt().max(norm_n.sqrt());
        let rel = if scale < floor { diff.sqrt() } else { diff.sqrt() / scale };
        out.push((name.clone(), rel));
    }
    out
}

pub fn worst(errors: &[(String, f64)]) -> (String, f64) {
    errors.iter().cloned().fold((String::new(), 0.0), |acc, e| if e.1 > acc.1 { e } else { acc })
}

/// Seeded scorer whose conditional distribution is a pseudo-random function
/// of the prefix, so it is causal by construction.
pub struct RandomScorer {
    pub v: usize,
    pub seed: u64,
    pub scale: f64,
}

impl LanguageModelScorer for RandomScorer {
    fn vocab_size(&self) -> usize {
        self.v
    }
    fn max_context(&self) -> usize {
        64
    }
    fn encode(&self, text: &str) -> Vec<u32> {
        text.bytes().map(|b| u32::from(b) % self.v as u32).collect()
    }
    fn logprobs(&self, tokens: &[u32]) -> Vec<Vec<f64>> {
        let normal = Normal::new(0.0, self.scale).unwrap();
        (0..tokens.len())
            .map(|t| {
                let mut h: u64 = 0xcbf29ce484222325 ^ self.seed;
                for &x in &tokens[..t] {
                    h = (h ^ u64::from(x)).wrapping_mul(0x100000001b3);
                }
                let mut r = ChaCha8Rng::seed_from_u64(h);
                let mut row: Vec<f64> = (0..self.v).map(|_| normal.sample(&mut r)).collect();
                log_softmax(&mut row);
                row
            })
            .collect()
    }
}

/// Inverse-CDF draw from a log-probability row.
pub fn sample_row(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, lp) in row.iter().enumerate() {
        acc += lp.exp();
        if u < acc {
            return i;
        }
    }
    row.len() - 1
}
