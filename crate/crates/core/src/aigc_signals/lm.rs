//! Causal language model with an output head tied to the token embeddings.

use crate::nn::{softmax_in_place, Mode, Parameters, Real, Tensor};
use crate::text_channel::{KvCache, Transformer, TransformerConfig};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageModel<F> {
    pub transformer: Transformer<F>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub temperature: f64,
    /// Restrict to the `top_k` most probable tokens; 0 disables the cut.
    pub top_k: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { temperature: 1.0, top_k: 0 }
    }
}

impl<F: Real> LanguageModel<F> {
    pub fn new(config: TransformerConfig, seed: u64) -> Self {
        Self { transformer: Transformer::new(config, seed) }
    }

    pub fn vocab_size(&self) -> usize {
        self.transformer.config.vocab_size
    }

    pub fn max_len(&self) -> usize {
        self.transformer.config.max_len
    }

    /// `(T, V)` logits for hidden states `(T, d)`.
    pub fn head(&self, hidden: &[F], t: usize) -> Vec<F> {
        let (v, d) = (self.vocab_size(), self.transformer.d_model());
        let mut logits = vec![F::zero(); t * v];
        F::gemm(t, d, v, F::one(), hidden, false, self.transformer.tok_emb.data(), true, F::zero(), &mut logits);
        logits
    }

    pub fn logits(&self, ids: &[u32]) -> Vec<F> {
        let (h, _) = self.transformer.forward(ids, &mut Mode::Eval);
        self.head(&h, ids.len())
    }

    /// Summed next-token cross-entropy of `targets` given `inputs`, with
    /// parameter gradients accumulated into `grad`.
    pub fn loss_and_grad(&self, inputs: &[u32], targets: &[u32], mode: &mut Mode<'_>, grad: &mut Self) -> f64 {
        let t = inputs.len();
        let (v, d) = (self.vocab_size(), self.transformer.d_model());
        let (h, cache) = self.transformer.forward(inputs, mode);
        let mut dlogits = self.head(&h, t);
        let mut loss = 0.0;
        for (row, &y) in dlogits.chunks_exact_mut(v).zip(targets) {
            softmax_in_place(row);
            loss -= row[y as usize].to_f64_lossy().max(1e-30).ln();
            row[y as usize] -= F::one();
        }
        let mut dh = vec![F::zero(); t * d];
        F::gemm(t, v, d, F::one(), &dlogits, false, self.transformer.tok_emb.data(), false, F::zero(), &mut dh);
        F::gemm(v, t, d, F::one(), &dlogits, true, &h, false, F::one(), grad.transformer.tok_emb.data_mut());
        self.transformer.backward(&cache, &dh, &mut grad.transformer);
        loss
    }

    /// Next-token logits after feeding `id` through the incremental cache.
    pub fn step(&self, id: u32, cache: &mut KvCache<F>) -> Vec<F> {
        let h = self.transformer.step(id, cache);
        self.head(&h, 1)
    }

    /// Samples up to `max_tokens` after a `bos` token, stopping early at `stop`.
    pub fn sample<R: Rng>(&self, bos: u32, stop: u32, max_tokens: usize, sampling: Sampling, rng: &mut R) -> Vec<u32> {
        let mut cache = self.transformer.kv_cache();
        let mut out = Vec::new();
        let mut last = bos;
        let budget = max_tokens.min(self.max_len());
        while out.len() < budget {
            let logits = self.step(last, &mut cache);
            let next = sample_logits(&logits, sampling, rng);
            if next == stop {
                break;
            }
            out.push(next);
            last = next;
        }
        out
    }
}

fn sample_logits<F: Real, R: Rng>(logits: &[F], s: Sampling, rng: &mut R) -> u32 {
    let mut order: Vec<usize> = (0..logits.len()).collect();
    if s.top_k > 0 && s.top_k < logits.len() {
        order.sort_by(|&a, &b| logits[b].partial_cmp(&logits[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        order.truncate(s.top_k);
    }
    let temp = s.temperature.max(1e-6);
    let max = order.iter().map(|&i| logits[i].to_f64_lossy()).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = order.iter().map(|&i| ((logits[i].to_f64_lossy() - max) / temp).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (&i, &w) in order.iter().zip(&weights) {
        if u < w {
            return i as u32;
        }
        u -= w;
    }
    *order.last().expect("non-empty vocabulary") as u32
}

impl<F: Real> Parameters<F> for LanguageModel<F> {
    fn params(&self) -> Vec<(String, &Tensor<F>)> {
        self.transformer.params()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<F>> {
        self.transformer.params_mut()
    }
}
