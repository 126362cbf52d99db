use super::tokenizer::TokenWindow;
use super::transformer::{Transformer, TransformerCache, TransformerConfig};
use crate::error::{Error, Result};
use crate::nn::{Mode, Parameters, Real, Tensor};

/// Pooling epsilon in the masked mean denominator.
pub const POOL_EPS: f64 = 1e-9;

/// Causal transformer followed by attention-masked mean pooling.
#[derive(Debug, Clone, PartialEq)]
pub struct TextEncoder<F> {
    pub transformer: Transformer<F>,
    pub eps: f64,
}

pub struct EncodeCache<F> {
    inner: Option<TransformerCache<F>>,
    weights: Vec<F>,
    denom: F,
}

impl<F: Real> TextEncoder<F> {
    pub fn new(config: TransformerConfig, seed: u64) -> Self {
        Self { transformer: Transformer::new(config, seed), eps: POOL_EPS }
    }

    pub fn from_transformer(transformer: Transformer<F>) -> Self {
        Self { transformer, eps: POOL_EPS }
    }

    pub fn dim(&self) -> usize {
        self.transformer.d_model()
    }

    pub fn max_len(&self) -> usize {
        self.transformer.config.max_len
    }

    /// `e = sum_t m_t H_t / (sum_t m_t + eps)`.
    ///
    /// Hidden states are only materialized up to the last unmasked
    /// position: with causal attention later positions cannot influence
    /// earlier ones, and masked positions contribute nothing to the sum.
    pub fn encode(&self, window: &TokenWindow, mode: &mut Mode<'_>) -> Result<(Vec<F>, EncodeCache<F>)> {
        if window.ids.len() != window.mask.len() || window.ids.len() > self.max_len() {
            return Err(Error::Shape { expected: self.max_len(), actual: window.ids.len() });
        }
        let d = self.dim();
        let total: usize = window.mask.iter().map(|&m| usize::from(m)).sum();
        let denom = F::lit(total as f64 + self.eps);
        let Some(last) = window.mask.iter().rposition(|&m| m == 1) else {
            return Ok((vec![F::zero(); d], EncodeCache { inner: None, weights: Vec::new(), denom }));
        };
        let ids = &window.ids[..=last];
        let (h, cache) = self.transformer.forward(ids, mode);
        let weights: Vec<F> = window.mask[..=last].iter().map(|&m| F::lit(f64::from(m))).collect();
        let mut e = vec![F::zero(); d];
        for (t, &w) in weights.iter().enumerate() {
            if w != F::zero() {
                e.iter_mut().zip(&h[t * d..(t + 1) * d]).for_each(|(a, &b)| *a += b);
            }
        }
        e.iter_mut().for_each(|v| *v /= denom);
        Ok((e, EncodeCache { inner: Some(cache), weights, denom }))
    }

    pub fn backward(&self, cache: &EncodeCache<F>, d_e: &[F], grad: &mut TextEncoder<F>) {
        let Some(inner) = &cache.inner else { return };
        let d = self.dim();
        let mut dh = vec![F::zero(); cache.weights.len() * d];
        for (t, &w) in cache.weights.iter().enumerate() {
            let s = w / cache.denom;
            dh[t * d..(t + 1) * d].iter_mut().zip(d_e).for_each(|(a, &g)| *a = g * s);
        }
        self.transformer.backward(inner, &dh, &mut grad.transformer);
    }
}

impl<F: Real> Parameters<F> for TextEncoder<F> {
    fn params(&self) -> Vec<(String, &Tensor<F>)> {
        self.transformer.params()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<F>> {
        self.transformer.params_mut()
    }
}

/// Free-function form of [`TextEncoder::encode`] in evaluation mode.
pub fn encode_text<F: Real>(window: &TokenWindow, model: &TextEncoder<F>) -> Result<Vec<F>> {
    model.encode(window, &mut Mode::Eval).map(|(e, _)| e)
}

/// Masked mean of raw (non-contextual) token embeddings; the text input of
/// channel-ablation variants.
pub fn raw_embedding_mean<F: Real>(table: &Tensor<F>, window: &TokenWindow, eps: f64) -> Vec<F> {
    let d = table.shape()[1];
    let mut e = vec![F::zero(); d];
    let mut n = 0usize;
    for (&id, &m) in window.ids.iter().zip(&window.mask) {
        if m == 1 {
            n += 1;
            e.iter_mut().zip(table.row(id as usize)).for_each(|(a, &b)| *a += b);
        }
    }
    let denom = F::lit(n as f64 + eps);
    e.iter_mut().for_each(|v| *v /= denom);
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> TextEncoder<f64> {
        TextEncoder::new(
            TransformerConfig { vocab_size: 30, max_len: 16, d_model: 8, n_layers: 2, n_heads: 2, ffn_mult: 4, dropout: 0.1 },
            11,
        )
    }

    fn window(ids: &[u32], real: usize) -> TokenWindow {
        let mut mask = vec![1u8; real];
        mask.resize(ids.len(), 0);
        TokenWindow { ids: ids.to_vec(), mask }
    }

    #[test]
    fn full_mask_is_scaled_plain_mean() {
        let m = model();
        let ids: Vec<u32> = (0..16).map(|i| (i * 7 % 30) as u32).collect();
        let e = encode_text(&window(&ids, 16), &m).unwrap();
        let (h, _) = m.transformer.forward(&ids, &mut Mode::Eval);
        for j in 0..8 {
            let mean: f64 = (0..16).map(|t| h[t * 8 + j]).sum::<f64>() / 16.0;
            let expected = mean * 16.0 / (16.0 + POOL_EPS);
            assert!((e[j] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn trailing_pads_do_not_matter() {
        let m = model();
        let mut ids: Vec<u32> = vec![3, 9, 14, 2, 29, 29, 29, 29, 29, 29, 29, 29, 29, 29, 29, 29];
        let a = encode_text(&window(&ids, 4), &m).unwrap();
        for (i, v) in ids.iter_mut().enumerate().skip(4) {
            *v = (i * 5 % 30) as u32;
        }
        let b = encode_text(&window(&ids, 4), &m).unwrap();
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn empty_mask_gives_zero_vector() {
        let m = model();
        let e = encode_text(&window(&[29; 16], 0), &m).unwrap();
        assert!(e.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn masked_average_matches_direct_computation() {
        let m = model();
        let ids: Vec<u32> = vec![5, 6, 7, 8, 9, 10, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0];
        let e = encode_text(&window(&ids, 6), &m).unwrap();
        let (h, _) = m.transformer.forward(&ids[..6], &mut Mode::Eval);
        for j in 0..8 {
            let direct: f64 = (0..6).map(|t| h[t * 8 + j]).sum::<f64>() / (6.0 + POOL_EPS);
            assert!((e[j] - direct).abs() < 1e-6);
        }
    }

    #[test]
    fn wrong_window_length_is_shape_error() {
        let m = model();
        assert!(matches!(m.encode(&window(&[1; 20], 3), &mut Mode::Eval), Err(Error::Shape { .. })));
    }
}
