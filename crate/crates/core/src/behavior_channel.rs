//! Standardization of X_behav and the one-layer ReLU/dropout encoder.

use crate::corpus::Train;
use crate::error::{Error, Result};
use crate::nn::{apply_mask, Linear, Mode, Parameters, Real, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_BEHAVIOR_DIM: usize = 128;
pub const DEFAULT_BEHAVIOR_DROPOUT: f64 = 0.2;

/// Per-column training mean and population std; zero-variance columns get
/// σ = 1 so they pass through centred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_scaler(train_rows: &Train<Vec<Vec<f64>>>) -> Result<Scaler> {
    let rows = train_rows.get();
    if rows.len() < 2 {
        return Err(Error::Fit(format!("scaler needs at least 2 training rows, got {}", rows.len())));
    }
    let d = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::Shape { expected: d, actual: bad.len() });
    }
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for r in rows {
        var.iter_mut().zip(r.iter().zip(&mean)).for_each(|(s, (v, m))| *s += (v - m) * (v - m));
    }
    let std = var.into_iter().map(|s| (s / n).sqrt()).map(|s| if s > 0.0 && s.is_finite() { s } else { 1.0 }).collect();
    Ok(Scaler { mean, std })
}

impl Scaler {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), actual: x.len() });
        }
        Ok(x.iter().zip(self.mean.iter().zip(&self.std)).map(|(v, (m, s))| (v - m) / s).collect())
    }
}

/// `Dropout(ReLU(W x + b))` with inverted dropout.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorEncoder<F> {
    pub layer: Linear<F>,
    pub dropout: f64,
}

pub struct BehaviorCache<F> {
    input: Vec<F>,
    pre: Vec<F>,
    mask: Option<Vec<F>>,
}

impl<F: Real> BehaviorEncoder<F> {
    pub fn new(d_b: usize, d_m: usize, dropout: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self { layer: Linear::new_uniform(d_b, d_m, &mut rng), dropout }
    }

    pub fn input_dim(&self) -> usize {
        self.layer.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layer.output_dim()
    }

    /// Encodes `rows` standardized vectors laid out row-major.
    pub fn forward(&self, x: &[F], rows: usize, mode: &mut Mode<'_>) -> (Vec<F>, BehaviorCache<F>) {
        let pre = self.layer.forward(x, rows);
        let mut out: Vec<F> = pre.iter().map(|&v| v.max(F::zero())).collect();
        let mask = mode.dropout_mask(out.len(), self.dropout);
        apply_mask(&mut out, &mask);
        (out, BehaviorCache { input: x.to_vec(), pre, mask })
    }

    pub fn backward(&self, cache: &BehaviorCache<F>, d_out: &[F], grad: &mut Self) {
        let rows = cache.input.len() / self.input_dim();
        let mut d_pre: Vec<F> = d_out.to_vec();
        apply_mask(&mut d_pre, &cache.mask);
        d_pre.iter_mut().zip(&cache.pre).for_each(|(g, &p)| {
            if p <= F::zero() {
                *g = F::zero();
            }
        });
        self.layer.backward_params(&cache.input, &d_pre, rows, &mut grad.layer);
    }

    pub fn cast<G: Real>(&self) -> BehaviorEncoder<G> {
        BehaviorEncoder { layer: Linear { weight: self.layer.weight.cast(), bias: self.layer.bias.cast() }, dropout: self.dropout }
    }
}

impl<F: Real> Parameters<F> for BehaviorEncoder<F> {
    fn params(&self) -> Vec<(String, &Tensor<F>)> {
        self.layer.params()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<F>> {
        self.layer.params_mut()
    }
}

/// Standardizes a raw X_behav vector and encodes it.
pub fn encode_behavior<F: Real>(
    x_behav: &[f64],
    scaler: &Scaler,
    encoder: &BehaviorEncoder<F>,
    mode: &mut Mode<'_>,
) -> Result<Vec<F>> {
    if x_behav.len() != encoder.input_dim() {
        return Err(Error::Shape { expected: encoder.input_dim(), actual: x_behav.len() });
    }
    let x: Vec<F> = scaler.transform(x_behav)?.into_iter().map(F::lit).collect();
    Ok(encoder.forward(&x, 1, mode).0)
}
