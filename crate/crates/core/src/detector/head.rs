use crate::error::{Error, Result};
use crate::nn::{apply_mask, Linear, Mode, Parameters, Real, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const HIDDEN1: usize = 256;
pub const HIDDEN2: usize = 128;
pub const DEFAULT_HEAD_DROPOUT: f64 = 0.2;

/// `z = [e_seman ; e_behav]`.
pub fn fuse<F: Copy>(e_seman: &[F], e_behav: &[F], d_h: usize, d_m: usize) -> Result<Vec<F>> {
    if e_seman.len() != d_h {
        return Err(Error::Shape { expected: d_h, actual: e_seman.len() });
    }
    if e_behav.len() != d_m {
        return Err(Error::Shape { expected: d_m, actual: e_behav.len() });
    }
    Ok(e_seman.iter().chain(e_behav).copied().collect())
}

/// Two ReLU + dropout hidden layers (256, 128) and a 2-way output.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionHead<F> {
    pub l1: Linear<F>,
    pub l2: Linear<F>,
    pub out: Linear<F>,
    pub dropout: f64,
}

pub struct HeadCache<F> {
    z: Vec<F>,
    h1_pre: Vec<F>,
    h1: Vec<F>,
    m1: Option<Vec<F>>,
    h2_pre: Vec<F>,
    h2: Vec<F>,
    m2: Option<Vec<F>>,
}

fn relu_dropout<F: Real>(pre: &[F], p: f64, mode: &mut Mode<'_>) -> (Vec<F>, Option<Vec<F>>) {
    let mut h: Vec<F> = pre.iter().map(|&v| v.max(F::zero())).collect();
    let m = mode.dropout_mask(h.len(), p);
    apply_mask(&mut h, &m);
    (h, m)
}

fn relu_dropout_back<F: Real>(d: &mut [F], pre: &[F], m: &Option<Vec<F>>) {
    apply_mask(d, m);
    d.iter_mut().zip(pre).for_each(|(g, &p)| {
        if p <= F::zero() {
            *g = F::zero();
        }
    });
}

impl<F: Real> DetectionHead<F> {
    pub fn new(d: usize, dropout: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            l1: Linear::new_uniform(d, HIDDEN1, &mut rng),
            l2: Linear::new_uniform(HIDDEN1, HIDDEN2, &mut rng),
            out: Linear::new_uniform(HIDDEN2, 2, &mut rng),
            dropout,
        }
    }

    pub fn zeros(d: usize, dropout: f64) -> Self {
        Self { l1: Linear::zeros(d, HIDDEN1), l2: Linear::zeros(HIDDEN1, HIDDEN2), out: Linear::zeros(HIDDEN2, 2), dropout }
    }

    pub fn input_dim(&self) -> usize {
        self.l1.input_dim()
    }

    /// Logits `o` for one fused vector.
    pub fn forward(&self, z: &[F], mode: &mut Mode<'_>) -> ([F; 2], HeadCache<F>) {
        let h1_pre = self.l1.forward(z, 1);
        let (h1, m1) = relu_dropout(&h1_pre, self.dropout, mode);
        let h2_pre = self.l2.forward(&h1, 1);
        let (h2, m2) = relu_dropout(&h2_pre, self.dropout, mode);
        let o = self.out.forward(&h2, 1);
        ([o[0], o[1]], HeadCache { z: z.to_vec(), h1_pre, h1, m1, h2_pre, h2, m2 })
    }

    /// Accumulates parameter gradients and returns `dL/dz`.
    pub fn backward(&self, cache: &HeadCache<F>, d_logits: [F; 2], grad: &mut Self) -> Vec<F> {
        let mut d_h2 = self.out.backward(&cache.h2, &d_logits, 1, &mut grad.out);
        relu_dropout_back(&mut d_h2, &cache.h2_pre, &cache.m2);
        let mut d_h1 = self.l2.backward(&cache.h1, &d_h2, 1, &mut grad.l2);
        relu_dropout_back(&mut d_h1, &cache.h1_pre, &cache.m1);
        self.l1.backward(&cache.z, &d_h1, 1, &mut grad.l1)
    }

    pub fn cast<G: Real>(&self) -> DetectionHead<G> {
        let c = |l: &Linear<F>| Linear { weight: l.weight.cast(), bias: l.bias.cast() };
        DetectionHead { l1: c(&self.l1), l2: c(&self.l2), out: c(&self.out), dropout: self.dropout }
    }
}

impl<F: Real> Parameters<F> for DetectionHead<F> {
    fn params(&self) -> Vec<(String, &Tensor<F>)> {
        let mut out = Vec::new();
        for (name, layer) in [("l1", &self.l1), ("l2", &self.l2), ("out", &self.out)] {
            out.extend(layer.params().into_iter().map(|(p, t)| (format!("{name}.{p}"), t)));
        }
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<F>> {
        let mut out = self.l1.params_mut();
        out.extend(self.l2.params_mut());
        out.extend(self.out.params_mut());
        out
    }
}

/// Numerically stable two-class softmax.
pub fn softmax2(o: [f64; 2]) -> [f64; 2] {
    let m = o[0].max(o[1]);
    let (a, b) = ((o[0] - m).exp(), (o[1] - m).exp());
    let s = a + b;
    [a / s, b / s]
}

/// Logits and posterior probabilities for one fused vector.
pub fn head_forward<F: Real>(z: &[F], head: &DetectionHead<F>, mode: &mut Mode<'_>) -> ([f64; 2], [f64; 2]) {
    let (o, _) = head.forward(z, mode);
    let o = [o[0].to_f64_lossy(), o[1].to_f64_lossy()];
    (o, softmax2(o))
}
