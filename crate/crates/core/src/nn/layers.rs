use super::{Parameters, Real, Tensor};
use rand::Rng;

/// Fully connected layer `y = x W^T + b` with `W` stored `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear<F> {
    pub weight: Tensor<F>,
    pub bias: Tensor<F>,
}

impl<F: Real> Linear<F> {
    /// PyTorch-style uniform init, bound `1/sqrt(in)` for weight and bias.
    pub fn new_uniform<R: Rng>(input: usize, output: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (input as f64).sqrt();
        Self {
            weight: Tensor::uniform(&[output, input], bound, rng),
            bias: Tensor::uniform(&[output], bound, rng),
        }
    }

    /// Normal init with zero bias (transformer convention).
    pub fn new_normal<R: Rng>(input: usize, output: usize, std: f64, rng: &mut R) -> Self {
        Self { weight: Tensor::randn(&[output, input], std, rng), bias: Tensor::zeros(&[output]) }
    }

    pub fn zeros(input: usize, output: usize) -> Self {
        Self { weight: Tensor::zeros(&[output, input]), bias: Tensor::zeros(&[output]) }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn output_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    /// Forward over `rows` stacked inputs.
    pub fn forward(&self, x: &[F], rows: usize) -> Vec<F> {
        let (i, o) = (self.input_dim(), self.output_dim());
        debug_assert_eq!(x.len(), rows * i);
        let mut y = Vec::with_capacity(rows * o);
        for _ in 0..rows {
            y.extend_from_slice(self.bias.data());
        }
        F::gemm(rows, i, o, F::one(), x, false, self.weight.data(), true, F::one(), &mut y);
        y
    }

    /// Accumulates parameter gradients into `grad` and returns `dL/dx`.
    pub fn backward(&self, x: &[F], dy: &[F], rows: usize, grad: &mut Linear<F>) -> Vec<F> {
        let (i, o) = (self.input_dim(), self.output_dim());
        // dW += dy^T x
        F::gemm(o, rows, i, F::one(), dy, true, x, false, F::one(), grad.weight.data_mut());
        let db = grad.bias.data_mut();
        for r in 0..rows {
            for (d, &g) in db.iter_mut().zip(&dy[r * o..(r + 1) * o]) {
                *d += g;
            }
        }
        let mut dx = vec![F::zero(); rows * i];
        F::gemm(rows, o, i, F::one(), dy, false, self.weight.data(), false, F::zero(), &mut dx);
        dx
    }

    /// Parameter gradients only, when `dL/dx` is not needed.
    pub fn backward_params(&self, x: &[F], dy: &[F], rows: usize, grad: &mut Linear<F>) {
        let (i, o) = (self.input_dim(), self.output_dim());
        F::gemm(o, rows, i, F::one(), dy, true, x, false, F::one(), grad.weight.data_mut());
        let db = grad.bias.data_mut();
        for r in 0..rows {
            for (d, &g) in db.iter_mut().zip(&dy[r * o..(r + 1) * o]) {
                *d += g;
            }
        }
    }
}

impl<F: Real> Parameters<F> for Linear<F> {
    fn params(&self) -> Vec<(String, &Tensor<F>)> {
        vec![("weight".into(), &self.weight), ("bias".into(), &self.bias)]
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<F>> {
        vec![&mut self.weight, &mut self.bias]
    }
}

/// Row-wise layer normalization with learned scale and shift.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm<F> {
    pub gamma: Tensor<F>,
    pub beta: Tensor<F>,
    pub eps: f64,
}

pub struct LayerNormCache<F> {
    xhat: Vec<F>,
    rstd: Vec<F>,
}

impl<F: Real> LayerNorm<F> {
    pub fn new(dim: usize, eps: f64) -> Self {
        Self { gamma: Tensor::filled(&[dim], F::one()), beta: Tensor::zeros(&[dim]), eps }
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn forward(&self, x: &[F], rows: usize) -> (Vec<F>, LayerNormCache<F>) {
        let d = self.dim();
        let n = F::lit(d as f64);
        let eps = F::lit(self.eps);
        let mut y = vec![F::zero(); rows * d];
        let mut xhat = vec![F::zero(); rows * d];
        let mut rstd = vec![F::zero(); rows];
        let (g, b) = (self.gamma.data(), self.beta.data());
        for r in 0..rows {
            let xr = &x[r * d..(r + 1) * d];
            let mean = xr.iter().copied().sum::<F>() / n;
            let var = xr.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / n;
            let rs = F::one() / (var + eps).sqrt();
            rstd[r] = rs;
            for j in 0..d {
                let h = (xr[j] - mean) * rs;
                xhat[r * d + j] = h;
                y[r * d + j] = h * g[j] + b[j];
            }
        }
        (y, LayerNormCache { xhat, rstd })
    }

    pub fn backward(&self, cache: &LayerNormCache<F>, dy: &[F], rows: usize, grad: &mut LayerNorm<F>) -> Vec<F> {
        let d = self.dim();
        let n = F::lit(d as f64);
        let g = self.gamma.data();
        let mut dx = vec![F::zero(); rows * d];
        for r in 0..rows {
            let dyr = &dy[r * d..(r + 1) * d];
            let xh = &cache.xhat[r * d..(r + 1) * d];
            {
                let gg = grad.gamma.data_mut();
                for j in 0..d {
                    gg[j] += dyr[j] * xh[j];
                }
            }
            {
                let gb = grad.beta.data_mut();
                for j in 0..d {
                    gb[j] += dyr[j];
                }
            }
            let mut sum_dxh = F::zero();
            let mut sum_dxh_xh = F::zero();
            for j in 0..d {
                let dxh = dyr[j] * g[j];
                sum_dxh += dxh;
                sum_dxh_xh += dxh * xh[j];
            }
            let rs = cache.rstd[r];
            for j in 0..d {
                let dxh = dyr[j] * g[j];
                dx[r * d + j] = rs * (dxh - sum_dxh / n - xh[j] * sum_dxh_xh / n);
            }
        }
        dx
    }
}

impl<F: Real> Parameters<F> for LayerNorm<F> {
    fn params(&self) -> Vec<(String, &Tensor<F>)> {
        vec![("gamma".into(), &self.gamma), ("beta".into(), &self.beta)]
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<F>> {
        vec![&mut self.gamma, &mut self.beta]
    }
}

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// GELU, tanh approximation.
pub fn gelu<F: Real>(x: F) -> F {
    let c = F::lit(SQRT_2_OVER_PI);
    let k = F::lit(0.044715);
    let half = F::lit(0.5);
    half * x * (F::one() + (c * (x + k * x * x * x)).tanh())
}

pub fn gelu_grad<F: Real>(x: F) -> F {
    let c = F::lit(SQRT_2_OVER_PI);
    let k = F::lit(0.044715);
    let half = F::lit(0.5);
    let inner = c * (x + k * x * x * x);
    let t = inner.tanh();
    let dinner = c * (F::one() + F::lit(3.0) * k * x * x);
    half * (F::one() + t) + half * x * (F::one() - t * t) * dinner
}

/// Numerically stable softmax over a single row.
pub fn softmax_in_place<F: Real>(row: &mut [F]) {
    let max = row.iter().copied().fold(F::neg_infinity(), F::max);
    let mut sum = F::zero();
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}
