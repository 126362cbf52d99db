//! Minimal dense-tensor toolkit with hand-written backward passes.
//!
//! Everything is generic over [`Real`] so the same layers run in `f32` for
//! training and in `f64` for finite-difference gradient checks.

mod adam;
pub mod archive;
mod layers;
mod parallel;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use layers::{gelu, gelu_grad, softmax_in_place, LayerNorm, LayerNormCache, Linear};
pub use parallel::{chunked_grads, configure_threads, GRAD_CHUNKS};
pub use tensor::Tensor;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point element type for every tensor in the crate.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
{
    /// `c = alpha * op(a) * op(b) + beta * c` on row-major storage.
    ///
    /// `op(a)` is `m x k`; when `trans_a` is set, `a` is stored as `k x m`.
    /// Likewise `op(b)` is `k x n`, stored `n x k` when `trans_b` is set.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: &[Self],
        trans_a: bool,
        b: &[Self],
        trans_b: bool,
        beta: Self,
        c: &mut [Self],
    );

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

fn strides(rows: usize, cols: usize, trans: bool) -> (isize, isize) {
    // Logical (rows x cols); storage is (cols x rows) when transposed.
    if trans {
        (1, rows as isize)
    } else {
        (cols as isize, 1)
    }
}

macro_rules! impl_real {
    ($t:ty, $gemm:path) => {
        impl Real for $t {
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                alpha: Self,
                a: &[Self],
                trans_a: bool,
                b: &[Self],
                trans_b: bool,
                beta: Self,
                c: &mut [Self],
            ) {
                assert!(a.len() >= m * k, "gemm: lhs too short");
                assert!(b.len() >= k * n, "gemm: rhs too short");
                assert!(c.len() >= m * n, "gemm: output too short");
                if m == 0 || n == 0 {
                    return;
                }
                let (rsa, csa) = strides(m, k, trans_a);
                let (rsb, csb) = strides(k, n, trans_b);
                // SAFETY: bounds are checked above and strides describe the
                // row-major layouts of the given slices.
                unsafe {
                    $gemm(
                        m,
                        k,
                        n,
                        alpha,
                        a.as_ptr(),
                        rsa,
                        csa,
                        b.as_ptr(),
                        rsb,
                        csb,
                        beta,
                        c.as_mut_ptr(),
                        n as isize,
                        1,
                    );
                }
            }
        }
    };
}

impl_real!(f32, matrixmultiply::sgemm);
impl_real!(f64, matrixmultiply::dgemm);

/// Forward-pass mode. Training mode owns the dropout RNG.
pub enum Mode<'a> {
    Eval,
    Train(&'a mut ChaCha8Rng),
}

impl Mode<'_> {
    pub fn is_train(&self) -> bool {
        matches!(self, Mode::Train(_))
    }

    /// Inverted-dropout mask, `None` when dropout is inactive.
    pub fn dropout_mask<F: Real>(&mut self, len: usize, p: f64) -> Option<Vec<F>> {
        match self {
            Mode::Train(rng) if p > 0.0 => {
                let keep = F::lit(1.0 / (1.0 - p));
                Some(
                    (0..len)
                        .map(|_| if rng.gen::<f64>() < p { F::zero() } else { keep })
                        .collect(),
                )
            }
            _ => None,
        }
    }
}

pub fn apply_mask<F: Real>(x: &mut [F], mask: &Option<Vec<F>>) {
    if let Some(m) = mask {
        x.iter_mut().zip(m).for_each(|(v, &k)| *v *= k);
    }
}

/// Trait for anything holding an ordered list of named parameter tensors.
///
/// The same type doubles as its own gradient accumulator (see
/// [`Parameters::zeros_like`]).
pub trait Parameters<F: Real> {
    fn params(&self) -> Vec<(String, &Tensor<F>)>;
    fn params_mut(&mut self) -> Vec<&mut Tensor<F>>;

    fn zeros_like(&self) -> Self
    where
        Self: Clone,
    {
        let mut z = self.clone();
        z.params_mut().into_iter().for_each(|t| t.fill(F::zero()));
        z
    }

    fn num_params(&self) -> usize {
        self.params().iter().map(|(_, t)| t.len()).sum()
    }

    /// `self += other`, parameter by parameter.
    fn accumulate(&mut self, other: &Self) {
        let src: Vec<&[F]> = other.params().into_iter().map(|(_, t)| t.data()).collect();
        for (dst, s) in self.params_mut().into_iter().zip(src) {
            dst.data_mut().iter_mut().zip(s).for_each(|(d, &v)| *d += v);
        }
    }
}
