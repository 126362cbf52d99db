use super::{Real, Tensor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Adam state for one parameter group.
#[derive(Debug, Clone)]
pub struct Adam<F> {
    config: AdamConfig,
    step: u64,
    m: Vec<Vec<F>>,
    v: Vec<Vec<F>>,
}

impl<F: Real> Adam<F> {
    pub fn new(config: AdamConfig, params: &[&mut Tensor<F>]) -> Self {
        Self {
            config,
            step: 0,
            m: params.iter().map(|p| vec![F::zero(); p.len()]).collect(),
            v: params.iter().map(|p| vec![F::zero(); p.len()]).collect(),
        }
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.config.lr = lr;
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// One bias-corrected update. `params` and `grads` must come from the
    /// same `Parameters` ordering used at construction.
    pub fn step(&mut self, params: Vec<&mut Tensor<F>>, grads: Vec<&Tensor<F>>) {
        assert_eq!(params.len(), self.m.len(), "parameter group changed shape");
        self.step += 1;
        let c = self.config;
        let t = self.step as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        let (b1, b2) = (F::lit(c.beta1), F::lit(c.beta2));
        let (one_b1, one_b2) = (F::lit(1.0 - c.beta1), F::lit(1.0 - c.beta2));
        let step_size = F::lit(c.lr / bc1);
        let inv_bc2_sqrt = F::lit(1.0 / bc2.sqrt());
        let eps = F::lit(c.eps);
        for (i, (p, g)) in params.into_iter().zip(grads).enumerate() {
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            for (((w, &gi), mi), vi) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = b1 * *mi + one_b1 * gi;
                *vi = b2 * *vi + one_b2 * gi * gi;
                *w -= step_size * *mi / ((*vi).sqrt() * inv_bc2_sqrt + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr_against_gradient_sign() {
        let mut p = Tensor::<f64>::from_vec(&[3], vec![1.0, -1.0, 0.5]);
        let g = Tensor::<f64>::from_vec(&[3], vec![2.0, -0.1, 0.0]);
        let mut opt = Adam::new(AdamConfig::with_lr(0.01), &[&mut p]);
        opt.step(vec![&mut p], vec![&g]);
        let d = p.data();
        assert!((d[0] - 0.99).abs() < 1e-6);
        assert!((d[1] + 0.99).abs() < 1e-6);
        assert_eq!(d[2], 0.5);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut p = Tensor::<f64>::from_vec(&[2], vec![3.0, -2.0]);
        let mut opt = Adam::new(AdamConfig::with_lr(0.1), &[&mut p]);
        for _ in 0..500 {
            let g = Tensor::from_vec(&[2], p.data().iter().map(|x| 2.0 * x).collect());
            opt.step(vec![&mut p], vec![&g]);
        }
        assert!(p.data().iter().all(|x| x.abs() < 1e-2), "{:?}", p.data());
    }
}
