//! Pre-norm causal transformer (GPT-2 layout) with explicit backward pass.

use crate::nn::{apply_mask, gelu, gelu_grad, softmax_in_place, LayerNorm, LayerNormCache, Linear, Mode, Parameters, Real, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerConfig {
    pub vocab_size: usize,
    pub max_len: usize,
    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    #[serde(default = "default_ffn_mult")]
    pub ffn_mult: usize,
    #[serde(default = "default_dropout")]
    pub dropout: f64,
}

fn default_ffn_mult() -> usize {
    4
}

fn default_dropout() -> f64 {
    0.1
}

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct Block<F> {
    pub ln1: LayerNorm<F>,
    pub qkv: Linear<F>,
    pub attn_out: Linear<F>,
    pub ln2: LayerNorm<F>,
    pub fc: Linear<F>,
    pub proj: Linear<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transformer<F> {
    pub config: TransformerConfig,
    pub tok_emb: Tensor<F>,
    pub pos_emb: Tensor<F>,
    pub blocks: Vec<Block<F>>,
    pub ln_f: LayerNorm<F>,
}

struct BlockCache<F> {
    ln1: LayerNormCache<F>,
    a1: Vec<F>,
    qkv: Vec<F>,
    probs: Vec<Vec<F>>,
    concat: Vec<F>,
    drop_attn: Option<Vec<F>>,
    ln2: LayerNormCache<F>,
    a2: Vec<F>,
    fc_pre: Vec<F>,
    fc_act: Vec<F>,
    drop_mlp: Option<Vec<F>>,
}

/// Activations retained by [`Transformer::forward`] for the backward pass.
pub struct TransformerCache<F> {
    ids: Vec<u32>,
    drop_emb: Option<Vec<F>>,
    blocks: Vec<BlockCache<F>>,
    ln_f: LayerNormCache<F>,
}

impl<F> TransformerCache<F> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Per-layer key/value history for incremental decoding.
pub struct KvCache<F> {
    keys: Vec<Vec<F>>,
    values: Vec<Vec<F>>,
    len: usize,
}

impl<F> KvCache<F> {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

fn head_slice<F: Real>(qkv: &[F], t: usize, d: usize, part: usize, h: usize, dh: usize) -> Vec<F> {
    let mut out = Vec::with_capacity(t * dh);
    for i in 0..t {
        let base = i * 3 * d + part * d + h * dh;
        out.extend_from_slice(&qkv[base..base + dh]);
    }
    out
}

impl<F: Real> Transformer<F> {
    /// GPT-2 style init: N(0, 0.02), residual projections scaled by
    /// `1/sqrt(2 * n_layers)`.
    pub fn new(config: TransformerConfig, seed: u64) -> Self {
        assert!(config.d_model.is_multiple_of(config.n_heads), "d_model must divide into heads");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.d_model;
        let std = 0.02;
        let resid_std = std / ((2 * config.n_layers) as f64).sqrt();
        let blocks = (0..config.n_layers)
            .map(|_| Block {
                ln1: LayerNorm::new(d, LN_EPS),
                qkv: Linear::new_normal(d, 3 * d, std, &mut rng),
                attn_out: Linear::new_normal(d, d, resid_std, &mut rng),
                ln2: LayerNorm::new(d, LN_EPS),
                fc: Linear::new_normal(d, config.ffn_mult * d, std, &mut rng),
                proj: Linear::new_normal(config.ffn_mult * d, d, resid_std, &mut rng),
            })
            .collect();
        Self {
            config,
            tok_emb: Tensor::randn(&[config.vocab_size, d], std, &mut rng),
            pos_emb: Tensor::randn(&[config.max_len, d], std / 2.0, &mut rng),
            blocks,
            ln_f: LayerNorm::new(d, LN_EPS),
        }
    }

    pub fn d_model(&self) -> usize {
        self.config.d_model
    }

    /// Hidden states `(T, d_model)` after the final layer norm.
    pub fn forward(&self, ids: &[u32], mode: &mut Mode<'_>) -> (Vec<F>, TransformerCache<F>) {
        let t = ids.len();
        let d = self.d_model();
        assert!(t <= self.config.max_len, "sequence of {t} exceeds max_len {}", self.config.max_len);
        let p = self.config.dropout;
        let mut x = Vec::with_capacity(t * d);
        for (pos, &id) in ids.iter().enumerate() {
            let tok = self.tok_emb.row(id as usize);
            let pe = self.pos_emb.row(pos);
            x.extend(tok.iter().zip(pe).map(|(&a, &b)| a + b));
        }
        let drop_emb = mode.dropout_mask(t * d, p);
        apply_mask(&mut x, &drop_emb);

        let mut caches = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let (ln1_out, ln1) = block.ln1.forward(&x, t);
            let qkv = block.qkv.forward(&ln1_out, t);
            let (concat, probs) = self.attention(&qkv, t);
            let mut attn = block.attn_out.forward(&concat, t);
            let drop_attn = mode.dropout_mask(t * d, p);
            apply_mask(&mut attn, &drop_attn);
            x.iter_mut().zip(&attn).for_each(|(a, &b)| *a += b);

            let (ln2_out, ln2) = block.ln2.forward(&x, t);
            let fc_pre = block.fc.forward(&ln2_out, t);
            let fc_act: Vec<F> = fc_pre.iter().map(|&v| gelu(v)).collect();
            let mut mlp = block.proj.forward(&fc_act, t);
            let drop_mlp = mode.dropout_mask(t * d, p);
            apply_mask(&mut mlp, &drop_mlp);
            x.iter_mut().zip(&mlp).for_each(|(a, &b)| *a += b);

            caches.push(BlockCache {
                ln1,
                a1: ln1_out,
                qkv,
                probs,
                concat,
                drop_attn,
                ln2,
                a2: ln2_out,
                fc_pre,
                fc_act,
                drop_mlp,
            });
        }
        let (h, ln_f) = self.ln_f.forward(&x, t);
        (h, TransformerCache { ids: ids.to_vec(), drop_emb, blocks: caches, ln_f })
    }

    fn attention(&self, qkv: &[F], t: usize) -> (Vec<F>, Vec<Vec<F>>) {
        let d = self.d_model();
        let nh = self.config.n_heads;
        let dh = d / nh;
        let scale = F::lit(1.0 / (dh as f64).sqrt());
        let mut concat = vec![F::zero(); t * d];
        let mut all_probs = Vec::with_capacity(nh);
        for h in 0..nh {
            let q = head_slice(qkv, t, d, 0, h, dh);
            let k = head_slice(qkv, t, d, 1, h, dh);
            let v = head_slice(qkv, t, d, 2, h, dh);
            let mut s = vec![F::zero(); t * t];
            F::gemm(t, dh, t, scale, &q, false, &k, true, F::zero(), &mut s);
            for i in 0..t {
                let row = &mut s[i * t..(i + 1) * t];
                softmax_in_place(&mut row[..=i]);
                row[i + 1..].iter_mut().for_each(|v| *v = F::zero());
            }
            let mut o = vec![F::zero(); t * dh];
            F::gemm(t, t, dh, F::one(), &s, false, &v, false, F::zero(), &mut o);
            for i in 0..t {
                concat[i * d + h * dh..i * d + (h + 1) * dh].copy_from_slice(&o[i * dh..(i + 1) * dh]);
            }
            all_probs.push(s);
        }
        (concat, all_probs)
    }

    /// Accumulates parameter gradients for upstream gradient `dh` on the
    /// hidden states returned by `forward`.
    pub fn backward(&self, cache: &TransformerCache<F>, dh: &[F], grad: &mut Transformer<F>) {
        let t = cache.len();
        let d = self.d_model();
        let nh = self.config.n_heads;
        let dhd = d / nh;
        let scale = F::lit(1.0 / (dhd as f64).sqrt());
        let mut dx = self.ln_f.backward(&cache.ln_f, dh, t, &mut grad.ln_f);

        for (li, block) in self.blocks.iter().enumerate().rev() {
            let c = &cache.blocks[li];
            let g = &mut grad.blocks[li];
            // MLP branch.
            let mut dmlp = dx.clone();
            apply_mask(&mut dmlp, &c.drop_mlp);
            let mut dact = block.proj.backward(&c.fc_act, &dmlp, t, &mut g.proj);
            dact.iter_mut().zip(&c.fc_pre).for_each(|(v, &pre)| *v *= gelu_grad(pre));
            let da2 = block.fc.backward(&c.a2, &dact, t, &mut g.fc);
            let dln2 = block.ln2.backward(&c.ln2, &da2, t, &mut g.ln2);
            dx.iter_mut().zip(&dln2).for_each(|(a, &b)| *a += b);

            // Attention branch.
            let mut dattn = dx.clone();
            apply_mask(&mut dattn, &c.drop_attn);
            let dconcat = block.attn_out.backward(&c.concat, &dattn, t, &mut g.attn_out);
            let mut dqkv = vec![F::zero(); t * 3 * d];
            for h in 0..nh {
                let q = head_slice(&c.qkv, t, d, 0, h, dhd);
                let k = head_slice(&c.qkv, t, d, 1, h, dhd);
                let v = head_slice(&c.qkv, t, d, 2, h, dhd);
                let p = &c.probs[h];
                let mut d_o = Vec::with_capacity(t * dhd);
                for i in 0..t {
                    d_o.extend_from_slice(&dconcat[i * d + h * dhd..i * d + (h + 1) * dhd]);
                }
                let mut dp = vec![F::zero(); t * t];
                F::gemm(t, dhd, t, F::one(), &d_o, false, &v, true, F::zero(), &mut dp);
                let mut dv = vec![F::zero(); t * dhd];
                F::gemm(t, t, dhd, F::one(), p, true, &d_o, false, F::zero(), &mut dv);
                // softmax backward, row-wise over the causal prefix
                let mut ds = vec![F::zero(); t * t];
                for i in 0..t {
                    let pr = &p[i * t..i * t + i + 1];
                    let dpr = &dp[i * t..i * t + i + 1];
                    let dot: F = pr.iter().zip(dpr).map(|(&a, &b)| a * b).sum();
                    for j in 0..=i {
                        ds[i * t + j] = pr[j] * (dpr[j] - dot);
                    }
                }
                let mut dq = vec![F::zero(); t * dhd];
                F::gemm(t, t, dhd, scale, &ds, false, &k, false, F::zero(), &mut dq);
                let mut dk = vec![F::zero(); t * dhd];
                F::gemm(t, t, dhd, scale, &ds, true, &q, false, F::zero(), &mut dk);
                for i in 0..t {
                    for (part, src) in [(0usize, &dq), (1, &dk), (2, &dv)] {
                        let base = i * 3 * d + part * d + h * dhd;
                        dqkv[base..base + dhd].copy_from_slice(&src[i * dhd..(i + 1) * dhd]);
                    }
                }
            }
            let da1 = block.qkv.backward(&c.a1, &dqkv, t, &mut g.qkv);
            let dln1 = block.ln1.backward(&c.ln1, &da1, t, &mut g.ln1);
            dx.iter_mut().zip(&dln1).for_each(|(a, &b)| *a += b);
        }

        apply_mask(&mut dx, &cache.drop_emb);
        for (pos, &id) in cache.ids.iter().enumerate() {
            let src = &dx[pos * d..(pos + 1) * d];
            grad.tok_emb.row_mut(id as usize).iter_mut().zip(src).for_each(|(a, &b)| *a += b);
            grad.pos_emb.row_mut(pos).iter_mut().zip(src).for_each(|(a, &b)| *a += b);
        }
    }

    pub fn kv_cache(&self) -> KvCache<F> {
        KvCache { keys: vec![Vec::new(); self.blocks.len()], values: vec![Vec::new(); self.blocks.len()], len: 0 }
    }

    /// Evaluation-mode single-token step; returns the final hidden state
    /// for the new position.
    pub fn step(&self, id: u32, cache: &mut KvCache<F>) -> Vec<F> {
        let d = self.d_model();
        let pos = cache.len;
        assert!(pos < self.config.max_len, "context window exhausted");
        let nh = self.config.n_heads;
        let dh = d / nh;
        let scale = F::lit(1.0 / (dh as f64).sqrt());
        let mut x: Vec<F> = self.tok_emb.row(id as usize).iter().zip(self.pos_emb.row(pos)).map(|(&a, &b)| a + b).collect();
        for (li, block) in self.blocks.iter().enumerate() {
            let (a1, _) = block.ln1.forward(&x, 1);
            let qkv = block.qkv.forward(&a1, 1);
            cache.keys[li].extend_from_slice(&qkv[d..2 * d]);
            cache.values[li].extend_from_slice(&qkv[2 * d..3 * d]);
            let n = pos + 1;
            let mut concat = vec![F::zero(); d];
            for h in 0..nh {
                let q = &qkv[h * dh..(h + 1) * dh];
                let mut scores: Vec<F> = (0..n)
                    .map(|j| {
                        let k = &cache.keys[li][j * d + h * dh..j * d + (h + 1) * dh];
                        q.iter().zip(k).map(|(&a, &b)| a * b).sum::<F>() * scale
                    })
                    .collect();
                softmax_in_place(&mut scores);
                let out = &mut concat[h * dh..(h + 1) * dh];
                for (j, &w) in scores.iter().enumerate() {
                    let v = &cache.values[li][j * d + h * dh..j * d + (h + 1) * dh];
                    out.iter_mut().zip(v).for_each(|(o, &vv)| *o += w * vv);
                }
            }
            let attn = block.attn_out.forward(&concat, 1);
            x.iter_mut().zip(&attn).for_each(|(a, &b)| *a += b);
            let (a2, _) = block.ln2.forward(&x, 1);
            let act: Vec<F> = block.fc.forward(&a2, 1).into_iter().map(gelu).collect();
            let mlp = block.proj.forward(&act, 1);
            x.iter_mut().zip(&mlp).for_each(|(a, &b)| *a += b);
        }
        cache.len += 1;
        self.ln_f.forward(&x, 1).0
    }

    pub fn cast<G: Real>(&self) -> Transformer<G> {
        let mut out = Transformer::<G>::new(self.config, 0);
        for (dst, (_, src)) in out.params_mut().into_iter().zip(self.params()) {
            *dst = src.cast();
        }
        out
    }
}

impl<F: Real> Parameters<F> for Transformer<F> {
    fn params(&self) -> Vec<(String, &Tensor<F>)> {
        let mut out = vec![("tok_emb".to_string(), &self.tok_emb), ("pos_emb".to_string(), &self.pos_emb)];
        for (i, b) in self.blocks.iter().enumerate() {
            for (name, part) in [
                ("ln1", b.ln1.params()),
                ("qkv", b.qkv.params()),
                ("attn_out", b.attn_out.params()),
                ("ln2", b.ln2.params()),
                ("fc", b.fc.params()),
                ("proj", b.proj.params()),
            ] {
                for (pname, t) in part {
                    out.push((format!("blocks.{i}.{name}.{pname}"), t));
                }
            }
        }
        for (pname, t) in self.ln_f.params() {
            out.push((format!("ln_f.{pname}"), t));
        }
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<F>> {
        let mut out = vec![&mut self.tok_emb, &mut self.pos_emb];
        for b in self.blocks.iter_mut() {
            out.extend(b.ln1.params_mut());
            out.extend(b.qkv.params_mut());
            out.extend(b.attn_out.params_mut());
            out.extend(b.ln2.params_mut());
            out.extend(b.fc.params_mut());
            out.extend(b.proj.params_mut());
        }
        out.extend(self.ln_f.params_mut());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Transformer<f64> {
        Transformer::new(
            TransformerConfig { vocab_size: 20, max_len: 12, d_model: 8, n_layers: 2, n_heads: 2, ffn_mult: 4, dropout: 0.0 },
            3,
        )
    }

    #[test]
    fn causal_prefix_is_bit_identical() {
        let m = tiny();
        let (a, _) = m.forward(&[1, 2, 3, 4, 5], &mut Mode::Eval);
        let (b, _) = m.forward(&[1, 2, 3, 9, 0, 7], &mut Mode::Eval);
        assert_eq!(&a[..3 * 8], &b[..3 * 8]);
    }

    #[test]
    fn incremental_step_matches_full_forward() {
        let m = tiny();
        let ids = [4u32, 7, 1, 19, 3];
        let (full, _) = m.forward(&ids, &mut Mode::Eval);
        let mut kv = m.kv_cache();
        for (i, &id) in ids.iter().enumerate() {
            let h = m.step(id, &mut kv);
            for (a, b) in h.iter().zip(&full[i * 8..(i + 1) * 8]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn param_names_are_unique() {
        let m = tiny();
        let names: std::collections::HashSet<_> = m.params().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.len(), m.params().len());
        assert_eq!(m.params().len(), m.clone().params_mut().len());
    }
}
