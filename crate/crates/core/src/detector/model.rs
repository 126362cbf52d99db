use super::head::{fuse, DetectionHead, HeadCache};
use crate::behavior_channel::{BehaviorCache, BehaviorEncoder};
use crate::error::Result;
use crate::nn::{Mode, Parameters, Real, Tensor};
use crate::text_channel::{raw_embedding_mean, EncodeCache, TextEncoder, TokenWindow, POOL_EPS};

/// Text side of the fused vector: the trainable encoder, or (channel
/// ablation) the masked mean of a frozen raw token-embedding table.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum TextBranch<F> {
    Encoder(TextEncoder<F>),
    RawEmbedding(Tensor<F>),
}

/// Behavior side: the MLP encoder, or the standardized X_behav itself.
#[derive(Debug, Clone, PartialEq)]
pub enum BehaviorBranch<F> {
    Encoder(BehaviorEncoder<F>),
    Raw(usize),
}

impl<F: Real> TextBranch<F> {
    pub fn dim(&self) -> usize {
        match self {
            TextBranch::Encoder(e) => e.dim(),
            TextBranch::RawEmbedding(t) => t.shape()[1],
        }
    }
}

impl<F: Real> BehaviorBranch<F> {
    pub fn dim(&self) -> usize {
        match self {
            BehaviorBranch::Encoder(e) => e.output_dim(),
            BehaviorBranch::Raw(d) => *d,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            BehaviorBranch::Encoder(e) => e.input_dim(),
            BehaviorBranch::Raw(d) => *d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel<F> {
    pub text: TextBranch<F>,
    pub behavior: BehaviorBranch<F>,
    pub head: DetectionHead<F>,
}

type Fused<F> = (Vec<F>, Option<EncodeCache<F>>, Option<BehaviorCache<F>>);

pub struct ForwardCache<F> {
    text: Option<EncodeCache<F>>,
    behavior: Option<BehaviorCache<F>>,
    head: HeadCache<F>,
    d_h: usize,
}

impl<F: Real> DetectorModel<F> {
    pub fn d_h(&self) -> usize {
        self.text.dim()
    }

    pub fn d_m(&self) -> usize {
        self.behavior.dim()
    }

    /// Fused vector `z` and the caches needed for backward.
    fn fused(&self, window: &TokenWindow, x_std: &[F], mode: &mut Mode<'_>) -> Result<Fused<F>> {
        let (e_seman, tcache) = match &self.text {
            TextBranch::Encoder(enc) => {
                let (e, c) = enc.encode(window, mode)?;
                (e, Some(c))
            }
            TextBranch::RawEmbedding(table) => (raw_embedding_mean(table, window, POOL_EPS), None),
        };
        let (e_behav, bcache) = match &self.behavior {
            BehaviorBranch::Encoder(enc) => {
                if x_std.len() != enc.input_dim() {
                    return Err(crate::Error::Shape { expected: enc.input_dim(), actual: x_std.len() });
                }
                let (e, c) = enc.forward(x_std, 1, mode);
                (e, Some(c))
            }
            BehaviorBranch::Raw(_) => (x_std.to_vec(), None),
        };
        Ok((fuse(&e_seman, &e_behav, self.d_h(), self.d_m())?, tcache, bcache))
    }

    pub fn embed(&self, window: &TokenWindow, x_std: &[F]) -> Result<Vec<F>> {
        Ok(self.fused(window, x_std, &mut Mode::Eval)?.0)
    }

    pub fn forward(&self, window: &TokenWindow, x_std: &[F], mode: &mut Mode<'_>) -> Result<([F; 2], ForwardCache<F>)> {
        let (z, text, behavior) = self.fused(window, x_std, mode)?;
        let (o, head) = self.head.forward(&z, mode);
        Ok((o, ForwardCache { text, behavior, head, d_h: self.d_h() }))
    }

    pub fn backward(&self, cache: &ForwardCache<F>, d_logits: [F; 2], grad: &mut Self) {
        let dz = self.head.backward(&cache.head, d_logits, &mut grad.head);
        let (d_text, d_behav) = dz.split_at(cache.d_h);
        if let (TextBranch::Encoder(enc), TextBranch::Encoder(g), Some(c)) = (&self.text, &mut grad.text, &cache.text) {
            enc.backward(c, d_text, g);
        }
        if let (BehaviorBranch::Encoder(enc), BehaviorBranch::Encoder(g), Some(c)) = (&self.behavior, &mut grad.behavior, &cache.behavior) {
            enc.backward(c, d_behav, g);
        }
    }

    /// Parameters updated at the text learning rate.
    pub fn text_group_mut(&mut self) -> Vec<&mut Tensor<F>> {
        match &mut self.text {
            TextBranch::Encoder(e) => e.params_mut(),
            TextBranch::RawEmbedding(_) => Vec::new(),
        }
    }

    /// Behavior encoder and head, updated at the MLP learning rate.
    pub fn mlp_group_mut(&mut self) -> Vec<&mut Tensor<F>> {
        let mut out = match &mut self.behavior {
            BehaviorBranch::Encoder(e) => e.params_mut(),
            BehaviorBranch::Raw(_) => Vec::new(),
        };
        out.extend(self.head.params_mut());
        out
    }

    pub fn text_group(&self) -> Vec<&Tensor<F>> {
        match &self.text {
            TextBranch::Encoder(e) => e.params().into_iter().map(|(_, t)| t).collect(),
            TextBranch::RawEmbedding(_) => Vec::new(),
        }
    }

    pub fn mlp_group(&self) -> Vec<&Tensor<F>> {
        let mut out: Vec<&Tensor<F>> = match &self.behavior {
            BehaviorBranch::Encoder(e) => e.params().into_iter().map(|(_, t)| t).collect(),
            BehaviorBranch::Raw(_) => Vec::new(),
        };
        out.extend(self.head.params().into_iter().map(|(_, t)| t));
        out
    }

    /// Tensors stored in checkpoints but never trained.
    pub fn frozen(&self) -> Vec<(String, &Tensor<F>)> {
        match &self.text {
            TextBranch::RawEmbedding(t) => vec![("text.raw_embedding".to_string(), t)],
            TextBranch::Encoder(_) => Vec::new(),
        }
    }

    pub fn frozen_mut(&mut self) -> Vec<(String, &mut Tensor<F>)> {
        match &mut self.text {
            TextBranch::RawEmbedding(t) => vec![("text.raw_embedding".to_string(), t)],
            TextBranch::Encoder(_) => Vec::new(),
        }
    }

    pub fn cast<G: Real>(&self) -> DetectorModel<G> {
        DetectorModel {
            text: match &self.text {
                TextBranch::Encoder(e) => TextBranch::Encoder(TextEncoder { transformer: e.transformer.cast(), eps: e.eps }),
                TextBranch::RawEmbedding(t) => TextBranch::RawEmbedding(t.cast()),
            },
            behavior: match &self.behavior {
                BehaviorBranch::Encoder(e) => BehaviorBranch::Encoder(e.cast()),
                BehaviorBranch::Raw(d) => BehaviorBranch::Raw(*d),
            },
            head: self.head.cast(),
        }
    }
}

impl<F: Real> Parameters<F> for DetectorModel<F> {
    fn params(&self) -> Vec<(String, &Tensor<F>)> {
        let mut out = Vec::new();
        if let TextBranch::Encoder(e) = &self.text {
            out.extend(e.params().into_iter().map(|(n, t)| (format!("text.{n}"), t)));
        }
        if let BehaviorBranch::Encoder(e) = &self.behavior {
            out.extend(e.params().into_iter().map(|(n, t)| (format!("behavior.{n}"), t)));
        }
        out.extend(self.head.params().into_iter().map(|(n, t)| (format!("head.{n}"), t)));
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<F>> {
        let mut out = match &mut self.text {
            TextBranch::Encoder(e) => e.params_mut(),
            TextBranch::RawEmbedding(_) => Vec::new(),
        };
        if let BehaviorBranch::Encoder(e) = &mut self.behavior {
            out.extend(e.params_mut());
        }
        out.extend(self.head.params_mut());
        out
    }
}
