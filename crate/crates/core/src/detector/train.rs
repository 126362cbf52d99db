use super::head::softmax2;
use super::loss::{weighted_ce_from_logits, ClassWeights};
use super::metrics::{compute_metrics, predict_class, Metrics};
use super::model::DetectorModel;
use crate::error::{Error, Result};
use crate::nn::{chunked_grads, Adam, AdamConfig, Mode, Parameters, Real};
use crate::text_channel::TokenWindow;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr_text: f64,
    pub lr_mlp: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub dropout: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { lr_text: 5e-4, lr_mlp: 1e-5, batch_size: 256, max_epochs: 10, patience: 3, seed: 7, dropout: 0.2 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.lr_text > 0.0 && self.lr_mlp > 0.0 && self.batch_size >= 1 && self.max_epochs >= 1 && self.patience >= 1;
        if !positive || !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("invalid training config {self:?}")));
        }
        Ok(())
    }
}

/// Model-ready users: token windows, standardized behavior vectors, labels.
#[derive(Debug, Clone, Default)]
pub struct EncodedSet<F> {
    pub user_ids: Vec<String>,
    pub windows: Vec<TokenWindow>,
    pub x: Vec<Vec<F>>,
    pub labels: Vec<usize>,
}

impl<F: Clone> EncodedSet<F> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            user_ids: idx.iter().map(|&i| self.user_ids[i].clone()).collect(),
            windows: idx.iter().map(|&i| self.windows[i].clone()).collect(),
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    pub val_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainHistory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_loss,val_acc,val_f1\n");
        for r in &self.epochs {
            s.push_str(&format!("{},{:.6},{:.6},{:.6},{:.6}\n", r.epoch, r.train_loss, r.val_loss, r.val_acc, r.val_f1));
        }
        s
    }
}

/// Patience counter on validation F1; only strict improvements reset it.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<(usize, f64)>,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self { patience, best: None, stale: 0 }
    }

    /// Records an epoch; returns `(is_new_best, should_stop)`.
    pub fn observe(&mut self, epoch: usize, f1: f64) -> (bool, bool) {
        match self.best {
            Some((_, b)) if f1 <= b => {
                self.stale += 1;
                (false, self.stale >= self.patience)
            }
            _ => {
                self.best = Some((epoch, f1));
                self.stale = 0;
                (true, false)
            }
        }
    }

    pub fn best_epoch(&self) -> Option<usize> {
        self.best.map(|(e, _)| e)
    }
}

fn sample_rng(seed: u64, epoch: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((epoch as u64) << 32) | index as u64);
    rng
}

/// Per-user logits and probabilities in evaluation mode.
pub fn predict_probs<F: Real>(model: &DetectorModel<F>, data: &EncodedSet<F>) -> Result<Vec<([f64; 2], [f64; 2])>> {
    (0..data.len())
        .into_par_iter()
        .map(|i| {
            let (o, _) = model.forward(&data.windows[i], &data.x[i], &mut Mode::Eval)?;
            let o = [o[0].to_f64_lossy(), o[1].to_f64_lossy()];
            Ok((o, softmax2(o)))
        })
        .collect()
}

/// Label and confidence for one user.
pub fn predict<F: Real>(model: &DetectorModel<F>, window: &TokenWindow, x_std: &[F]) -> Result<(usize, f64)> {
    let (o, _) = model.forward(window, x_std, &mut Mode::Eval)?;
    Ok(predict_class(softmax2([o[0].to_f64_lossy(), o[1].to_f64_lossy()])))
}

pub fn evaluate<F: Real>(model: &DetectorModel<F>, data: &EncodedSet<F>) -> Result<Metrics> {
    let preds: Vec<usize> = predict_probs(model, data)?.iter().map(|(_, p)| predict_class(*p).0).collect();
    compute_metrics(&preds, &data.labels)
}

fn evaluate_with_loss<F: Real>(model: &DetectorModel<F>, data: &EncodedSet<F>, weights: ClassWeights) -> Result<(Metrics, f64)> {
    let out = predict_probs(model, data)?;
    let loss = out.iter().zip(&data.labels).map(|((o, _), &y)| weighted_ce_from_logits(*o, y, weights).0).sum::<f64>() / data.len() as f64;
    let preds: Vec<usize> = out.iter().map(|(_, p)| predict_class(*p).0).collect();
    Ok((compute_metrics(&preds, &data.labels)?, loss))
}

/// Mean weighted loss over `idx` and its gradient.
pub fn batch_loss_and_grad<F: Real>(
    model: &DetectorModel<F>,
    data: &EncodedSet<F>,
    idx: &[usize],
    weights: ClassWeights,
    mut mode_for: impl FnMut(usize) -> Option<ChaCha8Rng>,
) -> Result<(f64, DetectorModel<F>)>
where
    DetectorModel<F>: Send + Sync,
{
    let rngs: Vec<Option<ChaCha8Rng>> = idx.iter().map(|&i| mode_for(i)).collect();
    let inv_b = 1.0 / idx.len() as f64;
    let items: Vec<(usize, Option<ChaCha8Rng>)> = idx.iter().copied().zip(rngs).collect();
    let failure = std::sync::Mutex::new(None);
    let (loss, grad) = chunked_grads(model, &items, |_, (i, rng), g| {
        let mut rng = rng.clone();
        let mut mode = match rng.as_mut() {
            Some(r) => Mode::Train(r),
            None => Mode::Eval,
        };
        match model.forward(&data.windows[*i], &data.x[*i], &mut mode) {
            Ok((o, cache)) => {
                let (l, d) = weighted_ce_from_logits([o[0].to_f64_lossy(), o[1].to_f64_lossy()], data.labels[*i], weights);
                model.backward(&cache, [F::lit(d[0] * inv_b), F::lit(d[1] * inv_b)], g);
                l * inv_b
            }
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                0.0
            }
        }
    });
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok((loss, grad))
}

/// Mini-batch Adam training with two learning-rate groups, validation-F1
/// early stopping and best-snapshot restore.
pub fn train<F: Real>(
    mut model: DetectorModel<F>,
    train_set: &EncodedSet<F>,
    val_set: &EncodedSet<F>,
    weights: ClassWeights,
    config: &TrainConfig,
) -> Result<(DetectorModel<F>, TrainHistory)>
where
    DetectorModel<F>: Send + Sync,
{
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::Config(format!("empty split: train {} / validation {}", train_set.len(), val_set.len())));
    }
    let mut opt_text = Adam::new(AdamConfig::with_lr(config.lr_text), &model.text_group_mut());
    let mut opt_mlp = Adam::new(AdamConfig::with_lr(config.lr_mlp), &model.mlp_group_mut());
    let mut stopper = EarlyStopping::new(config.patience);
    let mut history = TrainHistory::default();
    let mut best = model.clone();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let (loss, grad) =
                batch_loss_and_grad(&model, train_set, batch, weights, |i| Some(sample_rng(config.seed, epoch, i)))?;
            if !loss.is_finite() || !grad.params().iter().all(|(_, t)| t.is_finite()) {
                return Err(Error::Divergence { epoch, batch: b + 1 });
            }
            epoch_loss += loss * batch.len() as f64;
            opt_text.step(model.text_group_mut(), grad.text_group());
            opt_mlp.step(model.mlp_group_mut(), grad.mlp_group());
        }
        let (val, val_loss) = evaluate_with_loss(&model, val_set, weights)?;
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: epoch_loss / train_set.len() as f64,
            val_loss,
            val_acc: val.acc,
            val_f1: val.f1,
        });
        let (improved, stop) = stopper.observe(epoch, val.f1);
        if improved {
            best = model.clone();
        }
        if stop {
            history.stopped_early = true;
            break;
        }
    }
    history.best_epoch = stopper.best_epoch().unwrap_or(0);
    Ok((best, history))
}
