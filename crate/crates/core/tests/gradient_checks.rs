mod common;

use common::{grad_check, worst};
use tracebot::behavior_channel::BehaviorEncoder;
use tracebot::detector::{weighted_ce_from_logits, BehaviorBranch, ClassWeights, DetectionHead, DetectorModel, TextBranch};
use tracebot::nn::{Mode, Parameters};
use tracebot::text_channel::{TextEncoder, TokenWindow, TransformerConfig};

fn mini_text_config() -> TransformerConfig {
    TransformerConfig { vocab_size: 48, max_len: 16, d_model: 32, n_layers: 2, n_heads: 4, ffn_mult: 4, dropout: 0.0 }
}

fn window() -> TokenWindow {
    let ids: Vec<u32> = vec![3, 17, 42, 8, 8, 21, 5, 33, 12, 40, 47, 47, 47, 47, 47, 47];
    let mut mask = vec![1u8; 10];
    mask.resize(16, 0);
    TokenWindow { ids, mask }
}

#[test]
fn text_encoder_gradients_match_finite_differences() {
    let model = TextEncoder::<f64>::new(mini_text_config(), 5);
    let w = window();
    let coeffs: Vec<f64> = (0..32).map(|i| ((i as f64) * 0.37).sin()).collect();
    let loss = |m: &TextEncoder<f64>| {
        let (e, _) = m.encode(&w, &mut Mode::Eval).unwrap();
        e.iter().zip(&coeffs).map(|(a, c)| a * c).sum::<f64>() + 0.5 * e.iter().map(|a| a * a).sum::<f64>()
    };
    let mut grad = model.zeros_like();
    let (e, cache) = model.encode(&w, &mut Mode::Eval).unwrap();
    let d_e: Vec<f64> = e.iter().zip(&coeffs).map(|(a, c)| c + a).collect();
    model.backward(&cache, &d_e, &mut grad);
    let errors = grad_check(&model, &grad, 24, 1e-5, loss);
    let (name, err) = worst(&errors);
    assert!(err < 1e-4, "worst relative error {err:e} at {name}");
}

fn behavior_input(d: usize) -> Vec<f64> {
    (0..d).map(|i| ((i as f64) * 1.3 + 0.4).sin() * 1.5).collect()
}

#[test]
fn behavior_encoder_gradients_match_finite_differences() {
    let enc = BehaviorEncoder::<f64>::new(40, 16, 0.2, 3);
    let x = behavior_input(40);
    let coeffs: Vec<f64> = (0..16).map(|i| ((i as f64) * 0.71).cos()).collect();
    let loss = |m: &BehaviorEncoder<f64>| {
        let (e, _) = m.forward(&x, 1, &mut Mode::Eval);
        e.iter().zip(&coeffs).map(|(a, c)| a * c).sum::<f64>() + 0.5 * e.iter().map(|a| a * a).sum::<f64>()
    };
    let mut grad = enc.zeros_like();
    let (e, cache) = enc.forward(&x, 1, &mut Mode::Eval);
    let d_e: Vec<f64> = e.iter().zip(&coeffs).map(|(a, c)| c + a).collect();
    enc.backward(&cache, &d_e, &mut grad);
    let errors = grad_check(&enc, &grad, 64, 1e-6, loss);
    assert_eq!(errors.len(), 2);
    let (name, err) = worst(&errors);
    assert!(err < 1e-4, "worst relative error {err:e} at {name}");
}

#[test]
fn head_gradients_match_finite_differences() {
    let head = DetectionHead::<f64>::new(48, 0.2, 4);
    let z = behavior_input(48);
    let w = ClassWeights { w: [0.625, 2.5] };
    let loss = |m: &DetectionHead<f64>| {
        let (o, _) = m.forward(&z, &mut Mode::Eval);
        weighted_ce_from_logits([o[0], o[1]], 1, w).0
    };
    let mut grad = head.zeros_like();
    let (o, cache) = head.forward(&z, &mut Mode::Eval);
    let (_, d_o) = weighted_ce_from_logits(o, 1, w);
    head.backward(&cache, d_o, &mut grad);
    let errors = grad_check(&head, &grad, 32, 1e-6, loss);
    assert_eq!(errors.len(), 6);
    let (name, err) = worst(&errors);
    assert!(err < 1e-4, "worst relative error {err:e} at {name}");
}

#[test]
fn detector_gradients_match_finite_differences_for_every_group() {
    let text = TextEncoder::<f64>::new(mini_text_config(), 5);
    let model = DetectorModel {
        text: TextBranch::Encoder(text),
        behavior: BehaviorBranch::Encoder(BehaviorEncoder::new(40, 16, 0.2, 6)),
        head: DetectionHead::new(48, 0.2, 7),
    };
    assert_eq!((model.d_h(), model.d_m()), (32, 16));
    let w = window();
    let x = behavior_input(40);
    let weights = ClassWeights { w: [1.4, 0.8] };
    let loss = |m: &DetectorModel<f64>| {
        let (o, _) = m.forward(&w, &x, &mut Mode::Eval).unwrap();
        weighted_ce_from_logits(o, 0, weights).0
    };
    let mut grad = model.zeros_like();
    let (o, cache) = model.forward(&w, &x, &mut Mode::Eval).unwrap();
    let (_, d_o) = weighted_ce_from_logits(o, 0, weights);
    model.backward(&cache, d_o, &mut grad);
    let errors = grad_check(&model, &grad, 12, 1e-5, loss);
    for prefix in ["text.", "behavior.", "head."] {
        assert!(errors.iter().any(|(n, _)| n.starts_with(prefix)), "no tensors under {prefix}");
    }
    let (name, err) = worst(&errors);
    assert!(err < 1e-4, "worst relative error {err:e} at {name}");
}

#[test]
fn zero_dropout_training_mode_equals_eval() {
    use rand::SeedableRng;
    let enc = BehaviorEncoder::<f64>::new(40, 16, 0.0, 1);
    let x = behavior_input(40);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    assert_eq!(enc.forward(&x, 1, &mut Mode::Train(&mut rng)).0, enc.forward(&x, 1, &mut Mode::Eval).0);
}
