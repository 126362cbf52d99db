use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use tracebot::aigc_signals::Thresholds;
use tracebot::behavior_channel::{BehaviorEncoder, Scaler};
use tracebot::detector::*;
use tracebot::nn::{Parameters, Tensor};
use tracebot::text_channel::{TextEncoder, TokenWindow, Tokenizer, TransformerConfig};
use tracebot::Error;

const VOCAB: usize = 300;
const L: usize = 16;
const D_B: usize = 40;

fn tokenizer() -> Tokenizer {
    let texts = ["crypto news daily update", "coffee and long walks", "follow for the best crypto deals"];
    Tokenizer::train(texts.iter().copied(), VOCAB)
}

/// Two classes separated along every behavior column and by token range.
fn dataset(n: usize, seed: u64, vocab: usize) -> EncodedSet<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = EncodedSet::default();
    for i in 0..n {
        let y = i % 2;
        let real = rng.gen_range(4..=L);
        let lo = if y == 1 { vocab / 2 } else { 0 };
        let mut ids: Vec<u32> = (0..real).map(|_| rng.gen_range(lo..lo + vocab / 2 - 2) as u32).collect();
        ids.resize(L, (vocab - 1) as u32);
        let mut mask = vec![1u8; real];
        mask.resize(L, 0);
        set.user_ids.push(format!("u{seed}_{i}"));
        set.windows.push(TokenWindow { ids, mask });
        set.x.push((0..D_B).map(|_| rng.gen_range(-1.0f32..1.0) + if y == 1 { 0.8 } else { -0.8 }).collect());
        set.labels.push(y);
    }
    set
}

fn text_config(vocab: usize) -> TransformerConfig {
    TransformerConfig { vocab_size: vocab, max_len: L, d_model: 32, n_layers: 1, n_heads: 2, ffn_mult: 4, dropout: 0.1 }
}

fn model(seed: u64, vocab: usize) -> DetectorModel<f32> {
    DetectorModel {
        text: TextBranch::Encoder(TextEncoder::new(text_config(vocab), seed)),
        behavior: BehaviorBranch::Encoder(BehaviorEncoder::new(D_B, 16, 0.2, seed + 1)),
        head: DetectionHead::new(48, 0.2, seed + 2),
    }
}

fn config() -> TrainConfig {
    TrainConfig { lr_text: 1e-3, lr_mlp: 1e-3, batch_size: 16, max_epochs: 4, patience: 3, seed: 11, dropout: 0.2 }
}

#[test]
fn training_is_deterministic_and_learns() {
    let (tr, va) = (dataset(96, 1, VOCAB), dataset(32, 2, VOCAB));
    let (m1, h1) = train(model(3, VOCAB), &tr, &va, ClassWeights::EQUAL, &config()).unwrap();
    let (m2, h2) = train(model(3, VOCAB), &tr, &va, ClassWeights::EQUAL, &config()).unwrap();
    assert_eq!(h1, h2);
    assert_eq!(m1, m2);
    let loss: Vec<f64> = h1.epochs.iter().map(|e| e.train_loss).collect();
    assert!(loss[0] > loss[1] && loss[1] > loss[2], "train loss {loss:?}");
    assert!(h1.to_csv().starts_with("epoch,train_loss,val_loss,val_acc,val_f1\n1,"));

    // Returned snapshot is the best epoch, never worse than an earlier one.
    let best = &h1.epochs[h1.best_epoch - 1];
    assert!(h1.epochs[..h1.best_epoch].iter().all(|e| e.val_f1 <= best.val_f1));
    assert_eq!(evaluate(&m1, &va).unwrap().f1, best.val_f1);
    assert!(evaluate(&m1, &dataset(64, 3, VOCAB)).unwrap().f1 > 0.9);
}

#[test]
fn non_finite_inputs_report_divergence() {
    let mut tr = dataset(32, 1, VOCAB);
    tr.x.iter_mut().for_each(|x| x[0] = f32::NAN);
    let r = train(model(3, VOCAB), &tr, &dataset(8, 2, VOCAB), ClassWeights::EQUAL, &config());
    assert!(matches!(r, Err(Error::Divergence { epoch: 1, batch: 1 })), "{r:?}");
    assert_eq!(r.unwrap_err().exit_code(), 4);
}

#[test]
fn empty_splits_are_configuration_errors() {
    let empty = EncodedSet::default();
    let r = train(model(3, VOCAB), &empty, &dataset(8, 2, VOCAB), ClassWeights::EQUAL, &config());
    assert!(matches!(r, Err(Error::Config(_))));
    let r = train(model(3, VOCAB), &dataset(8, 2, VOCAB), &empty, ClassWeights::EQUAL, &config());
    assert!(matches!(r, Err(Error::Config(_))));
    assert!(matches!(evaluate(&model(3, VOCAB), &empty), Err(Error::Evaluation(_))));
}

fn bundle(model: DetectorModel<f32>) -> DetectorBundle {
    DetectorBundle {
        model,
        scaler: Scaler { mean: (0..D_B).map(|i| i as f64 * 0.1).collect(), std: vec![1.5; D_B] },
        thresholds: Thresholds { q: 0.9, values: [0.7, 0.2, 0.1, 2.5, 1.1] },
        tokenizer: tokenizer(),
        config: json!({"note": "round trip", "lr": 1e-5}),
    }
}

fn trained_bundle() -> (DetectorBundle, EncodedSet<f32>) {
    let vocab = tokenizer().vocab_size();
    let data = dataset(48, 4, vocab);
    let cfg = TrainConfig { max_epochs: 1, ..config() };
    let (m, _) = train(model(5, vocab), &data, &data, ClassWeights::EQUAL, &cfg).unwrap();
    (bundle(m), data)
}

#[test]
fn checkpoint_round_trip_is_byte_identical() {
    let (b, data) = trained_bundle();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("checkpoint.tbm");
    save_checkpoint(&b, &path).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back, b);
    let again = dir.path().join("again.tbm");
    save_checkpoint(&back, &again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());

    let before = predict_probs(&b.model, &data).unwrap();
    let after = predict_probs(&back.model, &data).unwrap();
    for ((_, p), (_, q)) in before.iter().zip(&after) {
        assert!((p[1] - q[1]).abs() <= 1e-7);
    }
}

#[test]
fn raw_branch_models_round_trip() {
    let vocab = tokenizer().vocab_size();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = DetectorModel {
        text: TextBranch::RawEmbedding(Tensor::randn(&[vocab, 8], 1.0, &mut rng)),
        behavior: BehaviorBranch::Raw(D_B),
        head: DetectionHead::new(8 + D_B, 0.2, 2),
    };
    let b = bundle(m);
    let bytes = b.to_bytes().unwrap();
    let back = DetectorBundle::from_bytes(&bytes).unwrap();
    assert_eq!(back, b);
    assert_eq!(back.model.frozen().len(), 1);
    assert_eq!(back.to_bytes().unwrap(), bytes);
}

fn manifest_edit(bytes: &[u8], edit: impl FnOnce(&mut serde_json::Value)) -> Vec<u8> {
    let len = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let mut manifest: serde_json::Value = serde_json::from_slice(&bytes[12..12 + len]).unwrap();
    edit(&mut manifest);
    let json = serde_json::to_vec(&manifest).unwrap();
    let mut out = bytes[..4].to_vec();
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&bytes[12 + len..]);
    out
}

#[test]
fn corrupt_checkpoints_are_rejected() {
    let (b, _) = trained_bundle();
    let bytes = b.to_bytes().unwrap();

    let err = DetectorBundle::from_bytes(&bytes[..bytes.len() - 4]).unwrap_err().to_string();
    let last = b.model.params().last().unwrap().0.clone();
    assert!(err.contains(&last) && err.contains("truncated"), "{err}");

    let err = DetectorBundle::from_bytes(&manifest_edit(&bytes, |m| m["meta"]["schema_version"] = json!(99))).unwrap_err();
    assert!(err.to_string().contains("schema version"), "{err}");

    let err = DetectorBundle::from_bytes(&manifest_edit(&bytes, |m| m["meta"]["tokenizer_sha256"] = json!("00"))).unwrap_err();
    assert!(err.to_string().contains("tokenizer"), "{err}");

    let reshaped = manifest_edit(&bytes, |m| {
        let t = &mut m["tensors"][0];
        let shape = t["shape"].as_array().unwrap().clone();
        let n: u64 = shape.iter().map(|v| v.as_u64().unwrap()).product();
        t["shape"] = json!([n]);
    });
    let err = DetectorBundle::from_bytes(&reshaped).unwrap_err().to_string();
    assert!(err.contains("shape"), "{err}");

    assert!(DetectorBundle::from_bytes(b"NOPE0000000000").is_err());
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(DetectorBundle::from_bytes(&trailing).is_err());
    let manifest = checkpoint_manifest(&bytes).unwrap();
    assert!(manifest.to_string().contains("schema_version"));
}
