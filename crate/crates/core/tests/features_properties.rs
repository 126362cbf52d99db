use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashSet};
use tracebot::behavior_channel::{encode_behavior, fit_scaler, BehaviorEncoder, Scaler};
use tracebot::corpus::{split_dataset, timestamp, SplitRatios, Train, UserRecord};
use tracebot::nn::Mode;
use tracebot::profile_features::{assemble_profile_text, extract_profile_numeric, PromptTemplate};
use tracebot::Error;

/// Fitting APIs only take training data; wrap rows through a real split.
fn as_train<T>(inner: T) -> Train<T> {
    let ids: Vec<String> = (0..10).map(|i| format!("u{i}")).collect();
    split_dataset(&ids, SplitRatios::new(0.6, 0.2, 0.2), 0).unwrap().train_handle().map(|_| inner)
}

#[test]
fn scaler_three_by_two_golden() {
    let s = fit_scaler(&as_train(vec![vec![1.0, 10.0], vec![2.0, 20.0], vec![6.0, 30.0]])).unwrap();
    assert_eq!(s.mean, vec![3.0, 20.0]);
    assert!((s.std[0] - 2.160_246_899_469_287).abs() < 1e-12);
    assert!((s.std[1] - 8.164_965_809_277_26).abs() < 1e-12);
    let t = s.transform(&[6.0, 10.0]).unwrap();
    assert!((t[0] - 1.388_730_149_658_827).abs() < 1e-12);
    assert!((t[1] + 1.224_744_871_391_589).abs() < 1e-12);
}

#[test]
fn scaler_errors() {
    assert!(matches!(fit_scaler(&as_train(vec![vec![1.0]])), Err(Error::Fit(_))));
    assert!(matches!(fit_scaler(&as_train(vec![vec![1.0], vec![1.0, 2.0]])), Err(Error::Shape { .. })));
    let s = Scaler { mean: vec![0.0; 3], std: vec![1.0; 3] };
    assert!(matches!(s.transform(&[1.0]), Err(Error::Shape { expected: 3, actual: 1 })));
    let enc = BehaviorEncoder::<f64>::new(3, 4, 0.2, 0);
    assert!(matches!(encode_behavior(&[0.0; 5], &s, &enc, &mut Mode::Eval), Err(Error::Shape { .. })));
}

#[test]
fn behavior_encoding_is_deterministic_and_nonnegative() {
    let s = Scaler { mean: vec![0.5; 6], std: vec![2.0; 6] };
    let enc = BehaviorEncoder::<f64>::new(6, 32, 0.2, 1);
    let x = [1.0, -3.0, 0.2, 8.0, -0.5, 4.0];
    let a = encode_behavior(&x, &s, &enc, &mut Mode::Eval).unwrap();
    assert_eq!(a, encode_behavior(&x, &s, &enc, &mut Mode::Eval).unwrap());
    assert!(a.iter().all(|&v| v >= 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = encode_behavior(&x, &s, &enc, &mut Mode::Train(&mut rng)).unwrap();
    assert!(t.iter().zip(&a).all(|(&t, &e)| t == 0.0 || (t - e / 0.8).abs() < 1e-12));
}

proptest! {
    #[test]
    fn standardized_training_columns_have_zero_mean(rows in prop::collection::vec(prop::collection::vec(-1e4f64..1e4, 5), 2..60)) {
        let s = fit_scaler(&as_train(rows.clone())).unwrap();
        prop_assert!(s.std.iter().all(|&v| v > 0.0));
        let t: Vec<Vec<f64>> = rows.iter().map(|r| s.transform(r).unwrap()).collect();
        for j in 0..5 {
            let mean = t.iter().map(|r| r[j]).sum::<f64>() / t.len() as f64;
            prop_assert!(mean.abs() < 1e-9, "column {} mean {}", j, mean);
        }
    }
}

fn user(display: &str, screen: &str, location: Option<&str>, bio: Option<&str>) -> UserRecord {
    let mut u: UserRecord =
        serde_json::from_str(r#"{"user_id":"7","created_at":"2021-05-01T00:00:00Z"}"#).unwrap();
    u.display_name = display.into();
    u.screen_name = screen.into();
    u.location = location.map(Into::into);
    u.description = bio.map(Into::into);
    u
}

fn tokens(s: &str) -> BTreeSet<String> {
    s.split(|c: char| c.is_whitespace() || matches!(c, ',' | '.' | ':'))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn template_words(t: PromptTemplate) -> BTreeSet<String> {
    let mut p = t.pattern().unwrap().to_string();
    for ph in ["{combined_text}", "{name}", "{location}", "{description}"] {
        p = p.replace(ph, " ");
    }
    tokens(&p)
}

fn words(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec("X[a-z0-9]{1,6}", 1..=max).prop_map(|w| w.join(" "))
}

fn counts() -> impl Strategy<Value = [u64; 5]> {
    prop::array::uniform5(0u64..10_000_000)
}

proptest! {
    #[test]
    fn templates_keep_the_record_tokens(
        display in words(2), screen in "X[a-z0-9]{2,10}", location in prop::option::of(words(2)), bio in prop::option::of(words(6)),
    ) {
        let u = user(&display, &screen, location.as_deref(), bio.as_deref());
        let plain = assemble_profile_text(&u, PromptTemplate::None);
        let plain_tokens = tokens(&plain);
        for t in PromptTemplate::ALL.into_iter().skip(1) {
            let text = assemble_profile_text(&u, t);
            let fixed = template_words(t);
            let own: BTreeSet<String> = tokens(&text).difference(&fixed).cloned().collect();
            prop_assert_eq!(&own, &plain_tokens, "template {}", t.as_str());
            if !fixed.is_empty() {
                prop_assert_ne!(&text, &plain);
            }
        }
    }

    #[test]
    fn untemplated_text_adds_only_spaces(display in "\\PC{0,12}", screen in "\\PC{0,12}", location in prop::option::of("\\PC{0,12}"), bio in prop::option::of("\\PC{0,40}")) {
        let u = user(&display, &screen, location.as_deref(), bio.as_deref());
        let allowed: HashSet<char> = [&display, &screen, location.as_ref().unwrap_or(&String::new()), bio.as_ref().unwrap_or(&String::new())]
            .iter()
            .flat_map(|s| s.chars())
            .chain([' '])
            .collect();
        let text = assemble_profile_text(&u, PromptTemplate::None);
        prop_assert!(text.chars().all(|c| allowed.contains(&c)), "{:?}", text);
    }

    #[test]
    fn counts_are_monotone(base in counts(), bump in 1u64..1_000_000, which in 0usize..5) {
        let reference = timestamp::parse("2023-01-01T00:00:00Z").unwrap();
        let set = |u: &mut UserRecord, c: [u64; 5]| {
            u.followers_count = c[0];
            u.friends_count = c[1];
            u.listed_count = c[2];
            u.statuses_count = c[3];
            u.favourites_count = c[4];
        };
        let mut lo = user("a", "b", None, None);
        set(&mut lo, base);
        let mut bumped = base;
        bumped[which] += bump;
        let mut hi = lo.clone();
        set(&mut hi, bumped);
        let a = extract_profile_numeric(&lo, reference).unwrap();
        let b = extract_profile_numeric(&hi, reference).unwrap();
        prop_assert!(b[1 + which] > a[1 + which]);
        for j in (1..6).filter(|&j| j != 1 + which) {
            prop_assert_eq!(a[j], b[j]);
        }
        prop_assert!(a.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn key_order_does_not_matter(seed in any::<u64>(), base in counts()) {
        let reference = timestamp::parse("2023-01-01T00:00:00Z").unwrap();
        let mut u = user("Ann Lee", "ann_1984", Some("Ohio"), Some("coffee first"));
        u.followers_count = base[0];
        u.friends_count = base[1];
        u.url = Some("https://example.org".into());
        let value = serde_json::to_value(&u).unwrap();
        let mut entries: Vec<(String, serde_json::Value)> = value.as_object().unwrap().clone().into_iter().collect();
        entries.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let body: Vec<String> = entries.iter().map(|(k, v)| format!("{}:{}", serde_json::to_string(k).unwrap(), v)).collect();
        let reordered: UserRecord = serde_json::from_str(&format!("{{{}}}", body.join(","))).unwrap();
        prop_assert_eq!(extract_profile_numeric(&u, reference).unwrap(), extract_profile_numeric(&reordered, reference).unwrap());
        prop_assert_eq!(assemble_profile_text(&u, PromptTemplate::None), assemble_profile_text(&reordered, PromptTemplate::None));
    }
}
