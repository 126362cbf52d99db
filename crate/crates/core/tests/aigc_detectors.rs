mod common;

use common::{sample_row, RandomScorer};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracebot::aigc_signals::*;
use tracebot::Error;

struct UniformScorer(usize);

impl LanguageModelScorer for UniformScorer {
    fn vocab_size(&self) -> usize {
        self.0
    }
    fn max_context(&self) -> usize {
        128
    }
    fn encode(&self, _: &str) -> Vec<u32> {
        Vec::new()
    }
    fn logprobs(&self, tokens: &[u32]) -> Vec<Vec<f64>> {
        vec![vec![-(self.0 as f64).ln(); self.0]; tokens.len()]
    }
}

#[test]
fn analytic_curvature_matches_monte_carlo() {
    let scorer = RandomScorer { v: 50, seed: 11, scale: 1.5 };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tokens: Vec<u32> = (0..16).map(|_| rng.gen_range(0..50)).collect();
    let lp = conditional_logprobs(&scorer, &tokens).unwrap();
    let analytic = curvature_from_logprobs(&tokens, &lp);
    assert!(!analytic.degenerate);

    // Sampling estimator: alternative tokens drawn per position from the
    // model's conditional distribution given the observed prefix.
    let n = 100_000;
    let observed: f64 = tokens.iter().zip(&lp).map(|(&x, row)| row[x as usize]).sum();
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let l: f64 = lp.iter().map(|row| row[sample_row(row, rng.gen())]).sum();
        s1 += l;
        s2 += l * l;
    }
    let mean = s1 / n as f64;
    let std = (s2 / n as f64 - mean * mean).sqrt();
    let mc = (observed - mean) / std;
    let se = ((1.0 + mc * mc / 2.0) / n as f64).sqrt();
    assert!((analytic.value - mc).abs() < 3.0 * se, "analytic {} vs mc {} (se {se})", analytic.value, mc);
}

#[test]
fn greedy_text_is_all_rank_one() {
    let random = RandomScorer { v: 300, seed: 2, scale: 2.0 };
    let bundled = shared_scorer();
    let scorers: [&dyn LanguageModelScorer; 2] = [&random, bundled];
    for s in scorers {
        let tokens = greedy_tokens(s, 20);
        let g = gltr_from_logprobs(&tokens, &conditional_logprobs(s, &tokens).unwrap());
        assert_eq!(g.top10_frac, 1.0);
        assert_eq!(g.mean_log_rank, 0.0);
    }
}

#[test]
fn uniform_scorer_top10_rate() {
    let scorer = UniformScorer(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut hits, mut total) = (0usize, 0usize);
    for _ in 0..100 {
        let tokens: Vec<u32> = (0..100).map(|_| rng.gen_range(0..1000)).collect();
        let g = gltr_from_logprobs(&tokens, &conditional_logprobs(&scorer, &tokens).unwrap());
        hits += (g.top10_frac * 100.0).round() as usize;
        total += 100;
    }
    let rate = hits as f64 / total as f64;
    assert!((rate - 0.01).abs() <= 0.003, "top10 rate {rate}");
}

#[test]
fn sampled_text_has_higher_curvature_than_random_tokens() {
    let s = shared_scorer();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let eot = s.tokenizer.eot_id();
    let specials = 2;
    let (mut sampled, mut random) = (Vec::new(), Vec::new());
    while sampled.len() < 50 {
        let toks = s.lm.sample(eot, eot, 30, Sampling::default(), &mut rng);
        if toks.len() < 2 {
            continue;
        }
        let rand_toks: Vec<u32> = (0..toks.len()).map(|_| rng.gen_range(0..(s.vocab_size() - specials) as u32)).collect();
        for (set, t) in [(&mut sampled, &toks), (&mut random, &rand_toks)] {
            set.push(curvature_from_logprobs(t, &conditional_logprobs(s, t).unwrap()).value);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&sampled) > mean(&random), "sampled {} vs random {}", mean(&sampled), mean(&random));
}

#[test]
fn bundled_scorer_distributions_are_normalized_and_causal() {
    let s = shared_scorer();
    let tokens = s.encode("excited to share the amazing future of crypto lets go");
    let lp = conditional_logprobs(s, &tokens).unwrap();
    assert_eq!(lp.len(), tokens.len());
    for row in &lp {
        assert_eq!(row.len(), s.vocab_size());
        assert!((row.iter().map(|v| v.exp()).sum::<f64>() - 1.0).abs() < 1e-6);
    }
    let mut permuted = tokens.clone();
    permuted[4..].reverse();
    let lp2 = conditional_logprobs(s, &permuted).unwrap();
    for t in 0..=4 {
        assert_eq!(lp[t], lp2[t], "position {t}");
    }
    let first = conditional_logprobs(s, &tokens[..1]).unwrap();
    assert_eq!(first.len(), 1);
    assert_eq!(first[0], lp[0]);
}

#[test]
fn length_errors() {
    let s = shared_scorer();
    assert!(matches!(conditional_logprobs(s, &[]), Err(Error::Length(_))));
    let long = vec![5u32; s.max_context() + 1];
    assert!(matches!(conditional_logprobs(s, &long), Err(Error::Length(_))));
    assert!(matches!(score_gltr("", s), Err(Error::Score(_))));
    assert!(matches!(score_curvature("", s), Err(Error::Score(_))));
}

#[test]
fn scorer_archive_round_trip() {
    let s = shared_scorer();
    let bytes = s.to_bytes().unwrap();
    let back = BundledScorer::from_bytes(&bytes).unwrap();
    assert_eq!(&back, s);
    assert_eq!(back.to_bytes().unwrap(), bytes);
}

fn arb_score() -> impl Strategy<Value = TweetScore> {
    (0.0f64..1.0, 0.0f64..1.0, 0.0f64..5.0, prop::option::of(-10.0f64..10.0)).prop_map(|(a, b, r, c)| {
        let top10 = a;
        let top100 = (1.0 - a) * b;
        TweetScore {
            gltr_top10_frac: top10,
            gltr_top100_frac: top100,
            gltr_rest_frac: 1.0 - top10 - top100,
            gltr_mean_log_rank: r,
            curvature: c,
            token_count: 5,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gltr_fractions_partition(seed in any::<u64>(), tokens in prop::collection::vec(0u32..40, 1..30)) {
        let s = RandomScorer { v: 40, seed, scale: 1.0 };
        let g = gltr_from_logprobs(&tokens, &conditional_logprobs(&s, &tokens).unwrap());
        prop_assert!((g.top10_frac + g.top100_frac + g.rest_frac - 1.0).abs() < 1e-9);
        prop_assert!(g.mean_log_rank >= 0.0);
        prop_assert!(g.rest_frac == 0.0);
    }

    #[test]
    fn aggregation_is_permutation_invariant(scores in prop::collection::vec(arb_score(), 1..20), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let th = fit_thresholds(&scores, 0.9).unwrap_or(Thresholds { q: 0.9, values: [0.5; 5] });
        let mut shuffled = scores.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = aggregate_user_scores(&scores, &th);
        prop_assert_eq!(&a, &aggregate_user_scores(&shuffled, &th));
        for d in a.dims {
            prop_assert!(d.min <= d.mean + 1e-12 && d.mean <= d.max + 1e-12);
            prop_assert!(d.std >= 0.0 && (0.0..=1.0).contains(&d.frac_above));
        }
    }
}
