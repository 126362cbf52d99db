//! Seeded synthetic corpora with a tunable gap between the human and bot
//! generators.

use super::lexicon::*;
use super::{Corpus, Label, TweetRecord, UserRecord};
use crate::aigc_signals::{fill_template, shared_scorer, BundledScorer, Sampling};
use crate::error::{Error, Result};
use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, LogNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub humans: usize,
    pub bots: usize,
    /// Probability that each bot attribute group comes from the bot generator.
    pub separability: f64,
    #[serde(default = "default_min_tweets")]
    pub min_tweets: usize,
    #[serde(default = "default_max_tweets")]
    pub max_tweets: usize,
}

fn default_min_tweets() -> usize {
    10
}

fn default_max_tweets() -> usize {
    20
}

impl SynthSpec {
    pub fn new(humans: usize, bots: usize, separability: f64) -> Self {
        Self { humans, bots, separability, min_tweets: default_min_tweets(), max_tweets: default_max_tweets() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.humans == 0 || self.bots == 0 {
            return Err(Error::Config(format!("synth needs positive class counts, got {} humans / {} bots", self.humans, self.bots)));
        }
        if !(0.0..=1.0).contains(&self.separability) {
            return Err(Error::Config(format!("separability {} outside [0, 1]", self.separability)));
        }
        if self.min_tweets == 0 || self.min_tweets > self.max_tweets {
            return Err(Error::Config(format!("invalid tweet range {}..={}", self.min_tweets, self.max_tweets)));
        }
        Ok(())
    }
}

/// Latest instant any generated record can carry.
pub fn synth_reference_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2023, 6, 1, 0, 0, 0).single().expect("valid date")
}

const BOT_POOL: usize = 400;

/// Generates with the shared bundled scorer as the bot text sampler.
pub fn synth_generate(spec: &SynthSpec, seed: u64) -> Result<Corpus> {
    spec.validate()?;
    synth_generate_with(spec, seed, shared_scorer())
}

pub fn synth_generate_with(spec: &SynthSpec, seed: u64, sampler: &BundledScorer) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Bots re-post from a shared pool of model-sampled texts.
    let sampling = Sampling { temperature: 0.9, top_k: 20 };
    let pool: Vec<String> = (0..BOT_POOL)
        .map(|_| {
            let t = sampler.generate(24, sampling, &mut rng);
            if t.split_whitespace().count() >= 2 {
                t
            } else {
                fill_template("{opener} the {adj} {noun} of {topic} {closer}", &mut rng)
            }
        })
        .collect();

    let mut classes: Vec<Label> = std::iter::repeat_n(Label::Human, spec.humans)
        .chain(std::iter::repeat_n(Label::Bot, spec.bots))
        .collect();
    classes.shuffle(&mut rng);
    let user_seeds: Vec<u64> = classes.iter().map(|_| rng.gen()).collect();

    let mut users = Vec::with_capacity(classes.len());
    let mut tweets = Vec::new();
    for (i, (&label, &useed)) in classes.iter().zip(&user_seeds).enumerate() {
        let mut r = ChaCha8Rng::seed_from_u64(useed);
        let user_id = format!("u{i:06}");
        let bot = label == Label::Bot;
        let group = |r: &mut ChaCha8Rng| bot && r.gen::<f64>() < spec.separability;
        let (bot_profile, bot_bio, bot_behavior, bot_text) = (group(&mut r), group(&mut r), group(&mut r), group(&mut r));
        let mut user = if bot_profile { bot_profile_record(&mut r, &user_id) } else { human_profile_record(&mut r, &user_id) };
        user.description = if bot_bio { Some(bot_bio_text(&mut r)) } else { human_bio_text(&mut r) };
        user.label = label;
        let n = r.gen_range(spec.min_tweets..=spec.max_tweets);
        let (symbols, times) = if bot_behavior {
            bot_behavior_events(&mut r, n, user.created_at)
        } else {
            human_behavior_events(&mut r, n, user.created_at)
        };
        for (k, (sym, at)) in symbols.into_iter().zip(times).enumerate() {
            let text = if bot_text { pool.choose(&mut r).expect("non-empty pool").clone() } else { human_tweet_text(&mut r) };
            tweets.push(TweetRecord {
                tweet_id: format!("{user_id}-{k:03}"),
                user_id: user_id.clone(),
                created_at: at,
                text,
                in_reply_to_status_id: (sym == 'P').then(|| format!("{}", r.gen_range(10_000_000u64..99_999_999))),
                in_reply_to_user_id: None,
                retweeted_status_id: (sym == 'R').then(|| format!("{}", r.gen_range(10_000_000u64..99_999_999))),
            });
        }
        users.push(user);
    }
    Corpus::new(users, tweets)
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map(|f| f.to_uppercase().collect::<String>() + c.as_str()).unwrap_or_default()
}

fn lognormal(r: &mut ChaCha8Rng, median: f64, sigma: f64) -> u64 {
    LogNormal::new(median.ln(), sigma).expect("valid lognormal").sample(r).round() as u64
}

fn base_user(user_id: &str, screen_name: String, display_name: String, created_at: DateTime<Utc>) -> UserRecord {
    UserRecord {
        user_id: user_id.to_string(),
        screen_name,
        display_name,
        created_at,
        description: None,
        location: None,
        url: None,
        followers_count: 0,
        friends_count: 0,
        listed_count: 0,
        statuses_count: 0,
        favourites_count: 0,
        verified: false,
        protected: false,
        geo_enabled: false,
        has_profile_image: false,
        has_banner: false,
        team_managed: false,
        lang: None,
        time_zone: None,
        label: Label::Unknown,
    }
}

fn human_profile_record(r: &mut ChaCha8Rng, user_id: &str) -> UserRecord {
    let (first, last) = (*FIRST_NAMES.choose(r).unwrap(), *LAST_NAMES.choose(r).unwrap());
    let screen = match r.gen_range(0..4) {
        0 => format!("{first}{last}"),
        1 => format!("{first}_{last}"),
        2 => format!("{}{last}", &first[..1]),
        _ => format!("{first}{}", r.gen_range(1..100)),
    };
    let created = synth_reference_time() - Duration::days(r.gen_range(200..4000)) - Duration::seconds(r.gen_range(0..86_400));
    let mut u = base_user(user_id, screen, format!("{} {}", capitalize(first), capitalize(last)), created);
    u.followers_count = lognormal(r, 300.0, 1.2);
    u.friends_count = lognormal(r, 250.0, 1.0);
    u.listed_count = lognormal(r, 4.0, 1.0);
    u.statuses_count = lognormal(r, 3000.0, 1.0);
    u.favourites_count = lognormal(r, 5000.0, 1.2);
    u.location = r.gen_bool(0.75).then(|| CITIES.choose(r).unwrap().to_string());
    u.url = r.gen_bool(0.35).then(|| format!("https://{first}{last}.example.com"));
    u.has_profile_image = r.gen_bool(0.95);
    u.has_banner = r.gen_bool(0.7);
    u.verified = r.gen_bool(0.03);
    u.protected = r.gen_bool(0.05);
    u.geo_enabled = r.gen_bool(0.3);
    u.team_managed = r.gen_bool(0.01);
    u.lang = r.gen_bool(0.9).then(|| LANGS.choose(r).unwrap().to_string());
    u.time_zone = r.gen_bool(0.6).then(|| TIME_ZONES.choose(r).unwrap().to_string());
    u
}

fn bot_profile_record(r: &mut ChaCha8Rng, user_id: &str) -> UserRecord {
    let (pre, suf) = (*BOT_NAME_PREFIXES.choose(r).unwrap(), *BOT_NAME_SUFFIXES.choose(r).unwrap());
    let digits: String = (0..r.gen_range(4..9)).map(|_| char::from(b'0' + r.gen_range(0..10u8))).collect();
    let display = format!("{} {}", pre.to_uppercase(), capitalize(suf));
    let created = synth_reference_time() - Duration::days(r.gen_range(10..400)) - Duration::seconds(r.gen_range(0..86_400));
    let mut u = base_user(user_id, format!("{pre}{suf}{digits}"), display, created);
    u.followers_count = lognormal(r, 30.0, 0.8);
    u.friends_count = lognormal(r, 1500.0, 0.5);
    u.listed_count = lognormal(r, 0.5, 0.8);
    u.statuses_count = lognormal(r, 800.0, 0.8);
    u.favourites_count = lognormal(r, 100.0, 1.0);
    u.location = r.gen_bool(0.3).then(|| STYLE_TOPICS.choose(r).unwrap().to_string());
    u.url = r.gen_bool(0.6).then(|| format!("https://{pre}{suf}.example.io"));
    u.has_profile_image = r.gen_bool(0.6);
    u.has_banner = r.gen_bool(0.3);
    u.geo_enabled = r.gen_bool(0.05);
    u.lang = Some("en".to_string());
    u.time_zone = r.gen_bool(0.2).then(|| TIME_ZONES.choose(r).unwrap().to_string());
    u
}

fn broad_words(r: &mut ChaCha8Rng, lo: usize, hi: usize) -> String {
    let n = r.gen_range(lo..=hi);
    (0..n).map(|_| *BROAD.choose(r).unwrap()).collect::<Vec<_>>().join(" ")
}

fn human_bio_text(r: &mut ChaCha8Rng) -> Option<String> {
    r.gen_bool(0.85).then(|| broad_words(r, 4, 14))
}

fn bot_bio_text(r: &mut ChaCha8Rng) -> String {
    fill_template(BOT_BIO_TEMPLATES.choose(r).unwrap(), r)
}

fn human_tweet_text(r: &mut ChaCha8Rng) -> String {
    broad_words(r, 5, 16)
}

/// Per-user Dirichlet(1,1,1) type mix with bursty, heavy-tailed gaps.
fn human_behavior_events(r: &mut ChaCha8Rng, n: usize, created: DateTime<Utc>) -> (Vec<char>, Vec<DateTime<Utc>>) {
    let g = Gamma::new(1.0, 1.0).expect("valid gamma");
    let w: Vec<f64> = (0..3).map(|_| g.sample(r)).collect();
    let total: f64 = w.iter().sum();
    let symbols = (0..n)
        .map(|_| {
            let u = r.gen::<f64>() * total;
            if u < w[0] {
                'O'
            } else if u < w[0] + w[1] {
                'R'
            } else {
                'P'
            }
        })
        .collect();
    let short = Exp::new(1.0 / 600.0).expect("valid rate");
    let long = Exp::new(1.0 / 172_800.0).expect("valid rate");
    let gaps: Vec<f64> = (0..n).map(|_| if r.gen_bool(0.6) { short.sample(r) } else { long.sample(r) } + 1.0).collect();
    (symbols, place_events(r, &gaps, created))
}

/// A short repeating motif posted on a near-fixed schedule.
fn bot_behavior_events(r: &mut ChaCha8Rng, n: usize, created: DateTime<Utc>) -> (Vec<char>, Vec<DateTime<Utc>>) {
    let motif: Vec<char> = (0..r.gen_range(1..=3)).map(|_| ['O', 'R', 'P'][r.gen_range(0..3)]).collect();
    let symbols = motif.iter().copied().cycle().take(n).collect();
    let period = 900.0 * r.gen_range(1..=8) as f64;
    let gaps: Vec<f64> = (0..n).map(|_| period + r.gen_range(-20.0..20.0)).collect();
    (symbols, place_events(r, &gaps, created))
}

/// Lays gaps backwards from a random end point, clamped after `created`.
fn place_events(r: &mut ChaCha8Rng, gaps: &[f64], created: DateTime<Utc>) -> Vec<DateTime<Utc>> {
    let reference = synth_reference_time();
    let span: f64 = gaps.iter().skip(1).sum();
    let room = (reference - created).num_seconds() as f64;
    let end_offset = r.gen_range(0.0..(30.0 * 86_400.0f64).min(room * 0.5).max(1.0));
    let span = span.min((room - end_offset).max(0.0));
    let start = reference - Duration::seconds((end_offset + span).round() as i64);
    let mut t = start;
    let mut out = Vec::with_capacity(gaps.len());
    for (k, g) in gaps.iter().enumerate() {
        if k > 0 {
            t += Duration::seconds(g.round().max(1.0) as i64);
        }
        out.push(t.min(reference).max(created));
    }
    out
}
