//! Record types, JSONL ingestion, seeded splits and the synthetic generator.

mod io;
pub mod lexicon;
mod records;
mod split;
mod synth;

pub use io::{load_jsonl, write_jsonl, LabelRecord};
pub use records::{timestamp, Label, TweetRecord, UserRecord};
pub use split::{resample_to_ratio, split_dataset, undersample_majority, DatasetSplit, SplitRatios, Train};
pub use synth::{synth_generate, synth_generate_with, synth_reference_time, SynthSpec};

use crate::error::{Error, Result};
use chrono::{DateTime, Utc};
use std::collections::{BTreeSet, HashMap};

/// Users with their tweets, aligned by index.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub users: Vec<UserRecord>,
    pub tweets: Vec<Vec<TweetRecord>>,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Groups tweets under their users; every tweet must reference a known user.
    pub fn new(users: Vec<UserRecord>, tweets: Vec<TweetRecord>) -> Result<Self> {
        let mut index = HashMap::with_capacity(users.len());
        for (i, u) in users.iter().enumerate() {
            if index.insert(u.user_id.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate user_id {:?}", u.user_id)));
            }
        }
        let mut grouped = vec![Vec::new(); users.len()];
        let mut missing = BTreeSet::new();
        for t in tweets {
            match index.get(&t.user_id) {
                Some(&i) => grouped[i].push(t),
                None => {
                    missing.insert(t.user_id.clone());
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::Referential { ids: missing.into_iter().collect() });
        }
        Ok(Self { users, tweets: grouped, index })
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn position(&self, user_id: &str) -> Option<usize> {
        self.index.get(user_id).copied()
    }

    pub fn label_of(&self, user_id: &str) -> Option<Label> {
        self.position(user_id).map(|i| self.users[i].label)
    }

    /// Ids of users labelled human or bot, in corpus order.
    pub fn labeled_ids(&self) -> Vec<String> {
        self.users.iter().filter(|u| u.label != Label::Unknown).map(|u| u.user_id.clone()).collect()
    }

    pub fn labels(&self) -> HashMap<String, Label> {
        self.users.iter().map(|u| (u.user_id.clone(), u.label)).collect()
    }

    /// Latest timestamp seen anywhere in the corpus; the reference point
    /// for account age.
    pub fn reference_time(&self) -> Option<DateTime<Utc>> {
        let users = self.users.iter().map(|u| u.created_at);
        let tweets = self.tweets.iter().flatten().map(|t| t.created_at);
        users.chain(tweets).max()
    }

    pub fn num_tweets(&self) -> usize {
        self.tweets.iter().map(Vec::len).sum()
    }
}
