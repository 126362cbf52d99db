use super::{Corpus, Label, TweetRecord, UserRecord};
use crate::error::{Error, Result};
use chrono::Utc;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelRecord {
    pub user_id: String,
    pub label: Label,
}

fn read_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

/// Reads users, tweets and labels from JSON-lines files.
///
/// Unknown keys are ignored. Users absent from the labels file keep the
/// label carried on their own record (default `unknown`).
pub fn load_jsonl(users_path: &Path, tweets_path: &Path, labels_path: Option<&Path>) -> Result<Corpus> {
    let now = Utc::now();
    let users: Vec<(usize, UserRecord)> = read_lines(users_path)?;
    for (line, u) in &users {
        if u.created_at > now {
            return Err(Error::Parse {
                path: users_path.to_path_buf(),
                line: *line,
                message: format!("created_at {} is in the future", u.created_at),
            });
        }
    }
    let mut users: Vec<UserRecord> = users.into_iter().map(|(_, u)| u).collect();
    let tweets: Vec<TweetRecord> = read_lines(tweets_path)?.into_iter().map(|(_, t)| t).collect();

    if let Some(lp) = labels_path {
        let labels: Vec<(usize, LabelRecord)> = read_lines(lp)?;
        let index: HashMap<&str, usize> = users.iter().enumerate().map(|(i, u)| (u.user_id.as_str(), i)).collect();
        let mut missing = BTreeSet::new();
        let mut assign = Vec::with_capacity(labels.len());
        for (line, l) in labels {
            if l.label == Label::Unknown {
                return Err(Error::Parse {
                    path: lp.to_path_buf(),
                    line,
                    message: "label must be \"human\" or \"bot\"".into(),
                });
            }
            match index.get(l.user_id.as_str()) {
                Some(&i) => assign.push((i, l.label)),
                None => {
                    missing.insert(l.user_id);
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::Referential { ids: missing.into_iter().collect() });
        }
        for (i, label) in assign {
            users[i].label = label;
        }
    }
    Corpus::new(users, tweets)
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `users.jsonl`, `tweets.jsonl` and `labels.jsonl` into `dir`.
pub fn write_jsonl(corpus: &Corpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_lines(&dir.join("users.jsonl"), corpus.users.iter())?;
    write_lines(&dir.join("tweets.jsonl"), corpus.tweets.iter().flatten())?;
    write_lines(
        &dir.join("labels.jsonl"),
        corpus
            .users
            .iter()
            .filter(|u| u.label != Label::Unknown)
            .map(|u| LabelRecord { user_id: u.user_id.clone(), label: u.label }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        let mut f = File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    const USER: &str = r#"{"user_id":"u1","screen_name":"a","display_name":"A","created_at":"2020-01-01T00:00:00Z","followers_count":3,"extra_key":true}"#;

    #[test]
    fn empty_users_file_is_ok() {
        let d = tempfile::tempdir().unwrap();
        let u = write(d.path(), "u.jsonl", "");
        let t = write(d.path(), "t.jsonl", "");
        let c = load_jsonl(&u, &t, None).unwrap();
        assert!(c.users.is_empty());
    }

    #[test]
    fn missing_location_is_absent_and_zero_tweet_users_kept() {
        let d = tempfile::tempdir().unwrap();
        let u = write(d.path(), "u.jsonl", USER);
        let t = write(d.path(), "t.jsonl", "");
        let c = load_jsonl(&u, &t, None).unwrap();
        assert_eq!(c.users[0].location, None);
        assert_eq!(c.tweets.len(), 1);
        assert!(c.tweets[0].is_empty());
        assert_eq!(c.users[0].label, Label::Unknown);
    }

    #[test]
    fn unknown_user_in_tweets_is_named() {
        let d = tempfile::tempdir().unwrap();
        let u = write(d.path(), "u.jsonl", USER);
        let t = write(
            d.path(),
            "t.jsonl",
            r#"{"tweet_id":"t1","user_id":"x999","created_at":"2021-01-01T00:00:00Z","text":"hi"}"#,
        );
        let err = load_jsonl(&u, &t, None).unwrap_err();
        match &err {
            Error::Referential { ids } => assert_eq!(ids, &vec!["x999".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("x999"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let d = tempfile::tempdir().unwrap();
        let u = write(d.path(), "u.jsonl", &format!("{USER}\n{{not json\n"));
        let t = write(d.path(), "t.jsonl", "");
        match load_jsonl(&u, &t, None).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_count_rejected() {
        let d = tempfile::tempdir().unwrap();
        let u = write(d.path(), "u.jsonl", &USER.replace("\"followers_count\":3", "\"followers_count\":-3"));
        let t = write(d.path(), "t.jsonl", "");
        assert!(matches!(load_jsonl(&u, &t, None), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn labels_are_applied() {
        let d = tempfile::tempdir().unwrap();
        let u = write(d.path(), "u.jsonl", USER);
        let t = write(d.path(), "t.jsonl", "");
        let l = write(d.path(), "l.jsonl", r#"{"user_id":"u1","label":"bot"}"#);
        let c = load_jsonl(&u, &t, Some(&l)).unwrap();
        assert_eq!(c.users[0].label, Label::Bot);
    }
}
