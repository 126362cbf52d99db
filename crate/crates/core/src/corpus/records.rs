use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Human,
    Bot,
    #[default]
    Unknown,
}

impl Label {
    /// Class index: human = 0, bot = 1.
    pub fn class(self) -> Option<usize> {
        match self {
            Label::Human => Some(0),
            Label::Bot => Some(1),
            Label::Unknown => None,
        }
    }

    pub fn from_class(c: usize) -> Self {
        if c == 1 {
            Label::Bot
        } else {
            Label::Human
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Human => "human",
            Label::Bot => "bot",
            Label::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    #[serde(alias = "id_str")]
    pub user_id: String,
    #[serde(default)]
    pub screen_name: String,
    #[serde(default, alias = "name")]
    pub display_name: String,
    #[serde(with = "timestamp")]
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default)]
    pub followers_count: u64,
    #[serde(default)]
    pub friends_count: u64,
    #[serde(default)]
    pub listed_count: u64,
    #[serde(default)]
    pub statuses_count: u64,
    #[serde(default)]
    pub favourites_count: u64,
    #[serde(default)]
    pub verified: bool,
    #[serde(default)]
    pub protected: bool,
    #[serde(default)]
    pub geo_enabled: bool,
    #[serde(default)]
    pub has_profile_image: bool,
    #[serde(default)]
    pub has_banner: bool,
    #[serde(default)]
    pub team_managed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_zone: Option<String>,
    #[serde(default)]
    pub label: Label,
}

/// A post. Nested `retweeted_status` objects are flattened to
/// `retweeted_status_id` on ingestion; empty ids are treated as absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub user_id: String,
    #[serde(with = "timestamp")]
    pub created_at: DateTime<Utc>,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_reply_to_status_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_reply_to_user_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retweeted_status_id: Option<String>,
}

#[derive(Deserialize)]
struct RawTweet {
    #[serde(alias = "id_str")]
    tweet_id: Value,
    user_id: Value,
    #[serde(with = "timestamp")]
    created_at: DateTime<Utc>,
    #[serde(default, alias = "full_text")]
    text: String,
    #[serde(default)]
    in_reply_to_status_id: Value,
    #[serde(default)]
    in_reply_to_user_id: Value,
    #[serde(default)]
    retweeted_status_id: Value,
    #[serde(default)]
    retweeted_status: Value,
}

fn id_of(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Object(map) => map.get("id_str").or_else(|| map.get("id")).and_then(id_of),
        _ => None,
    }
}

impl<'de> Deserialize<'de> for TweetRecord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawTweet::deserialize(d)?;
        let tweet_id = id_of(&raw.tweet_id).ok_or_else(|| serde::de::Error::custom("missing tweet_id"))?;
        let user_id = id_of(&raw.user_id).ok_or_else(|| serde::de::Error::custom("missing user_id"))?;
        let retweeted_status_id = id_of(&raw.retweeted_status_id).or_else(|| match &raw.retweeted_status {
            Value::Null => None,
            // A present but id-less nested object still marks a retweet.
            Value::Object(_) => id_of(&raw.retweeted_status).or_else(|| Some("unknown".to_string())),
            other => id_of(other),
        });
        Ok(TweetRecord {
            tweet_id,
            user_id,
            created_at: raw.created_at,
            text: raw.text,
            in_reply_to_status_id: id_of(&raw.in_reply_to_status_id),
            in_reply_to_user_id: id_of(&raw.in_reply_to_user_id),
            retweeted_status_id,
        })
    }
}

/// RFC 3339 on output; RFC 3339 or the legacy Twitter format
/// (`Wed Oct 10 20:19:24 +0000 2018`) on input.
pub mod timestamp {
    use super::*;

    pub fn format(t: &DateTime<Utc>) -> String {
        t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
    }

    pub fn parse(s: &str) -> Option<DateTime<Utc>> {
        if let Ok(t) = DateTime::parse_from_rfc3339(s) {
            return Some(t.with_timezone(&Utc));
        }
        if let Ok(t) = DateTime::parse_from_str(s, "%a %b %d %H:%M:%S %z %Y") {
            return Some(t.with_timezone(&Utc));
        }
        NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S").ok().map(|n| n.and_utc())
    }

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid timestamp {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_retweet_is_flattened() {
        let t: TweetRecord = serde_json::from_str(
            r#"{"tweet_id":"1","user_id":"u","created_at":"2023-01-01T00:00:00Z","text":"x","retweeted_status":{"id_str":"77"}}"#,
        )
        .unwrap();
        assert_eq!(t.retweeted_status_id.as_deref(), Some("77"));
    }

    #[test]
    fn empty_and_null_ids_are_absent() {
        let t: TweetRecord = serde_json::from_str(
            r#"{"tweet_id":"1","user_id":"u","created_at":"2023-01-01T00:00:00Z","text":"x","in_reply_to_status_id":"","in_reply_to_user_id":null}"#,
        )
        .unwrap();
        assert!(t.in_reply_to_status_id.is_none());
        assert!(t.in_reply_to_user_id.is_none());
    }

    #[test]
    fn twitter_timestamp_format() {
        let t = timestamp::parse("Wed Oct 10 20:19:24 +0000 2018").unwrap();
        assert_eq!(timestamp::format(&t), "2018-10-10T20:19:24Z");
    }
}
