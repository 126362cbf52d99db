//! Numeric profile columns for the behavior channel and assembled profile
//! text for the text channel.

use crate::corpus::UserRecord;
use crate::error::{Error, Result};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub const PROFILE_DIM: usize = 20;

pub const PROFILE_COLUMNS: [&str; PROFILE_DIM] = [
    "account_age_days",
    "log1p_followers",
    "log1p_friends",
    "log1p_listed",
    "log1p_statuses",
    "log1p_favourites",
    "follower_friend_log_ratio",
    "bio_length_chars",
    "has_bio",
    "has_url",
    "has_location",
    "has_profile_image",
    "has_banner",
    "verified",
    "protected",
    "geo_enabled_disabled_flag",
    "team_managed",
    "lang_is_default",
    "has_time_zone",
    "screen_name_digit_fraction",
];

fn present(field: &Option<String>) -> Option<&str> {
    field.as_deref().map(str::trim).filter(|s| !s.is_empty())
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn digit_fraction(s: &str) -> f64 {
    let n = s.chars().count();
    if n == 0 {
        return 0.0;
    }
    s.chars().filter(char::is_ascii_digit).count() as f64 / n as f64
}

pub fn extract_profile_numeric(user: &UserRecord, reference_time: DateTime<Utc>) -> Result<[f64; PROFILE_DIM]> {
    if user.created_at > reference_time {
        return Err(Error::Temporal(format!(
            "user {} created at {} after reference time {}",
            user.user_id, user.created_at, reference_time
        )));
    }
    let age_days = (reference_time - user.created_at).num_seconds() as f64 / 86_400.0;
    let ln = |c: u64| (c as f64).ln_1p();
    let bio = present(&user.description);
    let lang_default = match present(&user.lang) {
        None => true,
        Some(l) => l.eq_ignore_ascii_case("en"),
    };
    Ok([
        age_days,
        ln(user.followers_count),
        ln(user.friends_count),
        ln(user.listed_count),
        ln(user.statuses_count),
        ln(user.favourites_count),
        ln(user.followers_count) - ln(user.friends_count),
        bio.map_or(0, |b| b.chars().count()) as f64,
        flag(bio.is_some()),
        flag(present(&user.url).is_some()),
        flag(present(&user.location).is_some()),
        flag(user.has_profile_image),
        flag(user.has_banner),
        flag(user.verified),
        flag(user.protected),
        flag(user.geo_enabled),
        flag(user.team_managed),
        flag(lang_default),
        flag(present(&user.time_zone).is_some()),
        digit_fraction(&user.screen_name),
    ])
}

/// Profile text layouts: the raw concatenation or one of four prompt templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptTemplate {
    #[default]
    None,
    FieldsReversed,
    ProfileSentence,
    ClassifyInstruction,
    ProfilePrefix,
}

impl PromptTemplate {
    pub const ALL: [PromptTemplate; 5] = [
        PromptTemplate::None,
        PromptTemplate::FieldsReversed,
        PromptTemplate::ProfileSentence,
        PromptTemplate::ClassifyInstruction,
        PromptTemplate::ProfilePrefix,
    ];

    pub fn pattern(self) -> Option<&'static str> {
        match self {
            PromptTemplate::None => None,
            PromptTemplate::FieldsReversed => Some("{description} {location} {name}"),
            PromptTemplate::ProfileSentence => Some(
                "This user's profile: name is {name}, located in {location}, and describes themselves as: {description}.",
            ),
            PromptTemplate::ClassifyInstruction => Some(
                "Classify whether this social media account is a bot or human based on the following profile information: Name: {name}, Location: {location}, Profile: {combined_text}",
            ),
            PromptTemplate::ProfilePrefix => Some("Profile: {combined_text}"),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PromptTemplate::None => "none",
            PromptTemplate::FieldsReversed => "fields_reversed",
            PromptTemplate::ProfileSentence => "profile_sentence",
            PromptTemplate::ClassifyInstruction => "classify_instruction",
            PromptTemplate::ProfilePrefix => "profile_prefix",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown prompt template {s:?}")))
    }
}

fn join_present<'a>(parts: impl IntoIterator<Item = &'a str>) -> String {
    parts.into_iter().map(str::trim).filter(|s| !s.is_empty()).collect::<Vec<_>>().join(" ")
}

/// `{display_name} {screen_name} {location} {description}` with absent
/// fields skipped.
pub fn combined_text(user: &UserRecord) -> String {
    join_present([
        user.display_name.as_str(),
        user.screen_name.as_str(),
        user.location.as_deref().unwrap_or(""),
        user.description.as_deref().unwrap_or(""),
    ])
}

pub fn assemble_profile_text(user: &UserRecord, template: PromptTemplate) -> String {
    let Some(pattern) = template.pattern() else {
        return combined_text(user);
    };
    let name = join_present([user.display_name.as_str(), user.screen_name.as_str()]);
    pattern
        .replace("{combined_text}", &combined_text(user))
        .replace("{name}", &name)
        .replace("{location}", user.location.as_deref().unwrap_or("").trim())
        .replace("{description}", user.description.as_deref().unwrap_or("").trim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::timestamp;

    fn user() -> UserRecord {
        serde_json::from_str(r#"{"user_id":"1","screen_name":"","display_name":"","created_at":"2020-01-01T00:00:00Z"}"#)
            .unwrap()
    }

    fn at(s: &str) -> DateTime<Utc> {
        timestamp::parse(s).unwrap()
    }

    #[test]
    fn absent_bio_and_url() {
        let v = extract_profile_numeric(&user(), at("2020-01-11T00:00:00Z")).unwrap();
        assert_eq!((v[7], v[8], v[9]), (0.0, 0.0, 0.0));
        assert_eq!(v[0], 10.0);
        assert_eq!(v[6], 0.0);
        assert_eq!(v[17], 1.0);
    }

    #[test]
    fn future_account_is_temporal_error() {
        let r = extract_profile_numeric(&user(), at("2019-12-31T00:00:00Z"));
        assert!(matches!(r, Err(Error::Temporal(_))));
    }

    #[test]
    fn digit_fractions() {
        assert_eq!(digit_fraction("rikadianadewi"), 0.0);
        assert_eq!(digit_fraction("user12345"), 5.0 / 9.0);
        assert_eq!(digit_fraction(""), 0.0);
    }

    #[test]
    fn empty_profile_text() {
        assert_eq!(assemble_profile_text(&user(), PromptTemplate::None), "");
    }

    #[test]
    fn profile_sentence_template() {
        let mut u = user();
        u.display_name = "A".into();
        u.location = Some("B".into());
        u.description = Some("C".into());
        assert_eq!(
            assemble_profile_text(&u, PromptTemplate::ProfileSentence),
            "This user's profile: name is A, located in B, and describes themselves as: C."
        );
        assert_eq!(assemble_profile_text(&u, PromptTemplate::None), "A B C");
    }

    #[test]
    fn template_names_round_trip() {
        for t in PromptTemplate::ALL {
            assert_eq!(PromptTemplate::parse(t.as_str()).unwrap(), t);
        }
        assert!(PromptTemplate::parse("bogus").is_err());
    }
}
