use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::lexicon::Lexicons;
use super::pos::pos_counts;
use super::readability::readability;
use crate::corpus::Tweet;
use crate::textprep::{link_pattern, tokenize};

/// Column names of the extracted feature vector, in output order.
pub const FEATURE_NAMES: [&str; 43] = [
    "tweet_date",
    "tweet_type",
    "like_count",
    "retweet_count",
    "possibly_sensitive",
    "sentiment",
    "mention_reliable_accounts",
    "has_url",
    "num_of_mentions",
    "num_of_hashtags",
    "emoji_count",
    "text_uppercase_percent",
    "text_punctuation_percent",
    "text_stop_words_percent",
    "verb_count",
    "proper_noun_count",
    "noun_count",
    "pronoun_count",
    "adjective_count",
    "text_power_words_percent",
    "text_casual_words_percent",
    "text_tentative_words_percent",
    "text_emotion_words_percent",
    "text_swear_words_percent",
    "text_type_token_ratio",
    "flesch_reading_ease",
    "smog_index",
    "flesch_kincaid_grade",
    "automated_readability_index",
    "dale_chall_readability_score",
    "linsear_write_formula",
    "gunning_fog",
    "text_standard",
    "difficult_words",
    "user_created_at",
    "user_follower_count",
    "user_following_count",
    "user_favourites_count",
    "user_verified",
    "user_tweet_count",
    "has_user_url",
    "user_geo",
    "user_profile",
];

pub const CATEGORICAL_FEATURES: [&str; 1] = ["tweet_type"];

pub const TWEET_FEATURE_COUNT: usize = 34;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Number(f64),
    Category(String),
}

impl FeatureValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            FeatureValue::Number(x) => Some(*x),
            FeatureValue::Category(_) => None,
        }
    }
}

impl std::fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureValue::Number(x) => write!(f, "{x}"),
            FeatureValue::Category(c) => f.write_str(c),
        }
    }
}

/// One tweet's features aligned with [`FEATURE_NAMES`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<FeatureValue>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<&FeatureValue> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| &self.values[i])
    }

    pub fn number(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(FeatureValue::as_number)
    }
}

fn mention_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@(\w+)").expect("valid regex"))
}

fn hashtag_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"#\w+").expect("valid regex"))
}

/// Pictographic code points; modifiers, joiners and variation selectors are not counted.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F300..=0x1F5FF
        | 0x1F600..=0x1F64F
        | 0x1F680..=0x1F6FF
        | 0x1F900..=0x1F9FF
        | 0x1FA70..=0x1FAFF
        | 0x1F1E6..=0x1F1FF
        | 0x2600..=0x26FF
        | 0x2700..=0x27BF
        | 0x1F004
        | 0x1F0CF
        | 0x2B50
        | 0x2B55)
}

pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '‘' | '’' | '“' | '”' | '…' | '–' | '—' | '«' | '»' | '¡' | '¿' | '·' | '•'
        )
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn share(tokens: &[&str], set: &BTreeSet<String>) -> f64 {
    percent(tokens.iter().filter(|t| set.contains(**t)).count(), tokens.len())
}

fn flag(b: bool) -> FeatureValue {
    FeatureValue::Number(if b { 1.0 } else { 0.0 })
}

fn num(x: impl Into<f64>) -> FeatureValue {
    FeatureValue::Number(x.into())
}

/// Mean polarity over tokens found in the lexicon; 0 when none are.
pub fn sentiment(tokens: &[&str], lex: &Lexicons) -> f64 {
    let hits: Vec<f64> = tokens
        .iter()
        .filter_map(|t| lex.polarity.get(*t).copied())
        .collect();
    if hits.is_empty() {
        0.0
    } else {
        hits.iter().sum::<f64>() / hits.len() as f64
    }
}

pub fn extract_features(tweet: &Tweet, lex: &Lexicons) -> FeatureVector {
    let content = tweet.content.as_str();
    let has_url = link_pattern().is_match(content);
    let text = link_pattern().replace_all(content, " ");

    let stream = tokenize(&text);
    let tokens = stream.texts();
    let n_tokens = tokens.len();

    let mentions: Vec<String> = mention_pattern()
        .captures_iter(&text)
        .map(|c| c[1].to_lowercase())
        .collect();
    let mention_reliable = mentions.iter().any(|m| lex.reliable_accounts.contains(m));
    let hashtags = hashtag_pattern().find_iter(&text).count();
    let emoji = content.chars().filter(|&c| is_emoji(c)).count();

    let letters = text.chars().filter(|c| c.is_alphabetic()).count();
    let upper = text.chars().filter(|c| c.is_uppercase()).count();
    let visible = text.chars().filter(|c| !c.is_whitespace()).count();
    let punct = text.chars().filter(|&c| is_punctuation(c)).count();

    let unique: BTreeSet<&str> = tokens.iter().copied().collect();
    let ttr = if n_tokens == 0 {
        0.0
    } else {
        unique.len() as f64 / n_tokens as f64
    };

    let pos = pos_counts(&text, &lex.pos);
    let read = if n_tokens == 0 {
        Default::default()
    } else {
        readability(&text, &lex.familiar)
    };

    let tm = &tweet.tweet_meta;
    let um = &tweet.user_meta;
    let mut values = vec![
        num(tm.tweet_date as f64),
        FeatureValue::Category(tm.tweet_type.as_str().to_string()),
        num(tm.like_count as f64),
        num(tm.retweet_count as f64),
        flag(tm.possibly_sensitive),
        num(sentiment(&tokens, lex)),
        flag(mention_reliable),
        flag(has_url),
        num(mentions.len() as f64),
        num(hashtags as f64),
        num(emoji as f64),
        num(percent(upper, letters)),
        num(percent(punct, visible)),
        num(share(&tokens, &lex.stopwords)),
        num(pos.verb as f64),
        num(pos.proper_noun as f64),
        num(pos.noun as f64),
        num(pos.pronoun as f64),
        num(pos.adjective as f64),
        num(share(&tokens, &lex.power)),
        num(share(&tokens, &lex.casual)),
        num(share(&tokens, &lex.tentative)),
        num(share(&tokens, &lex.emotion)),
        num(share(&tokens, &lex.swear)),
        num(ttr),
    ];
    values.extend(read.as_array().into_iter().map(num));
    values.extend([
        num(um.user_created_at as f64),
        num(um.user_follower_count as f64),
        num(um.user_following_count as f64),
        num(um.user_favourites_count as f64),
        flag(um.user_verified),
        num(um.user_tweet_count as f64),
        flag(um.has_user_url),
        flag(um.user_geo),
        flag(um.user_profile),
    ]);
    debug_assert_eq!(values.len(), FEATURE_NAMES.len());
    FeatureVector { values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{TweetMeta, TweetType, UserMeta};

    pub(crate) fn tweet(content: &str) -> Tweet {
        Tweet {
            id: "t1".into(),
            content: content.into(),
            tweet_meta: TweetMeta {
                tweet_date: 1_593_000_000_000,
                tweet_type: TweetType::Quote,
                like_count: 12,
                retweet_count: 3,
                possibly_sensitive: false,
            },
            user_meta: UserMeta {
                user_created_at: 1_300_000_000_000,
                user_follower_count: 10,
                user_following_count: 20,
                user_favourites_count: 30,
                user_tweet_count: 40,
                user_verified: true,
                has_user_url: false,
                user_geo: true,
                user_profile: true,
            },
        }
    }

    #[test]
    fn names_split_into_tweet_and_user_blocks() {
        assert_eq!(FEATURE_NAMES.len(), 43);
        assert_eq!(FEATURE_NAMES[TWEET_FEATURE_COUNT], "user_created_at");
        let unique: BTreeSet<_> = FEATURE_NAMES.iter().collect();
        assert_eq!(unique.len(), 43);
    }

    #[test]
    fn uppercase_percent() {
        let f = extract_features(&tweet("AAAA"), &Lexicons::default());
        assert_eq!(f.number("text_uppercase_percent"), Some(100.0));
    }

    #[test]
    fn sentiment_is_mean_of_hits() {
        let mut lex = Lexicons::default();
        lex.polarity.clear();
        lex.polarity.insert("good".into(), 0.7);
        lex.polarity.insert("bad".into(), -0.7);
        let f = extract_features(&tweet("good good bad"), &lex);
        assert!((f.number("sentiment").unwrap() - 0.7 / 3.0).abs() < 1e-12);
        let f = extract_features(&tweet("nothing here"), &lex);
        assert_eq!(f.number("sentiment"), Some(0.0));
    }

    #[test]
    fn counts_and_flags() {
        let lex = Lexicons::default();
        let f = extract_features(&tweet("no tags at all"), &lex);
        assert_eq!(f.number("num_of_hashtags"), Some(0.0));
        let f = extract_features(
            &tweet("@WHO says #covid #vaccine works 😀👍 https://t.co/abc"),
            &lex,
        );
        assert_eq!(f.number("num_of_hashtags"), Some(2.0));
        assert_eq!(f.number("num_of_mentions"), Some(1.0));
        assert_eq!(f.number("emoji_count"), Some(2.0));
        assert_eq!(f.number("has_url"), Some(1.0));
        assert_eq!(f.number("mention_reliable_accounts"), Some(1.0));
        assert_eq!(f.get("tweet_type"), Some(&FeatureValue::Category("quote".into())));
        assert_eq!(f.number("user_verified"), Some(1.0));
        assert_eq!(f.number("user_tweet_count"), Some(40.0));
    }

    #[test]
    fn type_token_ratio() {
        let f = extract_features(&tweet("run run run"), &Lexicons::default());
        assert!((f.number("text_type_token_ratio").unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_text_gives_zero_ratios() {
        let f = extract_features(&tweet("😀 !!"), &Lexicons::default());
        for name in ["text_type_token_ratio", "text_stop_words_percent", "flesch_reading_ease", "text_standard"] {
            assert_eq!(f.number(name), Some(0.0), "{name}");
        }
    }
}
