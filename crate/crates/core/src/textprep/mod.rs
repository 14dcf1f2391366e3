//! Tweet text normalization: hyperlink removal, the WHO rule, special
//! characters, lowercasing, Porter stemming and stopword removal.

mod porter;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use porter::stem;

const STOPWORDS_EN: &str = include_str!("../../assets/stopwords_en.txt");
const NEGATIONS: &str = include_str!("../../assets/negations.txt");

/// Version tag of the pinned stopword list.
pub const STOPWORDS_VERSION: &str = "stopwords_en.v1";

/// Parses a plain word list: one entry per line, `#` comments and blanks skipped.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn default_stopwords() -> BTreeSet<String> {
    parse_word_list(STOPWORDS_EN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepConfig {
    pub keep_negations: bool,
    pub apply_who_rule: bool,
    pub stopword_list: BTreeSet<String>,
    pub negation_whitelist: BTreeSet<String>,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            keep_negations: true,
            apply_who_rule: true,
            stopword_list: default_stopwords(),
            negation_whitelist: parse_word_list(NEGATIONS),
        }
    }
}

impl PrepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.keep_negations {
            if let Some(w) = self
                .negation_whitelist
                .iter()
                .find(|w| !self.stopword_list.contains(*w))
            {
                return Err(Error::invalid(format!(
                    "negation {w:?} is not in the stopword list"
                )));
            }
        }
        Ok(())
    }

    fn drops(&self, token: &str) -> bool {
        self.stopword_list.contains(token)
            && !(self.keep_negations && self.negation_whitelist.contains(token))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    /// Byte range in the source string.
    pub span: (usize, usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
}

impl TokenStream {
    pub fn texts(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Byte spans of maximal runs of alphanumerics and `_`.
fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Splits on whitespace and punctuation; `_` and digits stay inside words.
/// Tokens are lowercased.
pub fn tokenize(text: &str) -> TokenStream {
    TokenStream {
        tokens: word_spans(text)
            .into_iter()
            .map(|(s, e)| Token {
                text: text[s..e].to_lowercase(),
                span: (s, e),
            })
            .collect(),
    }
}

/// Like [`tokenize`] but keeps the original casing.
pub fn raw_words(text: &str) -> Vec<&str> {
    word_spans(text).into_iter().map(|(s, e)| &text[s..e]).collect()
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "u.s", "u.k",
    "inc", "ltd", "co", "corp", "gov", "dept", "approx", "jan", "feb", "mar", "apr", "jun", "jul",
    "aug", "sep", "sept", "oct", "nov", "dec", "no",
];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '”' | '’' | '»')
}

/// The dotted word immediately before byte offset `end`, lowercased.
fn word_before(text: &str, end: usize) -> String {
    let head = &text[..end];
    let start = head
        .char_indices()
        .rev()
        .find(|&(_, c)| !(c.is_alphanumeric() || c == '.'))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    head[start..].to_lowercase()
}

/// Segments text on `.`, `!` and `?` (runs kept together), skipping decimals
/// and common abbreviations. Sentences are trimmed slices of the source.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < chars.len() && is_terminator(chars[j].1) {
            j += 1;
        }
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
        let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
        let single_period = c == '.' && j == i + 1;
        let abbreviation = single_period && {
            let w = word_before(text, pos);
            ABBREVIATIONS.contains(&w.as_str())
        };
        if at_boundary && !abbreviation {
            let sentence = text[start..end].trim();
            if !sentence.is_empty() {
                out.push(sentence.to_string());
            }
            start = end;
        }
        i = j.max(i + 1);
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}

pub(crate) fn link_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)https?://\S+|\bt\.co/\S+").expect("valid regex"))
}

/// Rewrites standalone WHO / Who / who (optionally quoted) to
/// "world health organization", except for a leading occurrence in a text
/// that ends with a question mark.
pub fn apply_who_rule(text: &str) -> String {
    let spans = word_spans(text);
    let is_question = text.trim_end().ends_with('?');
    let mut out = String::with_capacity(text.len() + 32);
    let mut last = 0;
    for (k, &(s, e)) in spans.iter().enumerate() {
        let word = &text[s..e];
        if !matches!(word, "WHO" | "Who" | "who") {
            continue;
        }
        if k == 0 && is_question {
            continue;
        }
        out.push_str(&text[last..s]);
        out.push_str("world health organization");
        last = e;
    }
    out.push_str(&text[last..]);
    out
}

fn handle_special_characters(text: &str) -> String {
    let text = text.replace("&amp;", " and ");
    let mut cleaned = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '$' | '#' | '@' => {}
            '&' => cleaned.push_str(" and "),
            _ => cleaned.push(c),
        }
    }
    // Standalone uppercase RT repost marker.
    let mut out = String::with_capacity(cleaned.len());
    let mut last = 0;
    for (s, e) in word_spans(&cleaned) {
        if &cleaned[s..e] == "RT" {
            out.push_str(&cleaned[last..s]);
            last = e;
        }
    }
    out.push_str(&cleaned[last..]);
    out
}

/// Full normalization pipeline; returns space-joined stemmed tokens.
pub fn preprocess(text: &str, config: &PrepConfig) -> String {
    let text = link_pattern().replace_all(text, " ");
    let text = if config.apply_who_rule {
        apply_who_rule(&text)
    } else {
        text.into_owned()
    };
    // Letters without a lowercase mapping (e.g. mathematical capitals) are dropped.
    let text: String = handle_special_characters(&text)
        .to_lowercase()
        .chars()
        .filter(|c| !c.is_uppercase())
        .collect();
    let mut out = String::new();
    for token in tokenize(&text).tokens {
        if config.drops(&token.text) {
            continue;
        }
        let stemmed = stem(&token.text);
        if config.drops(&stemmed) {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&stemmed);
    }
    out
}
