//! Heuristic part-of-speech counts: closed-class lexicon lookups, a
//! capitalisation rule for proper nouns and suffix rules for open classes.

use serde::{Deserialize, Serialize};

use super::lexicon::PosLexicon;
use crate::textprep::{raw_words, split_sentences};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosCounts {
    pub verb: usize,
    pub proper_noun: usize,
    pub noun: usize,
    pub pronoun: usize,
    pub adjective: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    Verb,
    ProperNoun,
    Noun,
    Pronoun,
    Adjective,
    Other,
}

const VERB_SUFFIXES: [&str; 5] = ["ing", "ed", "ize", "ise", "ify"];
const ADJECTIVE_SUFFIXES: [&str; 9] = ["ous", "ful", "ive", "able", "ible", "ical", "less", "ish", "ic"];

fn tag(word: &str, sentence_initial: bool, lex: &PosLexicon) -> Tag {
    let lower = word.to_lowercase();
    if !lower.chars().any(char::is_alphabetic) {
        return Tag::Other;
    }
    if lex.pronouns.contains(&lower) {
        return Tag::Pronoun;
    }
    if lex.function_words.contains(&lower) {
        return Tag::Other;
    }
    if lex.verbs.contains(&lower) {
        return Tag::Verb;
    }
    if lex.adjectives.contains(&lower) {
        return Tag::Adjective;
    }
    let capitalised = word.chars().next().is_some_and(char::is_uppercase);
    if capitalised && !sentence_initial {
        return Tag::ProperNoun;
    }
    let long = lower.chars().count() > 4;
    if long && lower.ends_with("ly") {
        return Tag::Other;
    }
    if long && VERB_SUFFIXES.iter().any(|s| lower.ends_with(s)) {
        return Tag::Verb;
    }
    if let Some(base) = lower.strip_suffix('s') {
        if lex.verbs.contains(base) {
            return Tag::Verb;
        }
    }
    if long && ADJECTIVE_SUFFIXES.iter().any(|s| lower.ends_with(s)) {
        return Tag::Adjective;
    }
    Tag::Noun
}

pub fn pos_counts(text: &str, lex: &PosLexicon) -> PosCounts {
    let mut counts = PosCounts::default();
    for sentence in split_sentences(text) {
        for (i, word) in raw_words(&sentence).into_iter().enumerate() {
            match tag(word, i == 0, lex) {
                Tag::Verb => counts.verb += 1,
                Tag::ProperNoun => counts.proper_noun += 1,
                Tag::Noun => counts.noun += 1,
                Tag::Pronoun => counts.pronoun += 1,
                Tag::Adjective => counts.adjective += 1,
                Tag::Other => {}
            }
        }
    }
    counts
}
