//! Classic readability indices.
//!
//! | score | formula |
//! |---|---|
//! | Flesch reading ease | `206.835 - 1.015 * W/S - 84.6 * Y/W` |
//! | Flesch-Kincaid grade | `0.39 * W/S + 11.8 * Y/W - 15.59` |
//! | SMOG | `1.043 * sqrt(P * 30 / S) + 3.1291` |
//! | ARI | `4.71 * C/W + 0.5 * W/S - 21.43` |
//! | Dale-Chall | `0.1579 * 100 * U/W + 0.0496 * W/S`, `+3.6365` when `U/W > 5%` |
//! | Linsear Write | first 100 words, `r = (easy + 3 * hard) / S`; `r/2` if `r > 20` else `(r - 2)/2` |
//! | Gunning fog | `0.4 * (W/S + 100 * P/W)` |
//!
//! `W` words, `S` sentences, `Y` syllables, `C` letters and digits, `P` words
//! with three or more syllables, `U` words outside the familiar-word list.
//! `text_standard` is the mode of the rounded grade-type scores (FK, SMOG,
//! ARI, Linsear Write, fog), ties going to the lower grade.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::syllables::count_syllables;
use crate::textprep::split_sentences;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityScores {
    pub flesch_reading_ease: f64,
    pub smog_index: f64,
    pub flesch_kincaid_grade: f64,
    pub automated_readability_index: f64,
    pub dale_chall_readability_score: f64,
    pub linsear_write_formula: f64,
    pub gunning_fog: f64,
    pub text_standard: f64,
    pub difficult_words: f64,
}

impl ReadabilityScores {
    pub fn as_array(&self) -> [f64; 9] {
        [
            self.flesch_reading_ease,
            self.smog_index,
            self.flesch_kincaid_grade,
            self.automated_readability_index,
            self.dale_chall_readability_score,
            self.linsear_write_formula,
            self.gunning_fog,
            self.text_standard,
            self.difficult_words,
        ]
    }
}

/// Whitespace-separated words with punctuation stripped; pure-punctuation pieces dropped.
pub fn readability_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.chars().filter(|c| c.is_alphanumeric()).collect::<String>())
        .filter(|w| !w.is_empty())
        .collect()
}

fn is_familiar(word: &str, familiar: &BTreeSet<String>) -> bool {
    familiar.contains(&word.to_lowercase())
}

/// Words with at least two syllables that are not on the familiar list.
pub fn difficult_words(words: &[String], familiar: &BTreeSet<String>) -> usize {
    words
        .iter()
        .filter(|w| count_syllables(w) >= 2 && !is_familiar(w, familiar))
        .count()
}

pub fn readability(text: &str, familiar: &BTreeSet<String>) -> ReadabilityScores {
    let words = readability_words(text);
    let sentences = split_sentences(text).len();
    if words.is_empty() || sentences == 0 {
        return ReadabilityScores::default();
    }
    let w = words.len() as f64;
    let s = sentences as f64;
    let syllables: Vec<usize> = words.iter().map(|x| count_syllables(x)).collect();
    let y = syllables.iter().sum::<usize>() as f64;
    let poly = syllables.iter().filter(|&&n| n >= 3).count() as f64;
    let chars = words.iter().map(|x| x.chars().count()).sum::<usize>() as f64;
    let unfamiliar = words.iter().filter(|x| !is_familiar(x, familiar)).count() as f64;

    let wps = w / s;
    let spw = y / w;
    let flesch_reading_ease = 206.835 - 1.015 * wps - 84.6 * spw;
    let flesch_kincaid_grade = 0.39 * wps + 11.8 * spw - 15.59;
    let smog_index = 1.043 * (poly * 30.0 / s).sqrt() + 3.1291;
    let automated_readability_index = 4.71 * (chars / w) + 0.5 * wps - 21.43;

    let pct_unfamiliar = 100.0 * unfamiliar / w;
    let mut dale_chall_readability_score = 0.1579 * pct_unfamiliar + 0.0496 * wps;
    if pct_unfamiliar > 5.0 {
        dale_chall_readability_score += 3.6365;
    }

    let linsear_write_formula = linsear_write(text, &words);
    let gunning_fog = 0.4 * (wps + 100.0 * poly / w);

    let grades = [
        flesch_kincaid_grade,
        smog_index,
        automated_readability_index,
        linsear_write_formula,
        gunning_fog,
    ];
    let text_standard = modal_grade(&grades);

    ReadabilityScores {
        flesch_reading_ease,
        smog_index,
        flesch_kincaid_grade,
        automated_readability_index,
        dale_chall_readability_score,
        linsear_write_formula,
        gunning_fog,
        text_standard,
        difficult_words: difficult_words(&words, familiar) as f64,
    }
}

fn linsear_write(text: &str, words: &[String]) -> f64 {
    let sample: Vec<&String> = words.iter().take(100).collect();
    let (easy, hard) = sample.iter().fold((0usize, 0usize), |(e, h), w| {
        if count_syllables(w) >= 3 {
            (e, h + 1)
        } else {
            (e + 1, h)
        }
    });
    let sentences = if words.len() > 100 {
        // Sentences covered by the first 100 words.
        let mut seen = 0usize;
        let mut count = 0usize;
        for sentence in split_sentences(text) {
            if seen >= 100 {
                break;
            }
            seen += readability_words(&sentence).len();
            count += 1;
        }
        count.max(1)
    } else {
        split_sentences(text).len().max(1)
    };
    let r = (easy + 3 * hard) as f64 / sentences as f64;
    if r > 20.0 {
        r / 2.0
    } else {
        (r - 2.0) / 2.0
    }
}

fn modal_grade(grades: &[f64]) -> f64 {
    let rounded: Vec<i64> = grades.iter().map(|g| g.round() as i64).collect();
    let mut best = (0usize, i64::MAX);
    for &g in &rounded {
        let count = rounded.iter().filter(|&&x| x == g).count();
        if count > best.0 || (count == best.0 && g < best.1) {
            best = (count, g);
        }
    }
    best.1 as f64
}
