use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::textprep::{default_stopwords, parse_word_list};

const POWER: &str = include_str!("../../assets/power_words.txt");
const CASUAL: &str = include_str!("../../assets/casual_words.txt");
const TENTATIVE: &str = include_str!("../../assets/tentative_words.txt");
const EMOTION: &str = include_str!("../../assets/emotion_words.txt");
const SWEAR: &str = include_str!("../../assets/swear_words.txt");
const POLARITY: &str = include_str!("../../assets/polarity.tsv");
const FAMILIAR: &str = include_str!("../../assets/familiar_words.txt");
const PRONOUNS: &str = include_str!("../../assets/pos_pronouns.txt");
const FUNCTION: &str = include_str!("../../assets/pos_function.txt");
const VERBS: &str = include_str!("../../assets/pos_verbs.txt");
const ADJECTIVES: &str = include_str!("../../assets/pos_adjectives.txt");
const RELIABLE: &str = include_str!("../../assets/reliable_accounts.txt");

/// Closed-class word lists backing the heuristic part-of-speech counter.
#[derive(Debug, Clone, Default)]
pub struct PosLexicon {
    pub pronouns: BTreeSet<String>,
    pub function_words: BTreeSet<String>,
    pub verbs: BTreeSet<String>,
    pub adjectives: BTreeSet<String>,
}

impl PosLexicon {
    pub fn contains(&self, word: &str) -> bool {
        self.pronouns.contains(word)
            || self.function_words.contains(word)
            || self.verbs.contains(word)
            || self.adjectives.contains(word)
    }
}

/// Word lists used by tweet feature extraction. All entries are lowercase.
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub power: BTreeSet<String>,
    pub casual: BTreeSet<String>,
    pub tentative: BTreeSet<String>,
    pub emotion: BTreeSet<String>,
    pub swear: BTreeSet<String>,
    /// Word -> polarity in [-1, 1].
    pub polarity: BTreeMap<String, f64>,
    pub familiar: BTreeSet<String>,
    pub stopwords: BTreeSet<String>,
    pub pos: PosLexicon,
    /// Twitter handles, lowercase, without `@`.
    pub reliable_accounts: BTreeSet<String>,
}

impl Default for Lexicons {
    fn default() -> Self {
        Lexicons {
            power: parse_word_list(POWER),
            casual: parse_word_list(CASUAL),
            tentative: parse_word_list(TENTATIVE),
            emotion: parse_word_list(EMOTION),
            swear: parse_word_list(SWEAR),
            polarity: parse_polarity(POLARITY).expect("bundled polarity lexicon parses"),
            familiar: parse_word_list(FAMILIAR),
            stopwords: default_stopwords(),
            pos: PosLexicon {
                pronouns: parse_word_list(PRONOUNS),
                function_words: parse_word_list(FUNCTION),
                verbs: parse_word_list(VERBS),
                adjectives: parse_word_list(ADJECTIVES),
            },
            reliable_accounts: parse_word_list(RELIABLE),
        }
    }
}

/// `word<TAB>polarity` lines; `#` comments allowed.
pub fn parse_polarity(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(word), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected `word polarity`".into(),
            });
        };
        let value: f64 = value.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("bad polarity {value:?}"),
        })?;
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("polarity {value} outside [-1, 1]"),
            });
        }
        out.insert(word.to_lowercase(), value);
    }
    Ok(out)
}

impl Lexicons {
    /// Bundled lists, with any file present in `dir` overriding its counterpart.
    ///
    /// Recognised names: `power_words.txt`, `casual_words.txt`,
    /// `tentative_words.txt`, `emotion_words.txt`, `swear_words.txt`,
    /// `polarity.tsv`, `familiar_words.txt`, `stopwords_en.txt`,
    /// `reliable_accounts.txt`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut lex = Lexicons::default();
        let read = |name: &str| -> Result<Option<String>> {
            let p = dir.join(name);
            if p.exists() {
                fs::read_to_string(&p).map(Some).map_err(|e| Error::io(p, e))
            } else {
                Ok(None)
            }
        };
        let sets: [(&str, &mut BTreeSet<String>); 8] = [
            ("power_words.txt", &mut lex.power),
            ("casual_words.txt", &mut lex.casual),
            ("tentative_words.txt", &mut lex.tentative),
            ("emotion_words.txt", &mut lex.emotion),
            ("swear_words.txt", &mut lex.swear),
            ("familiar_words.txt", &mut lex.familiar),
            ("stopwords_en.txt", &mut lex.stopwords),
            ("reliable_accounts.txt", &mut lex.reliable_accounts),
        ];
        for (name, slot) in sets {
            if let Some(text) = read(name)? {
                *slot = parse_word_list(&text);
            }
        }
        if let Some(text) = read("polarity.tsv")? {
            lex.polarity = parse_polarity(&text)?;
        }
        Ok(lex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lists_are_lowercase_and_bounded() {
        let lex = Lexicons::default();
        for set in [&lex.power, &lex.casual, &lex.tentative, &lex.emotion, &lex.swear] {
            assert!(!set.is_empty());
            assert!(set.iter().all(|w| w.to_lowercase() == *w));
        }
        assert!(lex.polarity.values().all(|p| (-1.0..=1.0).contains(p)));
        assert!(lex.familiar.len() > 2000);
    }

    #[test]
    fn polarity_parse_errors_carry_line() {
        let err = parse_polarity("# c\ngood 0.5\nbad 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}
