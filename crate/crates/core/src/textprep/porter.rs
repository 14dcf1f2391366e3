//! Porter suffix-stripping stemmer.
//!
//! Follows the classic five-step rule set with the handful of well-known
//! extensions shipped by NLTK's default mode (irregular-form pool, no stemming
//! of words of length <= 2, the `-ies`/`-ied` short-word rules, `alli` first in
//! step 2, `fulli`/`logi`, and two-letter `vc` stems counting as `cvc`).

const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];

fn irregular(word: &str) -> Option<&'static str> {
    Some(match word {
        "sky" | "skies" => "sky",
        "dying" => "die",
        "lying" => "lie",
        "tying" => "tie",
        "news" => "news",
        "innings" | "inning" => "inning",
        "outings" | "outing" => "outing",
        "cannings" | "canning" => "canning",
        "howe" => "howe",
        "proceed" => "proceed",
        "exceed" => "exceed",
        "succeed" => "succeed",
        _ => return None,
    })
}

fn is_consonant(w: &[char], i: usize) -> bool {
    if VOWELS.contains(&w[i]) {
        return false;
    }
    if w[i] == 'y' {
        return i == 0 || !is_consonant(w, i - 1);
    }
    true
}

/// Number of `VC` sequences in the stem.
fn measure(w: &[char]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..w.len() {
        let cons = is_consonant(w, i);
        if cons && prev_vowel {
            m += 1;
        }
        prev_vowel = !cons;
    }
    m
}

fn contains_vowel(w: &[char]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[char]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

fn ends_cvc(w: &[char]) -> bool {
    let n = w.len();
    (n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], 'w' | 'x' | 'y'))
        || (n == 2 && !is_consonant(w, 0) && is_consonant(w, 1))
}

fn ends_with(w: &[char], suffix: &str) -> bool {
    let s: Vec<char> = suffix.chars().collect();
    w.len() >= s.len() && w[w.len() - s.len()..] == s[..]
}

fn strip<'a>(w: &'a [char], suffix: &str) -> &'a [char] {
    &w[..w.len() - suffix.chars().count()]
}

fn join(stem: &[char], tail: &str) -> Vec<char> {
    let mut out = stem.to_vec();
    out.extend(tail.chars());
    out
}

type Cond = fn(&[char]) -> bool;

fn positive(stem: &[char]) -> bool {
    measure(stem) > 0
}

fn above_one(stem: &[char]) -> bool {
    measure(stem) > 1
}

/// The first rule whose suffix matches decides, whether or not its condition holds.
fn apply_rules(w: &[char], rules: &[(&str, &str, Option<Cond>)]) -> Vec<char> {
    for (suffix, replacement, cond) in rules {
        if ends_with(w, suffix) {
            let stem = strip(w, suffix);
            return if cond.map_or(true, |c| c(stem)) {
                join(stem, replacement)
            } else {
                w.to_vec()
            };
        }
    }
    w.to_vec()
}

fn step1a(w: &[char]) -> Vec<char> {
    if w.len() == 4 && ends_with(w, "ies") {
        return join(strip(w, "ies"), "ie");
    }
    apply_rules(
        w,
        &[
            ("sses", "ss", None),
            ("ies", "i", None),
            ("ss", "ss", None),
            ("s", "", None),
        ],
    )
}

fn step1b(w: &[char]) -> Vec<char> {
    if ends_with(w, "ied") {
        let tail = if w.len() == 4 { "ie" } else { "i" };
        return join(strip(w, "ied"), tail);
    }
    if ends_with(w, "eed") {
        let stem = strip(w, "eed");
        return if measure(stem) > 0 {
            join(stem, "ee")
        } else {
            w.to_vec()
        };
    }
    let mut inter = None;
    for suffix in ["ed", "ing"] {
        if ends_with(w, suffix) {
            let stem = strip(w, suffix);
            if contains_vowel(stem) {
                inter = Some(stem.to_vec());
                break;
            }
        }
    }
    let Some(stem) = inter else {
        return w.to_vec();
    };
    for (suffix, replacement) in [("at", "ate"), ("bl", "ble"), ("iz", "ize")] {
        if ends_with(&stem, suffix) {
            return join(strip(&stem, suffix), replacement);
        }
    }
    if ends_double_consonant(&stem) {
        let last = stem[stem.len() - 1];
        return if !matches!(last, 'l' | 's' | 'z') {
            stem[..stem.len() - 1].to_vec()
        } else {
            stem
        };
    }
    if measure(&stem) == 1 && ends_cvc(&stem) {
        return join(&stem, "e");
    }
    stem
}

fn step1c(w: &[char]) -> Vec<char> {
    apply_rules(
        w,
        &[(
            "y",
            "i",
            Some(|stem: &[char]| stem.len() > 1 && is_consonant(stem, stem.len() - 1)),
        )],
    )
}

fn step2(w: &[char]) -> Vec<char> {
    if ends_with(w, "alli") && positive(strip(w, "alli")) {
        return step2(&join(strip(w, "alli"), "al"));
    }
    let p = Some(positive as Cond);
    let rules: [(&str, &str, Option<Cond>); 21] = [
        ("ational", "ate", p),
        ("tional", "tion", p),
        ("enci", "ence", p),
        ("anci", "ance", p),
        ("izer", "ize", p),
        ("bli", "ble", p),
        ("alli", "al", p),
        ("entli", "ent", p),
        ("eli", "e", p),
        ("ousli", "ous", p),
        ("ization", "ize", p),
        ("ation", "ate", p),
        ("ator", "ate", p),
        ("alism", "al", p),
        ("iveness", "ive", p),
        ("fulness", "ful", p),
        ("ousness", "ous", p),
        ("aliti", "al", p),
        ("iviti", "ive", p),
        ("biliti", "ble", p),
        ("fulli", "ful", p),
    ];
    let out = apply_rules(w, &rules);
    if out != w || rules.iter().any(|(s, _, _)| ends_with(w, s)) {
        return out;
    }
    // "logi" -> "log" when the word minus its last three letters has positive measure.
    if ends_with(w, "logi") && positive(&w[..w.len() - 3]) {
        return join(strip(w, "logi"), "log");
    }
    out
}

fn step3(w: &[char]) -> Vec<char> {
    let p = Some(positive as Cond);
    apply_rules(
        w,
        &[
            ("icate", "ic", p),
            ("ative", "", p),
            ("alize", "al", p),
            ("iciti", "ic", p),
            ("ical", "ic", p),
            ("ful", "", p),
            ("ness", "", p),
        ],
    )
}

fn step4(w: &[char]) -> Vec<char> {
    let g = Some(above_one as Cond);
    apply_rules(
        w,
        &[
            ("al", "", g),
            ("ance", "", g),
            ("ence", "", g),
            ("er", "", g),
            ("ic", "", g),
            ("able", "", g),
            ("ible", "", g),
            ("ant", "", g),
            ("ement", "", g),
            ("ment", "", g),
            ("ent", "", g),
            (
                "ion",
                "",
                Some(|stem: &[char]| {
                    measure(stem) > 1 && matches!(stem.last(), Some('s') | Some('t'))
                }),
            ),
            ("ou", "", g),
            ("ism", "", g),
            ("ate", "", g),
            ("iti", "", g),
            ("ous", "", g),
            ("ive", "", g),
            ("ize", "", g),
        ],
    )
}

fn step5a(w: &[char]) -> Vec<char> {
    if ends_with(w, "e") {
        let stem = strip(w, "e");
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            return stem.to_vec();
        }
    }
    w.to_vec()
}

fn step5b(w: &[char]) -> Vec<char> {
    if ends_with(w, "ll") && measure(&w[..w.len() - 1]) > 1 {
        return w[..w.len() - 1].to_vec();
    }
    w.to_vec()
}

/// Stems one lowercase token.
pub fn stem(token: &str) -> String {
    let lower = token.to_lowercase();
    if let Some(form) = irregular(&lower) {
        return form.to_string();
    }
    let w: Vec<char> = lower.chars().collect();
    if w.len() <= 2 {
        return lower;
    }
    let w = step1a(&w);
    let w = step1b(&w);
    let w = step1c(&w);
    let w = step2(&w);
    let w = step3(&w);
    let w = step4(&w);
    let w = step5a(&w);
    let w = step5b(&w);
    w.into_iter().collect()
}
