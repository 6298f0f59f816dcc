//! Term normalization shared by the free-term model, title fallback and query matching.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

const ENGLISH: &str = include_str!("../stopwords/en.txt");
const GERMAN: &str = include_str!("../stopwords/de.txt");

/// Tokens must be strictly longer than this many characters to survive tokenization.
pub const MIN_TOKEN_CHARS: usize = 3;

/// Case folding used for every term comparison in the crate.
pub fn fold(s: &str) -> String {
    s.to_lowercase()
}

#[derive(Debug, Clone, Default)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The shipped English and German lists.
    pub fn english_german() -> Self {
        let mut sw = Self::empty();
        sw.extend_from_text(ENGLISH);
        sw.extend_from_text(GERMAN);
        sw
    }

    /// Builds a list from optional override files; a missing override falls back to the shipped list.
    pub fn from_files(english: Option<&Path>, german: Option<&Path>) -> Result<Self> {
        let mut sw = Self::empty();
        for (path, shipped) in [(english, ENGLISH), (german, GERMAN)] {
            match path {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    sw.extend_from_text(&text);
                }
                None => sw.extend_from_text(shipped),
            }
        }
        Ok(sw)
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn extend_from_text(&mut self, text: &str) {
        self.words.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(fold),
        );
    }

    pub fn insert(&mut self, word: &str) {
        self.words.insert(fold(word));
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&fold(word))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Splits on non-alphanumeric characters, case-folds, drops stop words and
/// keeps tokens longer than [`MIN_TOKEN_CHARS`]. Order and duplicates are kept.
pub fn tokenize(text: &str, stop_words: &StopWords) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(fold)
        .filter(|t| t.chars().count() > MIN_TOKEN_CHARS && !stop_words.contains(t))
        .collect()
}

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let subst = prev[j] + usize::from(ca != cb);
            cur[j + 1] = subst.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Maximum edit distance at which two query terms count as the same term.
pub const RELATED_TERM_DISTANCE: usize = 2;

pub fn terms_related(a: &str, b: &str) -> bool {
    levenshtein(&fold(a), &fold(b)) <= RELATED_TERM_DISTANCE
}
