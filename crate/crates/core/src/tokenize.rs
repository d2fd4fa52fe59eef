//! Text normalization and bag-of-words counting.
//!
//! The rule is fixed so that scores are reproducible across platforms:
//!
//! 1. Unicode NFC normalization.
//! 2. Lowercasing (full Unicode mapping), then NFC again.
//! 3. Tokens are maximal runs of letters, digits, combining marks and
//!    apostrophes. Everything else separates tokens.
//! 4. Apostrophes at token edges are stripped; `’` (U+2019) is folded to `'`.
//!
//! No stemming and no stop-word removal: function words such as "the" carry
//! lexicon scores.

use std::collections::BTreeMap;
use std::ops::AddAssign;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

const APOSTROPHE: char = '\'';
const RIGHT_SINGLE_QUOTE: char = '\u{2019}';

/// NFC-normalize and lowercase `text`.
pub fn normalize(text: &str) -> String {
    let lowered: String = text.nfc().flat_map(char::to_lowercase).collect();
    lowered.nfc().collect()
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == APOSTROPHE || is_combining_mark(c)
}

/// Split `text` into normalized tokens, in order of appearance.
pub fn tokenize(text: &str) -> Vec<String> {
    let normalized = normalize(text);
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in normalized.chars() {
        let c = if c == RIGHT_SINGLE_QUOTE { APOSTROPHE } else { c };
        if is_token_char(c) {
            current.push(c);
        } else if !current.is_empty() {
            push_token(&mut tokens, &current);
            current.clear();
        }
    }
    if !current.is_empty() {
        push_token(&mut tokens, &current);
    }
    tokens
}

fn push_token(tokens: &mut Vec<String>, raw: &str) {
    let trimmed = raw.trim_matches(APOSTROPHE);
    if trimmed.chars().any(char::is_alphanumeric) {
        tokens.push(trimmed.to_string());
    }
}

/// Token frequencies of a document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenCounts {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl TokenCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, token: &str, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(token.to_string()).or_insert(0) += n;
        self.total += n;
    }

    /// Frequency of `token`, zero when absent.
    pub fn get(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &n)| (w.as_str(), n))
    }

    /// Every count multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Self {
        let mut out = Self::new();
        for (w, n) in self.iter() {
            out.add(w, n * k);
        }
        out
    }
}

impl AddAssign<&TokenCounts> for TokenCounts {
    fn add_assign(&mut self, rhs: &TokenCounts) {
        for (w, n) in rhs.iter() {
            self.add(w, n);
        }
    }
}

impl<S: AsRef<str>> FromIterator<S> for TokenCounts {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut out = Self::new();
        for t in iter {
            out.add(t.as_ref(), 1);
        }
        out
    }
}

/// Multiset count of a token sequence.
pub fn count<S: AsRef<str>>(tokens: &[S]) -> TokenCounts {
    tokens.iter().collect()
}

/// Tokenize and count in one step.
pub fn count_text(text: &str) -> TokenCounts {
    count(&tokenize(text))
}
