//! Hedonometer document scores and lexicon-vs-reference differences.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{unit_rescale, Lexicon};
use crate::tokenize::{count_text, TokenCounts};

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("no token of the document appears in the lexicon")]
    NoCoverage,
    #[error("score {0} outside [0, 1]")]
    OutOfRange(f64),
}

/// Frequency-weighted mean happiness of the lexicon words in a document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedonometerScore {
    /// Mean on the 1–9 scale.
    pub raw: f64,
    /// Number of token occurrences that matched the lexicon.
    pub matched_tokens: u64,
}

impl HedonometerScore {
    pub fn unit(&self) -> f64 {
        // raw is a convex combination of in-range values
        unit_rescale(self.raw.clamp(1.0, 9.0)).expect("clamped")
    }
}

/// Σ counts[w]·h(w) / Σ counts[w] over words present in the lexicon.
pub fn hedonometer_score(counts: &TokenCounts, lex: &Lexicon) -> Result<HedonometerScore, ScoreError> {
    let matched: Vec<(u64, f64)> = counts
        .iter()
        .filter_map(|(word, n)| lex.get(word).map(|h| (n, h)))
        .collect();
    let total: u64 = matched.iter().map(|&(n, _)| n).sum();
    if total == 0 {
        return Err(ScoreError::NoCoverage);
    }
    // Reduce counts by their gcd so that k-fold duplicated documents produce
    // bit-identical sums.
    let g = matched.iter().fold(0, |g, &(n, _)| gcd(g, n));
    let weighted: f64 = matched.iter().map(|&(n, h)| (n / g) as f64 * h).sum();
    Ok(HedonometerScore {
        raw: weighted / (total / g) as f64,
        matched_tokens: total,
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Full scoring details for one text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocumentScore {
    pub raw: f64,
    pub unit: f64,
    pub matched_tokens: u64,
    pub total_tokens: u64,
}

/// Tokenize, count and score `text`, returning the unit-scale score with its parts.
pub fn score_text(text: &str, lex: &Lexicon) -> Result<DocumentScore, ScoreError> {
    let counts = count_text(text);
    let score = hedonometer_score(&counts, lex)?;
    Ok(DocumentScore {
        raw: score.raw,
        unit: score.unit(),
        matched_tokens: score.matched_tokens,
        total_tokens: counts.total(),
    })
}

/// Hedonometer score of `text` on the unit scale.
pub fn score_document(text: &str, lex: &Lexicon) -> Result<f64, ScoreError> {
    score_text(text, lex).map(|s| s.unit)
}

/// Signed difference `hedonometer_unit - reference_unit`.
pub fn difference(hedonometer_unit: f64, reference_unit: f64) -> Result<f64, ScoreError> {
    for v in [hedonometer_unit, reference_unit] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ScoreError::OutOfRange(v));
        }
    }
    Ok(hedonometer_unit - reference_unit)
}

/// Per-document comparison of the two scorers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub doc_id: String,
    pub hedonometer_unit: f64,
    pub reference_unit: f64,
    pub difference: f64,
}

impl ScorePair {
    pub fn new(doc_id: impl Into<String>, hedonometer_unit: f64, reference_unit: f64) -> Result<Self, ScoreError> {
        let difference = difference(hedonometer_unit, reference_unit)?;
        Ok(Self {
            doc_id: doc_id.into(),
            hedonometer_unit,
            reference_unit,
            difference,
        })
    }
}
