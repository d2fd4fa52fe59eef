//! Happiness lexicon: loading, validation, unit rescaling and lens filtering.
//!
//! File format: UTF-8, one entry per line, `word<TAB>score`, scores on the
//! 1 (sad) to 9 (happy) scale. An optional first line `word<TAB><label>` with a
//! non-numeric label is treated as a header. Blank lines are ignored.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::tokenize::normalize;

pub const MIN_HAPPINESS: f64 = 1.0;
pub const MAX_HAPPINESS: f64 = 9.0;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: score {score} outside [1, 9]")]
    OutOfRange { line: usize, score: f64 },
    #[error("happiness {0} outside [1, 9]")]
    ValueOutOfRange(f64),
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("invalid lens ({low}, {high}): bounds must satisfy 1 <= low <= high <= 9")]
    InvalidLens { low: f64, high: f64 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, LexiconError>;

fn in_range(h: f64) -> bool {
    (MIN_HAPPINESS..=MAX_HAPPINESS).contains(&h)
}

/// One word and its happiness score.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    pub word: String,
    pub happiness: f64,
}

/// Word → happiness map. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, f64>,
    source_name: String,
    duplicates: usize,
}

impl Lexicon {
    /// Build from (word, happiness) pairs. Later duplicates win.
    pub fn from_entries<I, S>(source_name: &str, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        let mut duplicates = 0;
        for (word, h) in entries {
            if !in_range(h) {
                return Err(LexiconError::ValueOutOfRange(h));
            }
            let word = normalize(word.as_ref());
            if map.insert(word, h).is_some() {
                duplicates += 1;
            }
        }
        if map.is_empty() {
            return Err(LexiconError::EmptyLexicon);
        }
        Ok(Self {
            entries: map,
            source_name: source_name.to_string(),
            duplicates,
        })
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.entries.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    /// Number of lines that redefined an earlier word during load.
    pub fn duplicate_count(&self) -> usize {
        self.duplicates
    }

    /// Entries in lexicographic word order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(w, &h)| (w.as_str(), h))
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Copy of this lexicon with `word` set to `happiness` (added if absent).
    pub fn with_override(&self, word: &str, happiness: f64) -> Result<Self> {
        if !in_range(happiness) {
            return Err(LexiconError::ValueOutOfRange(happiness));
        }
        let mut out = self.clone();
        out.entries.insert(normalize(word), happiness);
        Ok(out)
    }

    /// Write as `word<TAB>score` lines with a header.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "word\thappiness")?;
        for (word, h) in self.iter() {
            writeln!(w, "{word}\t{h}")?;
        }
        Ok(())
    }
}

/// Parse a tab-separated lexicon stream.
pub fn load_lexicon<R: BufRead>(reader: R, source_name: &str) -> Result<Lexicon> {
    let mut entries: Vec<(String, f64)> = Vec::new();
    let mut seen_content = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| LexiconError::MalformedLine {
            line: line_no,
            reason: e.to_string(),
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let first_content = !seen_content;
        seen_content = true;

        let mut fields = line.split('\t');
        let word = fields.next().unwrap_or_default();
        let Some(score_field) = fields.next() else {
            return Err(LexiconError::MalformedLine {
                line: line_no,
                reason: "expected `word<TAB>score`".into(),
            });
        };
        if fields.next().is_some() {
            return Err(LexiconError::MalformedLine {
                line: line_no,
                reason: "more than two tab-separated fields".into(),
            });
        }
        let parsed = score_field.trim().parse::<f64>();
        if first_content && word == "word" && parsed.is_err() {
            continue;
        }
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(LexiconError::MalformedLine {
                line: line_no,
                reason: format!("invalid word {word:?}"),
            });
        }
        let score = match parsed {
            Ok(s) if s.is_finite() => s,
            _ => {
                return Err(LexiconError::MalformedLine {
                    line: line_no,
                    reason: format!("non-numeric score {score_field:?}"),
                })
            }
        };
        if !in_range(score) {
            return Err(LexiconError::OutOfRange { line: line_no, score });
        }
        entries.push((word.to_string(), score));
    }
    let lex = Lexicon::from_entries(source_name, entries)?;
    if lex.duplicate_count() > 0 {
        log::warn!(
            "{source_name}: {} duplicate entries, last occurrence kept",
            lex.duplicate_count()
        );
    }
    Ok(lex)
}

/// Load a lexicon file from disk.
pub fn load_lexicon_file(path: &Path) -> Result<Lexicon> {
    let file = File::open(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_lexicon(BufReader::new(file), &path.display().to_string())
}

/// Affine map of the 1–9 happiness scale onto [0, 1]: `(h - 1) / 8`.
pub fn unit_rescale(happiness: f64) -> Result<f64> {
    if !in_range(happiness) {
        return Err(LexiconError::ValueOutOfRange(happiness));
    }
    Ok((happiness - MIN_HAPPINESS) / (MAX_HAPPINESS - MIN_HAPPINESS))
}

/// Remove every entry whose happiness lies strictly inside `(low, high)`.
pub fn apply_lens(lex: &Lexicon, low: f64, high: f64) -> Result<Lexicon> {
    if !(in_range(low) && in_range(high) && low <= high) {
        return Err(LexiconError::InvalidLens { low, high });
    }
    let entries: BTreeMap<String, f64> = lex
        .entries
        .iter()
        .filter(|(_, &h)| !(h > low && h < high))
        .map(|(w, &h)| (w.clone(), h))
        .collect();
    if entries.is_empty() {
        return Err(LexiconError::EmptyLexicon);
    }
    Ok(Lexicon {
        entries,
        source_name: format!("{}[lens {low},{high}]", lex.source_name),
        duplicates: lex.duplicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn load(s: &str) -> Result<Lexicon> {
        load_lexicon(s.as_bytes(), "test")
    }

    #[test]
    fn loads_table_values() {
        let lex = load("laughter\t8.50\nterrorist\t1.30\n").unwrap();
        assert_eq!(lex.get("laughter"), Some(8.50));
        assert_eq!(lex.get("terrorist"), Some(1.30));
        assert_eq!(lex.len(), 2);
    }

    #[test]
    fn header_is_skipped_but_word_entry_is_not() {
        let lex = load("word\thappiness\nthe\t4.98\n").unwrap();
        assert_eq!(lex.len(), 1);
        let lex = load("word\t5.5\nthe\t4.98\n").unwrap();
        assert_eq!(lex.get("word"), Some(5.5));
    }

    #[test]
    fn empty_stream() {
        assert!(matches!(load(""), Err(LexiconError::EmptyLexicon)));
        assert!(matches!(load("word\thappiness\n\n"), Err(LexiconError::EmptyLexicon)));
    }

    #[test]
    fn malformed_reports_line() {
        match load("the\t4.98\nfood\tyummy\n") {
            Err(LexiconError::MalformedLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match load("the\t4.98\n\nfood\n") {
            Err(LexiconError::MalformedLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(load("a b\t5\n"), Err(LexiconError::MalformedLine { .. })));
        assert!(matches!(load("nan\tNaN\n"), Err(LexiconError::MalformedLine { .. })));
    }

    #[test]
    fn out_of_range_is_hard_error() {
        match load("the\t4.98\nbliss\t9.5\n") {
            Err(LexiconError::OutOfRange { line, score }) => {
                assert_eq!(line, 2);
                assert_eq!(score, 9.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicates_last_wins() {
        let lex = load("food\t7.44\nfood\t7.0\nof\t4.94\n").unwrap();
        assert_eq!(lex.get("food"), Some(7.0));
        assert_eq!(lex.duplicate_count(), 1);
    }

    #[test]
    fn words_are_case_folded() {
        let lex = load("Monday\t5.2\n").unwrap();
        assert_eq!(lex.get("monday"), Some(5.2));
    }

    #[test]
    fn rescale_endpoints() {
        assert_eq!(unit_rescale(1.0).unwrap(), 0.0);
        assert_eq!(unit_rescale(9.0).unwrap(), 1.0);
        assert!((unit_rescale(4.98).unwrap() - 0.4975).abs() < 1e-15);
        assert!(unit_rescale(0.5).is_err());
        assert!(unit_rescale(9.01).is_err());
    }

    #[test]
    fn lens_removes_open_band() {
        let lex = load("the\t4.98\nlaughter\t8.50\n").unwrap();
        let lensed = apply_lens(&lex, 4.0, 6.0).unwrap();
        assert_eq!(lensed.len(), 1);
        assert_eq!(lensed.get("laughter"), Some(8.5));
        // original untouched
        assert_eq!(lex.len(), 2);
    }

    #[test]
    fn degenerate_lens_is_identity() {
        let lex = load("the\t4.98\nlaughter\t8.50\nhate\t2.34\n").unwrap();
        for x in [1.0, 4.98, 5.0, 9.0] {
            let lensed = apply_lens(&lex, x, x).unwrap();
            assert_eq!(lensed.iter().collect::<Vec<_>>(), lex.iter().collect::<Vec<_>>());
        }
    }

    #[test]
    fn total_lens_is_empty() {
        let lex = load("the\t4.98\nlaughter\t8.50\n").unwrap();
        assert!(matches!(apply_lens(&lex, 1.0, 9.0), Err(LexiconError::EmptyLexicon)));
        assert!(matches!(
            apply_lens(&lex, 6.0, 4.0),
            Err(LexiconError::InvalidLens { .. })
        ));
    }

    fn lexicon_strategy() -> impl Strategy<Value = Lexicon> {
        prop::collection::btree_map("[a-z]{1,6}", 1.0f64..=9.0, 1..40)
            .prop_map(|m| Lexicon::from_entries("prop", m).unwrap())
    }

    proptest! {
        #[test]
        fn rescale_monotone(a in 1.0f64..=9.0, b in 1.0f64..=9.0) {
            prop_assume!(a < b);
            prop_assert!(unit_rescale(a).unwrap() < unit_rescale(b).unwrap());
        }

        #[test]
        fn lens_idempotent(lex in lexicon_strategy(), a in 1.0f64..=9.0, b in 1.0f64..=9.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if let Ok(once) = apply_lens(&lex, lo, hi) {
                let twice = apply_lens(&once, lo, hi).unwrap();
                prop_assert_eq!(once.iter().collect::<Vec<_>>(), twice.iter().collect::<Vec<_>>());
            }
        }

        #[test]
        fn tsv_round_trip(lex in lexicon_strategy()) {
            let mut buf = Vec::new();
            lex.write_tsv(&mut buf).unwrap();
            let back = load_lexicon(buf.as_slice(), "prop").unwrap();
            prop_assert_eq!(back.iter().collect::<Vec<_>>(), lex.iter().collect::<Vec<_>>());
        }
    }
}
