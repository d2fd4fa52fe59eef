//! Domain-tagged corpora, lexicon coverage, and regression vocabulary.
//!
//! Corpus file: JSON Lines, one `{"id", "domain", "text"}` object per line.
//! A word is "present" in a domain when it occurs in at least one document
//! of that domain.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::tokenize::tokenize;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: duplicate document id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no lexicon word appears in at least {min_domains} domains")]
    EmptyVocabulary { min_domains: usize },
    #[error("min_domains must be in 1..={available}, got {requested}")]
    InvalidMinDomains { requested: usize, available: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CorpusError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub domain: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, domain: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            domain: domain.into(),
            text: text.into(),
        }
    }
}

pub fn load_corpus<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::MalformedLine {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine {
            line: line_no,
            reason: e.to_string(),
        })?;
        if doc.domain.is_empty() {
            return Err(CorpusError::MalformedLine {
                line: line_no,
                reason: "empty domain".into(),
            });
        }
        if !ids.insert(doc.id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: doc.id,
            });
        }
        docs.push(doc);
    }
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(docs)
}

pub fn load_corpus_file(path: &Path) -> Result<Vec<Document>> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_corpus(BufReader::new(file))
}

/// Distinct domains in sorted order.
pub fn domains(docs: &[Document]) -> Vec<String> {
    docs.iter()
        .map(|d| d.domain.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Lexicon words present in each domain.
fn domain_word_sets<'a>(docs: &[Document], lex: &'a Lexicon) -> BTreeMap<String, BTreeSet<&'a str>> {
    let words: BTreeMap<&str, &'a str> = lex.words().map(|w| (w, w)).collect();
    let mut sets: BTreeMap<String, BTreeSet<&'a str>> = BTreeMap::new();
    for doc in docs {
        let set = sets.entry(doc.domain.clone()).or_default();
        for token in tokenize(&doc.text) {
            if let Some(&w) = words.get(token.as_str()) {
                set.insert(w);
            }
        }
    }
    sets
}

/// Lexicon word → number of domains it appears in.
fn domain_counts<'a>(sets: &BTreeMap<String, BTreeSet<&'a str>>) -> BTreeMap<&'a str, usize> {
    let mut counts = BTreeMap::new();
    for set in sets.values() {
        for &w in set {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageStats {
    /// Domain → distinct lexicon words appearing in it.
    pub per_domain: BTreeMap<String, usize>,
    /// k → lexicon words appearing in exactly k domains, for k in 1..=D.
    pub overlap: BTreeMap<usize, usize>,
    pub total_distinct: usize,
}

pub fn coverage_stats(docs: &[Document], lex: &Lexicon) -> Result<CoverageStats> {
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let sets = domain_word_sets(docs, lex);
    let per_domain = sets.iter().map(|(d, s)| (d.clone(), s.len())).collect();
    let counts = domain_counts(&sets);
    let mut overlap: BTreeMap<usize, usize> = (1..=sets.len()).map(|k| (k, 0)).collect();
    for &k in counts.values() {
        *overlap.entry(k).or_insert(0) += 1;
    }
    Ok(CoverageStats {
        per_domain,
        overlap,
        total_distinct: counts.len(),
    })
}

/// Lexicon words present in at least `min_domains` domains, sorted.
pub fn select_vocabulary(docs: &[Document], lex: &Lexicon, min_domains: usize) -> Result<Vec<String>> {
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let sets = domain_word_sets(docs, lex);
    if min_domains == 0 || min_domains > sets.len() {
        return Err(CorpusError::InvalidMinDomains {
            requested: min_domains,
            available: sets.len(),
        });
    }
    let vocab: Vec<String> = domain_counts(&sets)
        .into_iter()
        .filter(|&(_, k)| k >= min_domains)
        .map(|(w, _)| w.to_string())
        .collect();
    if vocab.is_empty() {
        return Err(CorpusError::EmptyVocabulary { min_domains });
    }
    Ok(vocab)
}
