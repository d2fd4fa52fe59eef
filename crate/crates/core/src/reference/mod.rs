//! Reference sentiment scorers on the unit interval.
//!
//! [`score_batch`] serves cached scores without calling the scorer, fetches
//! the rest in batches with a bounded number of requests in flight, retries
//! transient failures with exponential backoff, validates that every score
//! lies in [0, 1], and appends fresh results to the cache.

mod cache;
mod http;
mod stub;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;

pub use cache::{content_hash, CacheRecord, ScoreCache};
pub use http::{HttpConfig, HttpScorer};
pub use stub::{stub_scorer, StubKind, StubParams, StubScorer};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    /// Non-retryable provider failure.
    #[error("provider error: {0}")]
    Provider(String),
    /// Retryable failure; surfaces as [`ReferenceError::Timeout`] once retries run out.
    #[error("transient provider failure: {0}")]
    Transient(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Timeout { attempts: u32, last: String },
    #[error("provider returned score {score} for document {doc_id:?}, outside [0, 1]")]
    ScoreOutOfRange { doc_id: String, score: f64 },
    #[error("unknown stub kind {0:?} (expected lexicon-echo|perturbed-lexicon|constant)")]
    UnknownStubKind(String),
    #[error("provider configuration: {0}")]
    Config(String),
    #[error("score cache: {0}")]
    Cache(String),
}

/// A scorer mapping texts to sentiment on [0, 1].
pub trait ReferenceScorer: Send + Sync {
    /// Provider name; part of the cache key.
    fn provider(&self) -> &str;

    /// Whether results should be persisted in the score cache.
    fn cacheable(&self) -> bool {
        true
    }

    /// Score one batch; output order matches input order.
    fn score_texts(&self, texts: &[&str]) -> Result<Vec<f64>, ReferenceError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScore {
    pub doc_id: String,
    pub score: f64,
    pub provider: String,
    pub fetched_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchOptions {
    pub batch_size: usize,
    pub concurrency: usize,
    pub retries: u32,
    pub backoff: Duration,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            batch_size: 10,
            concurrency: 4,
            retries: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

fn fetch_with_retry(
    scorer: &dyn ReferenceScorer,
    texts: &[&str],
    opts: &BatchOptions,
) -> Result<Vec<f64>, ReferenceError> {
    let mut attempt = 0u32;
    loop {
        match scorer.score_texts(texts) {
            Ok(scores) if scores.len() == texts.len() => return Ok(scores),
            Ok(scores) => {
                return Err(ReferenceError::Provider(format!(
                    "{} scores for {} documents",
                    scores.len(),
                    texts.len()
                )))
            }
            Err(ReferenceError::Transient(msg)) => {
                if attempt >= opts.retries {
                    return Err(ReferenceError::Timeout {
                        attempts: attempt + 1,
                        last: msg,
                    });
                }
                let delay = opts.backoff.saturating_mul(1 << attempt.min(16));
                log::warn!("{}: {msg}; retrying in {delay:?}", scorer.provider());
                std::thread::sleep(delay);
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

type ChunkResult = Result<Vec<f64>, ReferenceError>;

/// Reference scores for `docs`, in input order.
pub fn score_batch(
    docs: &[Document],
    scorer: &dyn ReferenceScorer,
    cache: &mut ScoreCache,
    opts: &BatchOptions,
) -> Result<Vec<ReferenceScore>, ReferenceError> {
    let provider = scorer.provider().to_string();
    let use_cache = scorer.cacheable();
    let hashes: Vec<String> = docs.iter().map(|d| content_hash(&d.text)).collect();

    // Unique uncached texts, in first-seen order.
    let mut pending: Vec<(String, &str)> = Vec::new();
    let mut seen: HashMap<&str, ()> = HashMap::new();
    for (doc, hash) in docs.iter().zip(&hashes) {
        let cached = use_cache && cache.get(hash, &provider).is_some();
        if !cached && seen.insert(hash.as_str(), ()).is_none() {
            pending.push((hash.clone(), doc.text.as_str()));
        }
    }

    let batch_size = opts.batch_size.max(1);
    let chunks: Vec<&[(String, &str)]> = pending.chunks(batch_size).collect();
    let results: Mutex<Vec<Option<ChunkResult>>> = Mutex::new(vec![None; chunks.len()]);
    let next = AtomicUsize::new(0);
    let workers = opts.concurrency.max(1).min(chunks.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(chunk) = chunks.get(i) else { break };
                let texts: Vec<&str> = chunk.iter().map(|(_, t)| *t).collect();
                let outcome = fetch_with_retry(scorer, &texts, opts);
                results.lock().expect("results lock")[i] = Some(outcome);
            });
        }
    });

    let now = Utc::now();
    let mut fresh: HashMap<String, CacheRecord> = HashMap::new();
    let mut fresh_order = Vec::new();
    let mut first_error = None;
    for (chunk, outcome) in chunks.iter().zip(results.into_inner().expect("results lock")) {
        match outcome.expect("every chunk processed") {
            Ok(scores) => {
                for ((hash, _), score) in chunk.iter().zip(scores) {
                    if !(0.0..=1.0).contains(&score) {
                        let doc_id = docs
                            .iter()
                            .zip(&hashes)
                            .find(|(_, h)| *h == hash)
                            .map(|(d, _)| d.id.clone())
                            .unwrap_or_default();
                        first_error.get_or_insert(ReferenceError::ScoreOutOfRange { doc_id, score });
                        continue;
                    }
                    fresh_order.push(hash.clone());
                    fresh.insert(
                        hash.clone(),
                        CacheRecord {
                            hash: hash.clone(),
                            provider: provider.clone(),
                            score,
                            fetched_at: now,
                        },
                    );
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }

    if use_cache {
        let records = fresh_order.iter().map(|h| fresh[h].clone()).collect();
        cache.append(records)?;
    }
    if let Some(e) = first_error {
        return Err(e);
    }

    docs.iter()
        .zip(&hashes)
        .map(|(doc, hash)| {
            let rec = fresh
                .get(hash)
                .or_else(|| cache.get(hash, &provider))
                .expect("score present after fetch");
            Ok(ReferenceScore {
                doc_id: doc.id.clone(),
                score: rec.score,
                provider: provider.clone(),
                fetched_at: rec.fetched_at,
            })
        })
        .collect()
}
