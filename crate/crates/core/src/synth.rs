//! Seeded synthetic corpora built from lexicon words.
//!
//! Every lexicon word is assigned to a set of domains: with probability
//! `shared_fraction` to all of them, otherwise to a random non-empty proper
//! subset. Documents are spread round-robin over the domains and filled with
//! words drawn uniformly from their domain's pool, plus an occasional filler
//! token. Output depends only on the lexicon, the config, and the seed.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::lexicon::Lexicon;

/// Tokens used as non-lexicon padding.
const FILLER: &[&str] = &["qzx", "vrel", "plonk", "trabe", "wudge", "sklim", "fronde", "yalt"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_docs: usize,
    pub domains: Vec<String>,
    pub min_len: usize,
    pub max_len: usize,
    pub shared_fraction: f64,
    pub filler_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_docs: 2000,
            domains: ["finance", "news", "social", "reviews"].map(String::from).to_vec(),
            min_len: 10,
            max_len: 40,
            shared_fraction: 0.6,
            filler_rate: 0.1,
        }
    }
}

/// Generate `config.n_docs` documents deterministically from `seed`.
pub fn synthesize(lex: &Lexicon, config: &SynthConfig, seed: u64) -> Vec<Document> {
    if config.n_docs == 0 || config.domains.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_domains = config.domains.len();
    let mut pools: Vec<Vec<&str>> = vec![Vec::new(); n_domains];
    let mut words: Vec<&str> = lex.words().collect();
    words.shuffle(&mut rng);
    for &word in &words {
        if n_domains == 1 || rng.random_bool(config.shared_fraction.clamp(0.0, 1.0)) {
            pools.iter_mut().for_each(|p| p.push(word));
        } else {
            let size = rng.random_range(1..n_domains);
            let mut idx: Vec<usize> = (0..n_domains).collect();
            idx.shuffle(&mut rng);
            for &d in &idx[..size] {
                pools[d].push(word);
            }
        }
    }
    for pool in pools.iter_mut().filter(|p| p.is_empty()) {
        pool.clone_from(&words);
    }

    let (lo, hi) = if config.min_len <= config.max_len {
        (config.min_len.max(1), config.max_len.max(1))
    } else {
        (config.max_len.max(1), config.min_len.max(1))
    };
    (0..config.n_docs)
        .map(|i| {
            let d = i % n_domains;
            let len = rng.random_range(lo..=hi);
            let tokens: Vec<&str> = (0..len)
                .map(|_| {
                    if rng.random_bool(config.filler_rate.clamp(0.0, 1.0)) {
                        FILLER[rng.random_range(0..FILLER.len())]
                    } else {
                        pools[d][rng.random_range(0..pools[d].len())]
                    }
                })
                .collect();
            let domain = &config.domains[d];
            Document::new(format!("{domain}-{i:06}"), domain.clone(), tokens.join(" "))
        })
        .collect()
}

/// Write documents as JSON Lines.
pub fn write_jsonl<W: Write>(docs: &[Document], mut w: W) -> std::io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut w, doc)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
