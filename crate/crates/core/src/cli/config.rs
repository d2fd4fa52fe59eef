//! Run configuration: a TOML file whose keys can all be overridden by flags.
//!
//! ```toml
//! lexicon = "lexicon.tsv"
//! corpus = "corpus.jsonl"
//! output = "out"
//! cache = "scores-cache.jsonl"
//! lens = [4.0, 6.0]
//! min_domains = 3
//! features = "presence"
//! zero_p_threshold = 1e-300
//! top_k = 10
//! seed = 0
//!
//! [provider]
//! kind = "http"            # http | lexicon-echo | perturbed-lexicon | constant
//! batch_size = 10
//! concurrency = 4
//! retries = 3
//! backoff_ms = 500
//!
//! [provider.http]
//! endpoint = "https://example.invalid/text/analytics/v2.1/sentiment"
//! auth_header = "Ocp-Apim-Subscription-Key"
//! auth_env = "SENTIMENT_API_KEY"
//! response_score_path = "score"
//!
//! [synth]
//! n_docs = 2000
//! domains = ["finance", "news", "social", "reviews"]
//! ```
//!
//! Secrets never live in the file; `auth_env` names the variable holding one.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::reference::{BatchOptions, HttpConfig};
use crate::regress::FeatureMode;
use crate::synth::SynthConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lexicon: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub output: PathBuf,
    pub cache: Option<PathBuf>,
    /// Exclusion band (low, high); entries strictly inside are dropped.
    pub lens: Option<(f64, f64)>,
    pub min_domains: usize,
    pub features: FeatureMode,
    pub zero_p_threshold: f64,
    pub top_k: usize,
    pub seed: u64,
    pub provider: ProviderConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lexicon: None,
            corpus: None,
            output: PathBuf::from("out"),
            cache: None,
            lens: None,
            min_domains: 3,
            features: FeatureMode::Presence,
            zero_p_threshold: 1e-300,
            top_k: 10,
            seed: 0,
            provider: ProviderConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    /// `http`, `lexicon-echo`, `perturbed-lexicon` or `constant`; unset means no reference.
    pub kind: Option<String>,
    pub batch_size: usize,
    pub concurrency: usize,
    pub retries: u32,
    pub backoff_ms: u64,
    pub constant: Option<f64>,
    /// Lexicon used by the lexicon stubs; defaults to the audited lexicon.
    pub reference_lexicon: Option<PathBuf>,
    pub overrides: BTreeMap<String, f64>,
    pub http: HttpConfig,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        let batch = BatchOptions::default();
        Self {
            kind: None,
            batch_size: batch.batch_size,
            concurrency: batch.concurrency,
            retries: batch.retries,
            backoff_ms: batch.backoff.as_millis() as u64,
            constant: None,
            reference_lexicon: None,
            overrides: BTreeMap::new(),
            http: HttpConfig::default(),
        }
    }
}

impl ProviderConfig {
    pub fn batch_options(&self) -> BatchOptions {
        BatchOptions {
            batch_size: self.batch_size,
            concurrency: self.concurrency,
            retries: self.retries,
            backoff: std::time::Duration::from_millis(self.backoff_ms),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.min_domains, 3);
        assert_eq!(cfg.top_k, 10);
        assert_eq!(cfg.zero_p_threshold, 1e-300);
        assert_eq!(cfg.features, FeatureMode::Presence);
        assert_eq!(cfg.provider.concurrency, 4);
        assert_eq!(cfg.provider.retries, 3);
        assert_eq!(cfg.provider.backoff_ms, 500);
        assert_eq!(RunConfig::from_toml("").unwrap(), cfg);
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig {
            lexicon: Some("lex.tsv".into()),
            corpus: Some("c.jsonl".into()),
            lens: Some((4.0, 6.0)),
            features: FeatureMode::Counts,
            seed: 99,
            ..Default::default()
        };
        cfg.provider.kind = Some("perturbed-lexicon".into());
        cfg.provider.overrides.insert("laughter".into(), 1.5);
        cfg.provider.http.extra_fields.insert("language".into(), "en".into());
        cfg.synth.n_docs = 17;
        let text = cfg.to_toml();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(RunConfig::from_toml(&text).unwrap().digest(), cfg.digest());
    }

    #[test]
    fn parses_documented_example() {
        let text = r#"
lexicon = "lexicon.tsv"
lens = [4.0, 6.0]
features = "counts"

[provider]
kind = "http"

[provider.http]
endpoint = "https://example.invalid/sentiment"
auth_header = "Ocp-Apim-Subscription-Key"
auth_env = "SENTIMENT_API_KEY"
response_score_path = "confidenceScores.positive"

[synth]
n_docs = 10
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.lens, Some((4.0, 6.0)));
        assert_eq!(cfg.provider.http.response_score_path, "confidenceScores.positive");
        assert_eq!(cfg.synth.n_docs, 10);
        assert_eq!(cfg.synth.domains.len(), 4);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("min_domain = 2").is_err());
        assert!(RunConfig::from_toml("features = \"tfidf\"").is_err());
    }
}
