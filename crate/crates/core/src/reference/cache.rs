//! Append-only JSON Lines cache of reference scores.
//!
//! One object per line: `{"hash", "provider", "score", "fetched_at"}`.
//! Entries are keyed by (hash of NFC-normalized text, provider); when a key
//! occurs more than once the last line wins.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use super::ReferenceError;

/// SHA-256 hex digest of the NFC form of `text`.
pub fn content_hash(text: &str) -> String {
    let normalized: String = text.nfc().collect();
    hex::encode(Sha256::digest(normalized.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub hash: String,
    pub provider: String,
    pub score: f64,
    pub fetched_at: DateTime<Utc>,
}

#[derive(Debug, Default)]
pub struct ScoreCache {
    path: Option<PathBuf>,
    entries: HashMap<(String, String), CacheRecord>,
}

impl ScoreCache {
    /// Cache that lives only in memory.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Open (or lazily create) a cache file.
    pub fn open(path: &Path) -> Result<Self, ReferenceError> {
        let mut cache = Self {
            path: Some(path.to_path_buf()),
            entries: HashMap::new(),
        };
        if !path.exists() {
            return Ok(cache);
        }
        let file = File::open(path).map_err(|e| ReferenceError::Cache(format!("{}: {e}", path.display())))?;
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| ReferenceError::Cache(format!("{}: {e}", path.display())))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: CacheRecord = serde_json::from_str(&line)
                .map_err(|e| ReferenceError::Cache(format!("{}:{}: {e}", path.display(), idx + 1)))?;
            cache.insert(rec);
        }
        Ok(cache)
    }

    fn insert(&mut self, rec: CacheRecord) {
        self.entries.insert((rec.hash.clone(), rec.provider.clone()), rec);
    }

    pub fn get(&self, hash: &str, provider: &str) -> Option<&CacheRecord> {
        self.entries.get(&(hash.to_string(), provider.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Append records to the file (if any) and to the in-memory index.
    pub fn append(&mut self, records: Vec<CacheRecord>) -> Result<(), ReferenceError> {
        if records.is_empty() {
            return Ok(());
        }
        if let Some(path) = &self.path {
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| ReferenceError::Cache(format!("{}: {e}", path.display())))?;
            let mut buf = String::new();
            for rec in &records {
                buf.push_str(&serde_json::to_string(rec).expect("cache record serializes"));
                buf.push('\n');
            }
            file.write_all(buf.as_bytes())
                .map_err(|e| ReferenceError::Cache(format!("{}: {e}", path.display())))?;
        }
        for rec in records {
            self.insert(rec);
        }
        Ok(())
    }
}
