//! Provider-agnostic HTTP adapter.
//!
//! Each batch is sent as one JSON POST:
//!
//! ```json
//! {"documents": [{"id": "0", "text": "...", "language": "en"}, ...]}
//! ```
//!
//! The array field, per-document id/text fields and any constant extra
//! fields are configurable. The response is located by dot-separated paths:
//! an array of documents, an id field inside each, and a score path inside
//! each (e.g. `confidenceScores.positive`). Ids are batch-local indices.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{ReferenceError, ReferenceScorer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpConfig {
    pub endpoint: String,
    /// Name recorded in the cache; change it when the model changes.
    pub provider_name: String,
    /// Header carrying the credential, e.g. `Ocp-Apim-Subscription-Key`.
    pub auth_header: Option<String>,
    /// Environment variable holding the credential.
    pub auth_env: Option<String>,
    pub documents_field: String,
    pub id_field: String,
    pub text_field: String,
    pub extra_fields: BTreeMap<String, String>,
    pub response_documents_path: String,
    pub response_id_field: String,
    pub response_score_path: String,
    pub timeout_secs: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            provider_name: "http".into(),
            auth_header: None,
            auth_env: None,
            documents_field: "documents".into(),
            id_field: "id".into(),
            text_field: "text".into(),
            extra_fields: BTreeMap::new(),
            response_documents_path: "documents".into(),
            response_id_field: "id".into(),
            response_score_path: "score".into(),
            timeout_secs: 30,
        }
    }
}

pub struct HttpScorer {
    config: HttpConfig,
    auth: Option<(String, String)>,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpScorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpScorer")
            .field("endpoint", &self.config.endpoint)
            .field("provider", &self.config.provider_name)
            .finish_non_exhaustive()
    }
}

impl HttpScorer {
    /// Build a client; the credential is read from `auth_env` now.
    pub fn new(config: HttpConfig) -> Result<Self, ReferenceError> {
        if config.endpoint.is_empty() {
            return Err(ReferenceError::Config("http provider needs an endpoint".into()));
        }
        let auth = match (&config.auth_header, &config.auth_env) {
            (Some(header), Some(var)) => {
                let secret = std::env::var(var)
                    .map_err(|_| ReferenceError::Config(format!("environment variable {var} is not set")))?;
                Some((header.clone(), secret))
            }
            (None, None) => None,
            _ => {
                return Err(ReferenceError::Config(
                    "auth_header and auth_env must be given together".into(),
                ))
            }
        };
        let agent = ureq::Agent::new_with_config(
            ureq::Agent::config_builder()
                .http_status_as_error(false)
                .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
                .build(),
        );
        Ok(Self { config, auth, agent })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    /// JSON request body for a batch.
    pub fn request_body(&self, texts: &[&str]) -> Value {
        let docs: Vec<Value> = texts
            .iter()
            .enumerate()
            .map(|(i, text)| {
                let mut obj = Map::new();
                obj.insert(self.config.id_field.clone(), json!(i.to_string()));
                obj.insert(self.config.text_field.clone(), json!(text));
                for (k, v) in &self.config.extra_fields {
                    obj.insert(k.clone(), json!(v));
                }
                Value::Object(obj)
            })
            .collect();
        let mut body = Map::new();
        body.insert(self.config.documents_field.clone(), Value::Array(docs));
        Value::Object(body)
    }

    /// Extract one score per request document from a response body.
    pub fn parse_response(&self, body: &Value, n: usize) -> Result<Vec<f64>, ReferenceError> {
        let docs = lookup(body, &self.config.response_documents_path)
            .and_then(Value::as_array)
            .ok_or_else(|| {
                ReferenceError::Provider(format!(
                    "response has no array at {:?}",
                    self.config.response_documents_path
                ))
            })?;
        let mut scores = vec![None; n];
        for doc in docs {
            let id = match lookup(doc, &self.config.response_id_field) {
                Some(Value::String(s)) => s.parse::<usize>().ok(),
                Some(Value::Number(num)) => num.as_u64().map(|v| v as usize),
                _ => None,
            };
            let Some(id) = id.filter(|&i| i < n) else {
                return Err(ReferenceError::Provider(format!(
                    "unexpected document id in response: {doc}"
                )));
            };
            let score = lookup(doc, &self.config.response_score_path)
                .and_then(Value::as_f64)
                .ok_or_else(|| {
                    ReferenceError::Provider(format!(
                        "document {id} has no number at {:?}",
                        self.config.response_score_path
                    ))
                })?;
            scores[id] = Some(score);
        }
        scores
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| ReferenceError::Provider(format!("no score returned for document {i}"))))
            .collect()
    }
}

/// Follow a dot-separated path of object keys (or array indices).
fn lookup<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    if path.is_empty() {
        return Some(value);
    }
    path.split('.').try_fold(value, |v, key| match v {
        Value::Object(map) => map.get(key),
        Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get(i)),
        _ => None,
    })
}

fn is_transient_status(status: u16) -> bool {
    status == 408 || status == 429 || (500..600).contains(&status)
}

impl ReferenceScorer for HttpScorer {
    fn provider(&self) -> &str {
        &self.config.provider_name
    }

    fn score_texts(&self, texts: &[&str]) -> Result<Vec<f64>, ReferenceError> {
        let mut req = self.agent.post(&self.config.endpoint);
        if let Some((header, secret)) = &self.auth {
            req = req.header(header.as_str(), secret.as_str());
        }
        let mut resp = match req.send_json(self.request_body(texts)) {
            Ok(resp) => resp,
            Err(ureq::Error::Timeout(t)) => return Err(ReferenceError::Transient(format!("timeout: {t}"))),
            Err(e @ (ureq::Error::Io(_) | ureq::Error::ConnectionFailed | ureq::Error::HostNotFound)) => {
                return Err(ReferenceError::Transient(e.to_string()))
            }
            Err(e) => return Err(ReferenceError::Provider(e.to_string())),
        };
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            let detail = resp.body_mut().read_to_string().unwrap_or_default();
            let msg = format!("HTTP {status}: {}", detail.chars().take(200).collect::<String>());
            return Err(if is_transient_status(status) {
                ReferenceError::Transient(msg)
            } else {
                ReferenceError::Provider(msg)
            });
        }
        let body: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| ReferenceError::Provider(format!("invalid JSON response: {e}")))?;
        self.parse_response(&body, texts.len())
    }
}
