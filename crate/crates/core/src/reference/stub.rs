//! Deterministic local reference scorers.

use std::collections::BTreeMap;
use std::str::FromStr;

use super::{ReferenceError, ReferenceScorer};
use crate::lexicon::Lexicon;
use crate::scorer::score_document;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StubKind {
    LexiconEcho,
    PerturbedLexicon,
    Constant,
}

impl FromStr for StubKind {
    type Err = ReferenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lexicon-echo" => Ok(Self::LexiconEcho),
            "perturbed-lexicon" => Ok(Self::PerturbedLexicon),
            "constant" => Ok(Self::Constant),
            other => Err(ReferenceError::UnknownStubKind(other.to_string())),
        }
    }
}

/// Parameters for [`stub_scorer`].
#[derive(Debug, Clone, Default)]
pub struct StubParams {
    pub lexicon: Option<Lexicon>,
    pub overrides: BTreeMap<String, f64>,
    pub constant: Option<f64>,
}

#[derive(Debug, Clone)]
enum Inner {
    Lexicon(Lexicon),
    Constant(f64),
}

/// A stub scorer. Never touches the network and is never cached.
#[derive(Debug, Clone)]
pub struct StubScorer {
    name: String,
    inner: Inner,
}

impl ReferenceScorer for StubScorer {
    fn provider(&self) -> &str {
        &self.name
    }

    fn cacheable(&self) -> bool {
        false
    }

    fn score_texts(&self, texts: &[&str]) -> Result<Vec<f64>, ReferenceError> {
        match &self.inner {
            Inner::Constant(c) => Ok(vec![*c; texts.len()]),
            Inner::Lexicon(lex) => texts
                .iter()
                .map(|t| score_document(t, lex).map_err(|e| ReferenceError::Provider(format!("{}: {e}", self.name))))
                .collect(),
        }
    }
}

/// Build a stub scorer by kind name.
pub fn stub_scorer(kind: &str, params: StubParams) -> Result<StubScorer, ReferenceError> {
    let kind: StubKind = kind.parse()?;
    let need_lexicon = |p: StubParams| {
        p.lexicon
            .ok_or_else(|| ReferenceError::Config(format!("stub {kind:?} needs a lexicon")))
    };
    match kind {
        StubKind::Constant => {
            let c = params.constant.unwrap_or(0.5);
            if !(0.0..=1.0).contains(&c) {
                return Err(ReferenceError::Config(format!("constant score {c} outside [0, 1]")));
            }
            Ok(StubScorer {
                name: "constant".into(),
                inner: Inner::Constant(c),
            })
        }
        StubKind::LexiconEcho => Ok(StubScorer {
            name: "lexicon-echo".into(),
            inner: Inner::Lexicon(need_lexicon(params)?),
        }),
        StubKind::PerturbedLexicon => {
            let overrides = params.overrides.clone();
            let mut lex = need_lexicon(params)?;
            for (word, h) in &overrides {
                lex = lex
                    .with_override(word, *h)
                    .map_err(|e| ReferenceError::Config(format!("override {word}: {e}")))?;
            }
            Ok(StubScorer {
                name: "perturbed-lexicon".into(),
                inner: Inner::Lexicon(lex),
            })
        }
    }
}
