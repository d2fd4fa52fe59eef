//! Lexicon sentiment audit toolkit.
//!
//! Scores documents with a happiness lexicon (1–9 scale), compares the
//! scores against a pluggable reference scorer on the unit interval, and
//! looks for lexicon entries that drive disagreement by regressing the
//! per-document score differences on word indicators.
//!
//! - [`lexicon`]: lexicon loading, rescaling, lens filtering
//! - [`tokenize`]: normalization and bag-of-words counts
//! - [`scorer`]: document scores and differences
//! - [`reference`]: reference scorers (HTTP, stubs) with a persistent cache
//! - [`corpus`]: JSONL corpora, coverage statistics, vocabulary selection
//! - [`regress`]: design matrices and least squares inference
//! - [`analyze`]: rankings, Spearman correlation, difference curves
//! - [`synth`]: seeded synthetic corpora
//! - [`cli`]: command-line runs

pub mod analyze;
pub mod cli;
pub mod corpus;
pub mod lexicon;
pub mod reference;
pub mod regress;
pub mod scorer;
pub mod synth;
pub mod tokenize;
