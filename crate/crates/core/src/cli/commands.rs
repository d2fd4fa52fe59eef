//! Subcommand implementations.
//!
//! Output layout of `audit` (relative to the output directory):
//!
//! ```text
//! manifest.json            input/config digests
//! scores.csv               per-document scores
//! no_coverage.txt          ids of documents with no lexicon word
//! summary.csv              one row per analysis
//! reports.json             all audit reports
//! pooled/                  regression.csv rankings.csv curve.csv report.json
//! domains/<domain>/        same files, one directory per domain
//! ```

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::config::RunConfig;
use crate::analyze::{
    difference_curve, happiness_vs_p_correlation, rank_words, spearman, write_curve_csv, write_rankings_csv,
    AuditReport,
};
use crate::corpus::{self, coverage_stats, domains, load_corpus_file, select_vocabulary, Document};
use crate::lexicon::{apply_lens, load_lexicon_file, Lexicon, LexiconError};
use crate::reference::{score_batch, stub_scorer, HttpScorer, ReferenceError, ReferenceScorer, ScoreCache, StubParams};
use crate::regress::{build_design, fmt_f64, ols_fit, FitStatus, RegressionResult};
use crate::scorer::{score_text, DocumentScore, ScorePair};
use crate::synth::{synthesize, write_jsonl};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Provider(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Provider(_) => 3,
        }
    }
}

impl From<LexiconError> for CliError {
    fn from(e: LexiconError) -> Self {
        CliError::Input(format!("lexicon: {e}"))
    }
}

impl From<corpus::CorpusError> for CliError {
    fn from(e: corpus::CorpusError) -> Self {
        CliError::Input(format!("corpus: {e}"))
    }
}

impl From<ReferenceError> for CliError {
    fn from(e: ReferenceError) -> Self {
        match e {
            ReferenceError::Config(_) | ReferenceError::UnknownStubKind(_) | ReferenceError::Cache(_) => {
                CliError::Input(e.to_string())
            }
            other => CliError::Provider(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

/// Non-fatal result of a command.
#[derive(Debug, Default)]
pub struct Outcome {
    pub warnings: Vec<String>,
    /// Some analysis could not be completed (exit status 1).
    pub degenerate: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        u8::from(self.degenerate)
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

fn require<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Input(format!("no {what} given (use --{what} or the config file)")))
}

/// Audited lexicon with the configured lens applied.
pub fn load_audit_lexicon(cfg: &RunConfig) -> Result<Lexicon, CliError> {
    let lex = load_lexicon_file(require(&cfg.lexicon, "lexicon")?)?;
    Ok(match cfg.lens {
        Some((lo, hi)) => apply_lens(&lex, lo, hi)?,
        None => lex,
    })
}

fn build_reference(cfg: &RunConfig, lex: &Lexicon) -> Result<Option<Box<dyn ReferenceScorer>>, CliError> {
    let p = &cfg.provider;
    let Some(kind) = p.kind.as_deref() else {
        return Ok(None);
    };
    if kind == "http" {
        return Ok(Some(Box::new(HttpScorer::new(p.http.clone())?)));
    }
    let lexicon = match &p.reference_lexicon {
        Some(path) => load_lexicon_file(path)?,
        None => lex.clone(),
    };
    let params = StubParams {
        lexicon: Some(lexicon),
        overrides: p.overrides.clone(),
        constant: p.constant,
    };
    Ok(Some(Box::new(stub_scorer(kind, params)?)))
}

fn open_cache(cfg: &RunConfig) -> Result<ScoreCache, CliError> {
    Ok(match &cfg.cache {
        Some(path) => ScoreCache::open(path)?,
        None => ScoreCache::in_memory(),
    })
}

struct ScoredCorpus {
    docs: Vec<Document>,
    lexicon_scores: Vec<Option<DocumentScore>>,
    /// doc id → reference score on [0, 1]
    reference: HashMap<String, f64>,
}

impl ScoredCorpus {
    fn pairs(&self) -> Vec<(usize, ScorePair)> {
        self.docs
            .iter()
            .zip(&self.lexicon_scores)
            .enumerate()
            .filter_map(|(i, (doc, s))| {
                let s = s.as_ref()?;
                let r = *self.reference.get(&doc.id)?;
                ScorePair::new(doc.id.clone(), s.unit, r).ok().map(|p| (i, p))
            })
            .collect()
    }

    fn no_coverage(&self) -> impl Iterator<Item = &Document> {
        self.docs
            .iter()
            .zip(&self.lexicon_scores)
            .filter(|(_, s)| s.is_none())
            .map(|(d, _)| d)
    }
}

fn score_corpus(
    cfg: &RunConfig,
    lex: &Lexicon,
    docs: Vec<Document>,
    scorer: Option<&dyn ReferenceScorer>,
) -> Result<ScoredCorpus, CliError> {
    let lexicon_scores: Vec<Option<DocumentScore>> = docs.iter().map(|d| score_text(&d.text, lex).ok()).collect();
    let mut reference = HashMap::new();
    if let Some(scorer) = scorer {
        let covered: Vec<Document> = docs
            .iter()
            .zip(&lexicon_scores)
            .filter(|(_, s)| s.is_some())
            .map(|(d, _)| d.clone())
            .collect();
        let mut cache = open_cache(cfg)?;
        for r in score_batch(&covered, scorer, &mut cache, &cfg.provider.batch_options())? {
            reference.insert(r.doc_id, r.score);
        }
    }
    Ok(ScoredCorpus {
        docs,
        lexicon_scores,
        reference,
    })
}

fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn write_with<F>(path: &Path, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), Box<dyn std::error::Error>>,
{
    let mut w = create_file(path)?;
    f(&mut w).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

fn write_scores(dir: &Path, scored: &ScoredCorpus) -> Result<usize, CliError> {
    write_with(&dir.join("scores.csv"), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "doc_id",
            "domain",
            "hedonometer_raw",
            "hedonometer_unit",
            "reference_unit",
            "difference",
            "matched_words",
            "total_tokens",
        ])?;
        for (doc, s) in scored.docs.iter().zip(&scored.lexicon_scores) {
            let Some(s) = s else { continue };
            let reference = scored.reference.get(&doc.id);
            out.write_record([
                doc.id.clone(),
                doc.domain.clone(),
                fmt_f64(s.raw),
                fmt_f64(s.unit),
                reference.map(|&r| fmt_f64(r)).unwrap_or_default(),
                reference.map(|&r| fmt_f64(s.unit - r)).unwrap_or_default(),
                s.matched_tokens.to_string(),
                s.total_tokens.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    })?;
    let missing: Vec<&Document> = scored.no_coverage().collect();
    write_with(&dir.join("no_coverage.txt"), |w| {
        for d in &missing {
            writeln!(w, "{}", d.id)?;
        }
        Ok(())
    })?;
    Ok(missing.len())
}

/// `score`: per-document lexicon (and reference, if configured) scores.
pub fn cmd_score(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let lex = load_audit_lexicon(cfg)?;
    let docs = load_corpus_file(require(&cfg.corpus, "corpus")?)?;
    let scorer = build_reference(cfg, &lex)?;
    let scored = score_corpus(cfg, &lex, docs, scorer.as_deref())?;
    let missing = write_scores(&cfg.output, &scored)?;
    let mut outcome = Outcome::default();
    if missing > 0 {
        outcome.warn(format!(
            "{missing} of {} documents share no word with the lexicon; see no_coverage.txt",
            scored.docs.len()
        ));
    }
    Ok(outcome)
}

/// `coverage`: distinct lexicon words per domain and the domain-overlap histogram.
pub fn cmd_coverage(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let lex = load_audit_lexicon(cfg)?;
    let docs = load_corpus_file(require(&cfg.corpus, "corpus")?)?;
    let stats = coverage_stats(&docs, &lex)?;
    write_with(&cfg.output.join("coverage_domains.csv"), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["domain", "lexicon_words"])?;
        for (d, n) in &stats.per_domain {
            out.write_record([d.clone(), n.to_string()])?;
        }
        out.write_record(["(all)".to_string(), stats.total_distinct.to_string()])?;
        out.flush()?;
        Ok(())
    })?;
    write_with(&cfg.output.join("coverage_overlap.csv"), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["domains", "lexicon_words"])?;
        for (k, n) in &stats.overlap {
            out.write_record([k.to_string(), n.to_string()])?;
        }
        out.flush()?;
        Ok(())
    })?;
    Ok(Outcome::default())
}

/// `synth`: write a seeded synthetic corpus to the configured corpus path.
pub fn cmd_synth(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let lex = load_audit_lexicon(cfg)?;
    let path = require(&cfg.corpus, "corpus")?;
    let docs = synthesize(&lex, &cfg.synth, cfg.seed);
    write_with(path, |w| Ok(write_jsonl(&docs, w)?))?;
    Ok(Outcome::default())
}

/// Read a two-column CSV (key, value) with a header row.
fn read_rank_file(path: &Path) -> Result<Vec<(String, f64)>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let (Some(key), Some(value)) = (rec.get(0), rec.get(1)) else {
            return Err(io_err(path, format!("row {}: expected key,value", i + 2)));
        };
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| io_err(path, format!("row {}: non-numeric value {value:?}", i + 2)))?;
        rows.push((key.to_string(), value));
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelateOutput {
    pub rho: f64,
    pub n: usize,
}

/// `correlate`: Spearman rho between two key,value files joined on key.
pub fn cmd_correlate(a: &Path, b: &Path) -> Result<CorrelateOutput, CliError> {
    let left = read_rank_file(a)?;
    let right: HashMap<String, f64> = read_rank_file(b)?.into_iter().collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = left.iter().filter_map(|(k, x)| right.get(k).map(|y| (*x, *y))).unzip();
    let rho = spearman(&xs, &ys).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(CorrelateOutput { rho, n: xs.len() })
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    config_sha256: String,
    lexicon_sha256: String,
    corpus_sha256: String,
    reference_lexicon_sha256: Option<String>,
    provider: Option<String>,
    vocabulary_size: usize,
    analyses: Vec<String>,
}

fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Directory-safe rendering of a domain name.
fn dir_name(domain: &str) -> String {
    domain
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// One analysis (a domain or the pooled corpus) with everything it produced.
#[derive(Debug)]
pub struct Analysis {
    pub report: AuditReport,
    pub regression: Option<RegressionResult>,
    pub dir: PathBuf,
}

#[derive(Debug)]
pub struct AuditRun {
    pub vocabulary: Vec<String>,
    pub pooled: Analysis,
    pub domains: Vec<Analysis>,
    pub outcome: Outcome,
}

#[allow(clippy::too_many_arguments)]
fn analyze_subset(
    name: &str,
    docs: &[&Document],
    pairs: &[ScorePair],
    no_coverage_docs: usize,
    vocabulary: &[String],
    lex: &Lexicon,
    cfg: &RunConfig,
    dir: PathBuf,
    outcome: &mut Outcome,
) -> Result<Analysis, CliError> {
    let mut report = AuditReport {
        domain: name.to_string(),
        smallest_p: vec![],
        largest_p: vec![],
        spearman_rho: None,
        n_words_used: 0,
        excluded_zero_p: 0,
        no_coverage_docs,
        n_docs: docs.len(),
        vocabulary_size: vocabulary.len(),
        retained_words: 0,
        dropped_words: 0,
        fit_status: None,
        warnings: vec![],
    };
    let owned: Vec<Document> = docs.iter().map(|&d| d.clone()).collect();
    let fit = build_design(pairs, &owned, vocabulary, cfg.features).and_then(|x| ols_fit(&x));
    let regression = match fit {
        Ok(r) => Some(r),
        Err(e) => {
            report.warnings.push(format!("regression: {e}"));
            None
        }
    };
    if let Some(r) = &regression {
        report.fit_status = Some(r.status);
        report.retained_words = r.words().count();
        report.dropped_words = r.dropped_columns.len();
        if r.status != FitStatus::Ok {
            report.warnings.push(format!("regression status {:?}", r.status));
        }
        let k = cfg.top_k.min(report.retained_words);
        if k > 0 {
            let (small, large) = rank_words(r, k).map_err(|e| CliError::Input(e.to_string()))?;
            report.smallest_p = small;
            report.largest_p = large;
        }
        match happiness_vs_p_correlation(lex, r, cfg.zero_p_threshold) {
            Ok(c) => {
                report.spearman_rho = Some(c.rho);
                report.n_words_used = c.n_used;
                report.excluded_zero_p = c.n_excluded;
            }
            Err(e) => report.warnings.push(format!("spearman: {e}")),
        }
        write_with(&dir.join("regression.csv"), |w| Ok(r.write_csv(w)?))?;
    }
    write_with(&dir.join("rankings.csv"), |w| Ok(write_rankings_csv(&report, w)?))?;
    let curve = difference_curve(pairs).unwrap_or_default();
    write_with(&dir.join("curve.csv"), |w| Ok(write_curve_csv(&curve, w)?))?;
    write_json(&dir.join("report.json"), &report)?;

    if !report.warnings.is_empty() {
        outcome.degenerate = true;
        for w in &report.warnings {
            outcome.warn(format!("{name}: {w}"));
        }
    }
    Ok(Analysis {
        report,
        regression,
        dir,
    })
}

/// Full audit: scoring, reference comparison, per-domain and pooled regressions.
pub fn run_audit(cfg: &RunConfig) -> Result<AuditRun, CliError> {
    let lexicon_path = require(&cfg.lexicon, "lexicon")?;
    let corpus_path = require(&cfg.corpus, "corpus")?;
    let lex = load_audit_lexicon(cfg)?;
    let docs = load_corpus_file(corpus_path)?;
    let scorer = build_reference(cfg, &lex)?
        .ok_or_else(|| CliError::Input("audit needs a reference provider (--provider)".into()))?;
    let vocabulary = select_vocabulary(&docs, &lex, cfg.min_domains)?;
    let scored = score_corpus(cfg, &lex, docs, Some(scorer.as_ref()))?;

    let out = &cfg.output;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let mut outcome = Outcome::default();
    let missing = write_scores(out, &scored)?;
    if missing > 0 {
        outcome.warn(format!(
            "{missing} documents share no word with the lexicon and were excluded"
        ));
    }

    let pairs = scored.pairs();
    let all_docs: Vec<&Document> = scored.docs.iter().collect();
    let all_pairs: Vec<ScorePair> = pairs.iter().map(|(_, p)| p.clone()).collect();
    let pooled = analyze_subset(
        "pooled",
        &all_docs,
        &all_pairs,
        missing,
        &vocabulary,
        &lex,
        cfg,
        out.join("pooled"),
        &mut outcome,
    )?;

    let mut domain_runs = Vec::new();
    for domain in domains(&scored.docs) {
        let docs: Vec<&Document> = scored.docs.iter().filter(|d| d.domain == domain).collect();
        let pairs: Vec<ScorePair> = pairs
            .iter()
            .filter(|(i, _)| scored.docs[*i].domain == domain)
            .map(|(_, p)| p.clone())
            .collect();
        let missing = scored.no_coverage().filter(|d| d.domain == domain).count();
        let dir = out.join("domains").join(dir_name(&domain));
        domain_runs.push(analyze_subset(
            &domain,
            &docs,
            &pairs,
            missing,
            &vocabulary,
            &lex,
            cfg,
            dir,
            &mut outcome,
        )?);
    }

    let all: Vec<&Analysis> = domain_runs.iter().chain(std::iter::once(&pooled)).collect();
    write_with(&out.join("summary.csv"), |w| {
        let mut csvw = csv::Writer::from_writer(w);
        csvw.write_record([
            "analysis",
            "n_docs",
            "no_coverage_docs",
            "vocabulary_size",
            "retained_words",
            "dropped_words",
            "fit_status",
            "n_words_used",
            "excluded_zero_p",
            "spearman_rho",
        ])?;
        for a in &all {
            let r = &a.report;
            csvw.write_record([
                r.domain.clone(),
                r.n_docs.to_string(),
                r.no_coverage_docs.to_string(),
                r.vocabulary_size.to_string(),
                r.retained_words.to_string(),
                r.dropped_words.to_string(),
                r.fit_status
                    .map(|s| {
                        serde_json::to_value(s)
                            .unwrap()
                            .as_str()
                            .unwrap_or_default()
                            .to_string()
                    })
                    .unwrap_or_else(|| "failed".into()),
                r.n_words_used.to_string(),
                r.excluded_zero_p.to_string(),
                r.spearman_rho.map(fmt_f64).unwrap_or_default(),
            ])?;
        }
        csvw.flush()?;
        Ok(())
    })?;
    let reports: Vec<&AuditReport> = all.iter().map(|a| &a.report).collect();
    write_json(&out.join("reports.json"), &reports)?;

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: cfg.digest(),
        lexicon_sha256: file_digest(lexicon_path)?,
        corpus_sha256: file_digest(corpus_path)?,
        reference_lexicon_sha256: cfg.provider.reference_lexicon.as_deref().map(file_digest).transpose()?,
        provider: Some(scorer.provider().to_string()),
        vocabulary_size: vocabulary.len(),
        analyses: all.iter().map(|a| a.report.domain.clone()).collect(),
    };
    write_json(&out.join("manifest.json"), &manifest)?;

    Ok(AuditRun {
        vocabulary,
        pooled,
        domains: domain_runs,
        outcome,
    })
}

pub fn cmd_audit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    run_audit(cfg).map(|run| run.outcome)
}
