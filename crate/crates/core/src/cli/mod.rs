//! Command-line interface.
//!
//! Exit status: 0 success, 1 analysis degeneracy warnings, 2 input error,
//! 3 reference provider error.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_audit, cmd_correlate, cmd_coverage, cmd_score, cmd_synth, load_audit_lexicon, run_audit, Analysis, AuditRun,
    CliError, CorrelateOutput, Outcome,
};
pub use config::{ProviderConfig, RunConfig};

use crate::regress::FeatureMode;

#[derive(Debug, Parser)]
#[command(
    name = "lexaudit",
    version,
    about = "Audit a sentiment lexicon against a reference scorer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every document with the lexicon (and the reference, if configured)
    Score(RunArgs),
    /// Lexicon coverage per domain and domain-overlap histogram
    Coverage(RunArgs),
    /// Regress score differences on word indicators, per domain and pooled
    Audit(RunArgs),
    /// Generate a synthetic corpus from the lexicon
    Synth(RunArgs),
    /// Spearman correlation of two `key,value` CSV files joined on key
    Correlate { first: PathBuf, second: PathBuf },
    /// Print the effective configuration as TOML
    ShowConfig(RunArgs),
}

fn parse_lens(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LOW,HIGH")?;
    let lo = lo.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (word, h) = s.split_once('=').ok_or("expected WORD=HAPPINESS")?;
    Ok((word.to_string(), h.trim().parse::<f64>().map_err(|e| e.to_string())?))
}

/// Flags shared by the run subcommands; each overrides the config file.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// TOML configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Reference score cache (JSON Lines)
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Remove lexicon entries strictly inside LOW,HIGH
    #[arg(long, value_parser = parse_lens, value_name = "LOW,HIGH")]
    pub lens: Option<(f64, f64)>,
    #[arg(long)]
    pub min_domains: Option<usize>,
    /// presence | counts
    #[arg(long)]
    pub features: Option<FeatureMode>,
    #[arg(long)]
    pub zero_p_threshold: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// http | lexicon-echo | perturbed-lexicon | constant
    #[arg(long)]
    pub provider: Option<String>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub provider_name: Option<String>,
    #[arg(long)]
    pub auth_header: Option<String>,
    /// Environment variable holding the API credential
    #[arg(long)]
    pub auth_env: Option<String>,
    /// Dot path of the score inside each response document
    #[arg(long)]
    pub score_path: Option<String>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long)]
    pub retries: Option<u32>,
    #[arg(long)]
    pub backoff_ms: Option<u64>,
    /// Score returned by the `constant` stub
    #[arg(long)]
    pub constant: Option<f64>,
    /// Lexicon used by the lexicon stubs
    #[arg(long)]
    pub reference_lexicon: Option<PathBuf>,
    /// Happiness override for the `perturbed-lexicon` stub (repeatable)
    #[arg(long = "override", value_parser = parse_override, value_name = "WORD=HAPPINESS")]
    pub overrides: Vec<(String, f64)>,
    /// Number of synthetic documents
    #[arg(long)]
    pub n_docs: Option<usize>,
    /// Comma-separated synthetic domain names
    #[arg(long, value_delimiter = ',')]
    pub domains: Option<Vec<String>>,
}

impl RunArgs {
    /// Config file (or defaults) with every given flag applied on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path).map_err(CliError::Input)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value.clone() {
                    $field = v;
                }
            };
        }
        set!(cfg.output, self.output);
        set!(cfg.min_domains, self.min_domains);
        set!(cfg.features, self.features);
        set!(cfg.zero_p_threshold, self.zero_p_threshold);
        set!(cfg.top_k, self.top_k);
        set!(cfg.seed, self.seed);
        set!(cfg.provider.http.endpoint, self.endpoint);
        set!(cfg.provider.http.provider_name, self.provider_name);
        set!(cfg.provider.http.response_score_path, self.score_path);
        set!(cfg.provider.batch_size, self.batch_size);
        set!(cfg.provider.concurrency, self.concurrency);
        set!(cfg.provider.retries, self.retries);
        set!(cfg.provider.backoff_ms, self.backoff_ms);
        set!(cfg.synth.n_docs, self.n_docs);
        set!(cfg.synth.domains, self.domains);
        if self.lexicon.is_some() {
            cfg.lexicon = self.lexicon.clone();
        }
        if self.corpus.is_some() {
            cfg.corpus = self.corpus.clone();
        }
        if self.cache.is_some() {
            cfg.cache = self.cache.clone();
        }
        if self.lens.is_some() {
            cfg.lens = self.lens;
        }
        if self.provider.is_some() {
            cfg.provider.kind = self.provider.clone();
        }
        if self.auth_header.is_some() {
            cfg.provider.http.auth_header = self.auth_header.clone();
        }
        if self.auth_env.is_some() {
            cfg.provider.http.auth_env = self.auth_env.clone();
        }
        if self.constant.is_some() {
            cfg.provider.constant = self.constant;
        }
        if self.reference_lexicon.is_some() {
            cfg.provider.reference_lexicon = self.reference_lexicon.clone();
        }
        cfg.provider.overrides.extend(self.overrides.iter().cloned());
        Ok(cfg)
    }
}

/// Run a parsed command line and return the process exit status.
pub fn run(cli: Cli) -> u8 {
    let result = match &cli.command {
        Command::Score(args) => args.resolve().and_then(|c| cmd_score(&c)),
        Command::Coverage(args) => args.resolve().and_then(|c| cmd_coverage(&c)),
        Command::Audit(args) => args.resolve().and_then(|c| cmd_audit(&c)),
        Command::Synth(args) => args.resolve().and_then(|c| cmd_synth(&c)),
        Command::Correlate { first, second } => cmd_correlate(first, second).map(|out| {
            println!("spearman_rho,n");
            println!("{},{}", out.rho, out.n);
            Outcome::default()
        }),
        Command::ShowConfig(args) => args.resolve().map(|c| {
            print!("{}", c.to_toml());
            Outcome::default()
        }),
    };
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
