//! Command-line surface: argument parsing, the subcommand drivers and exit
//! codes (0 ok, 1 verification failure, 2 usage, 3 capacity/coverage/IO).

mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{density_report, interval_data, sieve_bound_for, verify_all, DensityParams};
use crate::error::Error;
use crate::model::{cramer_generate, gap_ratio_stats_from};
use crate::rational::Multiplier;
use crate::sieve::{load_cache, save_cache, sieve_range, PrimeTable};

pub use report::{render, write_report, Report, ReportBody};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Sieve,
    Classify,
    Densities,
    Verify,
    Simulate,
    Gaps,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub limit: u64,
    pub multiplier: Multiplier,
    pub k_max: usize,
    pub h_max: usize,
    pub blocks: usize,
    pub seed: Option<u64>,
    pub gap_from: usize,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub cache: Option<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(
    name = "doubled-intervals",
    version,
    about = "Primes in the intervals (m*p_n, m*p_{n+1}): classification, verification and density statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// List the primes up to the limit (n,prime)
    Sieve(Common),
    /// R/L/RL flags for every prime up to the limit
    Classify(Common),
    /// Empirical densities, RL estimators, geometric fit and block densities
    Densities(Common),
    /// Check criterion/definition equivalence, interleaving and interval structure
    Verify(Common),
    /// Run the densities and verification pipeline on a Cramér random set
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Maximal gap ratios (p_{n+1} - p_n) / ln^2 p_n and / ln^2 n
    Gaps {
        #[command(flatten)]
        common: Common,
        /// First index n included in the maxima
        #[arg(long = "from", default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
        gap_from: u64,
    },
    /// Per-interval records (n,p_lo,p_hi,count)
    Report(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Largest anchor prime p_n considered (>= 3)
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    limit: u64,
    /// Interval scale m as num/den, 1 < m <= 2
    #[arg(long, default_value = "2/1", value_parser = parse_multiplier)]
    multiplier: Multiplier,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
    k_max: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    h_max: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    blocks: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when absent
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads (output does not depend on this)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Binary prime cache: loaded when present and large enough, written otherwise
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn parse_multiplier(s: &str) -> Result<Multiplier, String> {
    s.parse::<Multiplier>().map_err(|e| e.to_string())
}

/// Parses `argv` (including the program name).
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (command, common, seed, gap_from) = match cli.command {
        Sub::Sieve(c) => (CommandKind::Sieve, c, None, 2),
        Sub::Classify(c) => (CommandKind::Classify, c, None, 2),
        Sub::Densities(c) => (CommandKind::Densities, c, None, 2),
        Sub::Verify(c) => (CommandKind::Verify, c, None, 2),
        Sub::Simulate { common, seed } => (CommandKind::Simulate, common, Some(seed), 2),
        Sub::Gaps { common, gap_from } => (CommandKind::Gaps, common, None, gap_from as usize),
        Sub::Report(c) => (CommandKind::Report, c, None, 2),
    };
    Ok(RunConfig {
        command,
        limit: common.limit,
        multiplier: common.multiplier,
        k_max: common.k_max as usize,
        h_max: common.h_max as usize,
        blocks: common.blocks as usize,
        seed,
        gap_from,
        format: common.format,
        output: common.output,
        threads: common.threads.map(|t| t as usize),
        cache: common.cache,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        3
    }
}

/// Provenance block embedded in every JSON report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Meta {
    pub command: CommandKind,
    /// `primes` or `cramer`
    pub source: &'static str,
    pub limit: u64,
    pub multiplier: Multiplier,
    pub k_max: usize,
    pub h_max: usize,
    pub blocks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_from: Option<usize>,
    pub version: &'static str,
    pub sieve_bound: u64,
    /// Number of intervals (or primes, for sieve/classify) reported.
    pub n_max: usize,
}

/// Executes the command, writes its report and returns the exit code.
pub fn run(config: &RunConfig) -> Result<i32, CliError> {
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| execute(config)),
        None => execute(config),
    }
}

fn execute(cfg: &RunConfig) -> Result<i32, CliError> {
    let (report, code) = build(cfg)?;
    write_report(&report, cfg.format, cfg.output.as_deref())?;
    if code != 0 {
        if let ReportBody::Verify(v)
        | ReportBody::Densities {
            verdicts: Some(v), ..
        } = &report.body
        {
            eprintln!("verification failed: {}", report::first_failure(v));
        }
    }
    Ok(code)
}

fn prime_table(cfg: &RunConfig, bound: u64) -> Result<PrimeTable, CliError> {
    let Some(path) = &cfg.cache else {
        return Ok(sieve_range(bound)?);
    };
    if path.exists() {
        match load_cache(path, bound) {
            Ok(t) => return Ok(t),
            // too small: rebuild below
            Err(Error::Cache { reason, .. }) if reason.contains("below required") => {}
            Err(e) => return Err(e.into()),
        }
    }
    let t = sieve_range(bound)?;
    save_cache(&t, path)?;
    Ok(t)
}

/// Builds the report for `cfg` without writing anything.
pub fn build(cfg: &RunConfig) -> Result<(Report, i32), CliError> {
    let m = cfg.multiplier;
    let params = DensityParams {
        k_max: cfg.k_max,
        h_max: cfg.h_max,
        blocks: cfg.blocks,
    };
    let bound = match cfg.command {
        CommandKind::Sieve | CommandKind::Gaps => cfg.limit,
        _ => sieve_bound_for(cfg.limit, m),
    };
    let mut meta = Meta {
        command: cfg.command,
        source: "primes",
        limit: cfg.limit,
        multiplier: m,
        k_max: cfg.k_max,
        h_max: cfg.h_max,
        blocks: cfg.blocks,
        seed: None,
        gap_from: None,
        version: env!("CARGO_PKG_VERSION"),
        sieve_bound: bound,
        n_max: 0,
    };
    let mut code = 0;
    let body = match cfg.command {
        CommandKind::Sieve => {
            let t = prime_table(cfg, bound)?;
            meta.n_max = t.count();
            ReportBody::Primes(t.primes().to_vec())
        }
        CommandKind::Classify => {
            let t = prime_table(cfg, bound)?;
            let n_last = t.pi(cfg.limit)?.min(t.count().saturating_sub(1));
            let classes = crate::classify::classify_range(&t, m, 1, n_last)?;
            meta.n_max = classes.len();
            ReportBody::Classes(classes)
        }
        CommandKind::Report => {
            let t = prime_table(cfg, bound)?;
            let n_max = crate::analysis::usable_n_max(&t, m, cfg.limit)?;
            meta.n_max = n_max;
            ReportBody::Intervals(crate::intervals::collect_intervals(&t, m, n_max)?)
        }
        CommandKind::Densities => {
            let t = prime_table(cfg, bound)?;
            let data = interval_data(&t, m, cfg.limit)?;
            meta.n_max = data.n_max();
            ReportBody::Densities {
                density: Box::new(density_report(&data, params)?),
                verdicts: None,
            }
        }
        CommandKind::Verify => {
            let t = prime_table(cfg, bound)?;
            let data = interval_data(&t, m, cfg.limit)?;
            meta.n_max = data.n_max();
            let v = verify_all(&t, &data)?;
            if !v.passed() {
                code = 1;
            }
            ReportBody::Verify(v)
        }
        CommandKind::Simulate => {
            let seed = cfg.seed.unwrap_or(0);
            meta.source = "cramer";
            meta.seed = Some(seed);
            let t = cramer_generate(bound, seed)?.to_table();
            let data = interval_data(&t, m, cfg.limit)?;
            meta.n_max = data.n_max();
            let density = density_report(&data, params)?;
            let v = verify_all(&t, &data)?;
            ReportBody::Densities {
                density: Box::new(density),
                verdicts: Some(v),
            }
        }
        CommandKind::Gaps => {
            let t = prime_table(cfg, bound)?;
            meta.gap_from = Some(cfg.gap_from);
            let n_max = t.count().saturating_sub(1);
            meta.n_max = n_max;
            ReportBody::Gaps(gap_ratio_stats_from::<f64>(&t, cfg.gap_from, n_max)?)
        }
    };
    Ok((Report { meta, body }, code))
}
