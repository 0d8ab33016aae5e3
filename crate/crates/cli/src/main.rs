//! `fpnc`: run SNR sweeps, single trials and the built-in self-test.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpnc::config::load_scenario;
use fpnc::experiments::{selftest, snr_sweep, SchemeId, SweepConfig, SweepSummary};
use fpnc::relay::{CfoEstimator, CfoStrategy, MappingRule};
use fpnc::Error;

#[derive(Parser, Debug)]
#[command(name = "fpnc", version, about = "Link-level simulator of frequency-domain PNC over OFDM")]
struct Cli {
    /// Worker threads for the trial pool (default: one per core).
    #[arg(long, global = true, env = "FPNC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo sweep over SNR and offset; writes one CSV row per point.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// CSV destination (stdout if omitted).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Per-trial diagnostics as JSON lines.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Run a few exchanges and report their outcome.
    SingleTrial {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Convolution-theorem, alignment and noiseless exchange checks.
    Selftest {
        /// Random cases per check.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML scenario file; flags below override its values.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// SNR points in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr: Option<Vec<f64>>,
    /// B's arrival offsets in samples, comma separated.
    #[arg(long, value_delimiter = ',')]
    offset: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    #[arg(long)]
    cfo_strategy: Option<Strategy>,
    #[arg(long)]
    cfo_estimator: Option<Estimator>,
    #[arg(long)]
    mapping: Option<Mapping>,
    /// Accept delay spreads beyond the cyclic prefix.
    #[arg(long)]
    allow_cp_violation: bool,
    /// Zero noise on every link.
    #[arg(long)]
    noiseless: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scheme {
    Fpnc,
    Snc,
    Ts,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Strategy {
    Mean,
    AOnly,
    BOnly,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Estimator {
    Mean,
    Median,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mapping {
    Logmax,
    Exact,
}

impl From<Scheme> for SchemeId {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Fpnc => SchemeId::Fpnc,
            Scheme::Snc => SchemeId::Snc,
            Scheme::Ts => SchemeId::Ts,
        }
    }
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::CpViolation { .. } | Error::Scenario(_) | Error::OutOfUnitRange { .. } => 1,
            Error::LengthMismatch { .. } | Error::Io(_) | Error::Csv(_) => 2,
        };
        let message = match e {
            Error::CpViolation { .. } => format!("{e} (pass --allow-cp-violation to run anyway)"),
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

impl RunArgs {
    /// Scenario (or defaults) with the flags applied, validated.
    fn config(&self, single: bool) -> Result<SweepConfig, Failure> {
        let mut cfg = match &self.scenario {
            Some(path) => load_scenario(path)?,
            None if single => SweepConfig {
                trials: 1,
                schemes: vec![SchemeId::Fpnc],
                snr_db: vec![20.0],
                ..SweepConfig::default()
            },
            None => SweepConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(snr) = &self.snr {
            cfg.snr_db = snr.clone();
        }
        if let Some(offsets) = &self.offset {
            cfg.offsets = offsets.clone();
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(schemes) = &self.schemes {
            cfg.schemes = schemes.iter().map(|&s| s.into()).collect();
        }
        if let Some(s) = self.cfo_strategy {
            cfg.receiver.cfo_strategy = match s {
                Strategy::Mean => CfoStrategy::Mean,
                Strategy::AOnly => CfoStrategy::AOnly,
                Strategy::BOnly => CfoStrategy::BOnly,
            };
        }
        if let Some(e) = self.cfo_estimator {
            cfg.receiver.cfo_estimator = match e {
                Estimator::Mean => CfoEstimator::Mean,
                Estimator::Median => CfoEstimator::Median,
            };
        }
        if let Some(m) = self.mapping {
            cfg.receiver.mapping = match m {
                Mapping::Logmax => MappingRule::LogMax,
                Mapping::Exact => MappingRule::Exact,
            };
        }
        cfg.allow_cp_violation |= self.allow_cp_violation;
        cfg.noiseless |= self.noiseless;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Writes via a temporary file in the destination directory, then renames,
/// so readers never see a partial file.
fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> fpnc::Result<()>) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let runtime = |e: std::io::Error| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(runtime)?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush().map_err(runtime)?;
    }
    tmp.persist(path).map_err(|e| runtime(e.error))?;
    Ok(())
}

fn print_table(summary: &SweepSummary) {
    println!("{:<6}{:>8}{:>8}{:>8}{:>12}{:>12}{:>12}", "scheme", "snr_db", "offset", "trials", "fer", "ber", "throughput");
    for r in &summary.rows {
        println!(
            "{:<6}{:>8.1}{:>8}{:>8}{:>12.4e}{:>12.4e}{:>12.4}",
            r.scheme.as_str(),
            r.snr_db,
            r.offset,
            r.trials,
            r.fer.rate,
            r.ber.rate,
            r.throughput
        );
    }
}

fn sweep(run: &RunArgs, output: Option<&Path>, diagnostics: Option<&Path>) -> Result<(), Failure> {
    let cfg = run.config(false)?;
    let summary = snr_sweep(&cfg)?;
    match output {
        Some(path) => {
            write_atomic(path, |w| summary.write_csv(w))?;
            print_table(&summary);
        }
        None => summary.write_csv(std::io::stdout().lock())?,
    }
    if let Some(path) = diagnostics {
        write_atomic(path, |w| summary.write_diagnostics(w))?;
    }
    Ok(())
}

fn single_trial(run: &RunArgs) -> Result<(), Failure> {
    let cfg = run.config(true)?;
    let summary = snr_sweep(&cfg)?;
    for row in &summary.rows {
        let recs: Vec<_> = summary
            .records
            .iter()
            .filter(|r| r.scheme == row.scheme && r.snr_db == row.snr_db && r.offset == row.offset)
            .collect();
        let frame_errors = recs.iter().filter(|r| r.uplink_frame_error).count();
        let bit_errors: usize = recs.iter().map(|r| r.xor_bit_errors).sum();
        let bits: usize = recs.iter().map(|r| r.total_bits).sum();
        let synced = recs.iter().filter(|r| r.sync_ok).count();
        let exchanged = recs.iter().filter(|r| r.exchange_ok).count();
        let snr = if cfg.noiseless { "noiseless".to_string() } else { format!("{} dB", row.snr_db) };
        println!("{} | {snr} | offset {} | {} trial(s)", row.scheme, row.offset, recs.len());
        println!("  sync ok: {synced}/{}", recs.len());
        if row.scheme == SchemeId::Ts {
            println!("  uplink frame errors: {frame_errors}");
        } else {
            println!("  XOR bit errors: {bit_errors}/{bits}");
            println!("  XOR frame errors: {frame_errors}");
        }
        println!("  exchanges completed: {exchanged}/{}", recs.len());
    }
    Ok(())
}

fn run_selftest(trials: usize, seed: u64) -> Result<bool, Failure> {
    let params = fpnc::phy::OfdmParams::default();
    let checks = selftest(&params, trials, seed)?;
    let mut all = true;
    for c in &checks {
        println!("{}: {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        all &= c.passed;
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: invalid arguments"));
            return ExitCode::from(1);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        fpnc::par::init_thread_pool(n);
    }
    let outcome = match &cli.command {
        Command::Sweep { run, output, diagnostics } => sweep(run, output.as_deref(), diagnostics.as_deref()),
        Command::SingleTrial { run } => single_trial(run),
        Command::Selftest { trials, seed } => match run_selftest(*trials, *seed) {
            Ok(true) => Ok(()),
            Ok(false) => Err(Failure {
                code: 2,
                message: "self-test failed".into(),
            }),
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
