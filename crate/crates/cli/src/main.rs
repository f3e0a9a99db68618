//! Command-line front end: threshold runs, table reproduction, scaling
//! sweeps, NPT detection, and certificate verification.
//!
//! Exit codes: 0 success, 2 usage error, 3 verification failure,
//! 4 solver gave up (no certificate at any probed noise level).

mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use entdis_core::channels::NoiseKind;
use entdis_core::solver::DissociationClass;
use std::path::PathBuf;
use std::process::ExitCode;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_VERIFICATION: u8 = 3;
pub const EXIT_GAVE_UP: u8 = 4;

#[derive(Parser)]
#[command(
    name = "entdis",
    about = "Noise thresholds for multiqubit entanglement structure under depolarizing channels",
    version
)]
struct Cli {
    /// Cap the worker thread pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonRunArgs {
    /// Number of qubits.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Input state: ghz, w, cluster, upb, random:<seed>, or all.
    #[arg(long, default_value = "ghz")]
    state: String,
    /// Noise model: local or global.
    #[arg(long, default_value = "local")]
    noise: String,
    /// Bisection resolution on q.
    #[arg(long, default_value_t = 1e-3)]
    resolution: f64,
    /// Seed for the deterministic multi-start search.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute dissociation thresholds for chosen classes, with certificates.
    Thresholds {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Comma-separated classes: ea (a), b, c, d, dge (e).
        #[arg(long, default_value = "ea,dge")]
        classes: String,
        /// Directory for certificate files.
        #[arg(long, default_value = "certs")]
        cert_dir: PathBuf,
        /// Disable constraint deduplication (diagnostic).
        #[arg(long)]
        no_dedup: bool,
    },
    /// Reproduce the threshold tables with reference annotations.
    Table {
        /// Which table: I (local noise) or II (global noise).
        #[arg(long)]
        which: String,
        /// quick = 3- and 4-qubit rows; full adds the 6-qubit rows.
        #[arg(long, default_value = "quick")]
        scope: String,
        /// Skip the all-states rows (they run the seesaw screen).
        #[arg(long)]
        skip_all_rows: bool,
        #[arg(long, default_value_t = 1e-3)]
        resolution: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for certificate files.
        #[arg(long, default_value = "certs")]
        cert_dir: PathBuf,
    },
    /// Threshold scaling with system size for the ea/dge classes.
    Scaling {
        /// Comma-separated classes out of: ea, dge.
        #[arg(long, default_value = "ea,dge")]
        classes: String,
        #[arg(long, default_value_t = 3)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value = "ghz")]
        state: String,
        #[arg(long, default_value = "local")]
        noise: String,
        #[arg(long, default_value_t = 1e-3)]
        resolution: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// NPT thresholds from the partial-transpose criterion.
    Npt {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Cut shape: asym for (1, N-1), sym for (N/2, N/2), or both.
        #[arg(long, default_value = "both")]
        bipartition: String,
    },
    /// Re-verify a certificate file; exit 0 iff it passes.
    Verify {
        /// Path to a certificate JSON file.
        path: PathBuf,
    },
}

pub struct UsageError(pub String);

pub fn parse_noise(text: &str) -> Result<NoiseKind, UsageError> {
    NoiseKind::parse(text)
        .ok_or_else(|| UsageError(format!("unknown noise '{text}' (expected local or global)")))
}

pub fn parse_classes(text: &str) -> Result<Vec<DissociationClass>, UsageError> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let class = DissociationClass::parse(item)
            .ok_or_else(|| UsageError(format!("unknown class '{item}' (expected ea, b, c, d, dge)")))?;
        if !out.contains(&class) {
            out.push(class);
        }
    }
    if out.is_empty() {
        return Err(UsageError("no classes given".into()));
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: could not configure {t} threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match cli.command {
        Command::Thresholds { common, classes, cert_dir, no_dedup } => {
            commands::thresholds(common, &classes, cert_dir, no_dedup)
        }
        Command::Table { which, scope, skip_all_rows, resolution, seed, format, out, cert_dir } => {
            commands::table(&which, &scope, skip_all_rows, resolution, seed, &format, out, cert_dir)
        }
        Command::Scaling { classes, n_min, n_max, state, noise, resolution, seed, format, out } => {
            commands::scaling(&classes, n_min, n_max, &state, &noise, resolution, seed, &format, out)
        }
        Command::Npt { common, bipartition } => commands::npt(common, &bipartition),
        Command::Verify { path } => commands::verify(&path),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            if let Some(UsageError(msg)) = err.downcast_ref::<UsageError>() {
                eprintln!("usage error: {msg}");
                return ExitCode::from(EXIT_USAGE);
            }
            if let Some(solver_err) = err.downcast_ref::<entdis_core::solver::SolverError>() {
                use entdis_core::solver::SolverError;
                match solver_err {
                    SolverError::GaveUp => {
                        eprintln!("error: {solver_err}");
                        return ExitCode::from(EXIT_GAVE_UP);
                    }
                    SolverError::CertificateRejected(_) => {
                        eprintln!("error: {solver_err}");
                        return ExitCode::from(EXIT_VERIFICATION);
                    }
                    SolverError::OddQubitCount { .. } | SolverError::TooFewQubits { .. } => {
                        eprintln!("usage error: {solver_err}");
                        return ExitCode::from(EXIT_USAGE);
                    }
                    _ => {}
                }
            }
            if err.downcast_ref::<entdis_core::states::StateError>().is_some() {
                eprintln!("usage error: {err}");
                return ExitCode::from(EXIT_USAGE);
            }
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Debug for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}
