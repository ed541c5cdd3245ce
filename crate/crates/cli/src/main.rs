use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pauli_cli::{execute, ExperimentConfig, ExperimentKind, RunError};

#[derive(Parser, Debug)]
#[command(name = "pauli", version, about = "Resonance and eigenvalue-counting experiments for Pauli operators in a constant field")]
#[command(after_help = concat!(
    "Every CSV row starts with `config_hash`, the first 16 hex digits of the SHA-256 of the canonical config JSON.\n",
    "Exit codes: 0 all checks pass, 1 a check or computation failed, 2 usage or config error."
))]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV tables and the report.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Toeplitz eigenvalues of the radial profile in the lowest Landau level.
    #[command(after_help = "toeplitz.csv: l, lambda\n\
counting.csv (with s_grid): s, count\n\
power_law.csv (power-law profiles with s_grid): s, count, count_half, normalized, c_alpha, trusted")]
    Toeplitz,
    /// Axial constants c_q, K1 and K2.
    #[command(after_help = "constants.csv: q, c_q, k1, k2, k2_over_q")]
    Constants,
    /// Per-sector operator inequalities of the effective blocks.
    #[command(after_help = "inequalities.csv: l, toeplitz, w_h2inv, w_i, tail, lower_gap, upper_gap")]
    Inequalities,
    /// Characteristic values of the sector families in an annulus of the k-plane.
    #[command(after_help = "resonances.csv: l, re_k, im_k, multiplicity, in_annulus, sector_ok, predicted_im_k")]
    Resonances,
    /// Direct negative-eigenvalue counts against the effective bounds.
    #[command(after_help = "counts.csv: r, lower, direct, effective, upper, ratio, within\n\
sector_counts.csv: l, r, count")]
    Spectrum,
    /// The acceptance suite; writes report.txt and one CSV per criterion.
    #[command(after_help = "report.txt: one PASS/FAIL line per criterion\n\
cNN_*.csv: the raw numbers behind criterion NN")]
    Report,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Toeplitz => ExperimentKind::Toeplitz,
            Command::Constants => ExperimentKind::Constants,
            Command::Inequalities => ExperimentKind::Inequalities,
            Command::Resonances => ExperimentKind::Resonances,
            Command::Spectrum => ExperimentKind::Spectrum,
            Command::Report => ExperimentKind::Report,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("pauli: cannot start worker pool: {e}");
        return ExitCode::from(2);
    }
    let kind = cli.command.kind();
    let cfg = match cli.config.as_deref().map(ExperimentConfig::load).transpose() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("pauli: config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(k) = cfg.as_ref().and_then(|c| c.kind).filter(|&k| k != kind) {
        eprintln!("pauli: note: config declares kind `{}`, running `{}`", k.name(), kind.name());
    }
    let summary = match execute(kind, cfg.as_ref()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("pauli: {e}");
            return ExitCode::from(match e {
                RunError::Config(_) => 2,
                _ => 1,
            });
        }
    };
    if let Err(e) = summary.write(&cli.out) {
        eprintln!("pauli: cannot write {}: {e}", cli.out.display());
        return ExitCode::from(1);
    }
    for line in &summary.lines {
        println!("{line}");
    }
    println!("wrote {} files to {}", summary.files.len(), cli.out.display());
    if summary.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
