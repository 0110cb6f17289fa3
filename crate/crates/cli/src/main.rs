use std::path::PathBuf;
use std::process::ExitCode;

use cbs_cli::config::{Format, Method, RunConfig};
use cbs_cli::validate::{self, Suite};
use cbs_cli::{output, run, CliError};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "cbs", version, about = "Coherent backscattering spectra of two laser-driven atoms")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute L_inel, C_inel on a frequency grid plus elastic weights.
    Spectrum(SpectrumArgs),
    /// Run a validation suite; exit 0 iff every check passes.
    Validate {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Overrides the suite's default bound.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Compute one output set per (rabi, detuning) point and a summary.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Lower end of the ν grid (units of γ); default −max(15, Ω+6).
    #[arg(long, allow_hyphen_values = true)]
    nu_min: Option<f64>,
    /// Upper end of the ν grid; default max(15, Ω+6).
    #[arg(long, allow_hyphen_values = true)]
    nu_max: Option<f64>,
    #[arg(long)]
    nu_points: Option<usize>,
    #[arg(long, value_enum, default_value = "analytic")]
    method: Method,
    /// Oracle: lower edge of the separation window (units of 1/k).
    #[arg(long, default_value_t = 200.0)]
    x0: f64,
    /// Oracle: window length in periods 2π/k.
    #[arg(long, default_value_t = 8)]
    m: usize,
    /// Oracle: number of configurations N.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Rabi frequency Ω (units of γ).
    #[arg(long)]
    rabi: f64,
    /// Laser detuning δ (units of γ).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    detuning: f64,
    /// Output path prefix; extensions are appended.
    #[arg(long, default_value = "spectrum")]
    output: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated Rabi frequencies.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    rabi: Vec<f64>,
    /// Comma-separated detunings; write negative lists as --detuning=-1,0.
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "0")]
    detuning: Vec<f64>,
    /// Output directory.
    #[arg(long, default_value = "sweep")]
    output: PathBuf,
    #[command(flatten)]
    common: Common,
}

fn config(rabi: f64, detuning: f64, output: PathBuf, c: &Common) -> RunConfig {
    let (lo, hi, n) = RunConfig::default_range(rabi);
    RunConfig {
        rabi,
        detuning,
        nu_min: c.nu_min.unwrap_or(lo),
        nu_max: c.nu_max.unwrap_or(hi),
        nu_points: c.nu_points.unwrap_or(n),
        method: c.method,
        x0: c.x0,
        m: c.m,
        samples: c.samples,
        seed: c.seed,
        output,
        format: c.format,
    }
}

fn spectrum(a: SpectrumArgs) -> Result<(), CliError> {
    let cfg = config(a.rabi, a.detuning, a.output, &a.common);
    let s = run::run(&cfg)?;
    for p in output::write_spectrum(&cfg, &s)? {
        println!("wrote {}", p.display());
    }
    println!("enhancement = {}", s.enhancement);
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    if a.rabi.is_empty() || a.detuning.is_empty() {
        return Err(CliError::Usage("sweep needs at least one rabi and one detuning value".into()));
    }
    let mut cfgs = Vec::new();
    for &r in &a.rabi {
        for &d in &a.detuning {
            cfgs.push(config(r, d, a.output.join(format!("rabi_{r}_detuning_{d}")), &a.common));
        }
    }
    for c in &cfgs {
        c.validate()?;
    }
    let results: Vec<_> = cfgs.par_iter().map(run::run).collect::<Result<_, _>>()?;
    let rows: Vec<_> = cfgs.into_iter().zip(results).collect();
    for (cfg, s) in &rows {
        output::write_spectrum(cfg, s)?;
    }
    let summary = output::write_summary(&a.output, &rows)?;
    println!("{:>10} {:>10} {:>14}", "rabi", "detuning", "enhancement");
    for (cfg, s) in &rows {
        println!("{:>10} {:>10} {:>14.6}", cfg.rabi, cfg.detuning, s.enhancement);
    }
    println!("wrote {}", summary.display());
    Ok(())
}

fn validate_cmd(suite: Suite, tolerance: Option<f64>) -> Result<bool, CliError> {
    let tol = tolerance.unwrap_or(suite.default_tolerance());
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Usage(format!("tolerance must be positive, got {tol}")));
    }
    let checks = validate::run(suite, tol)?;
    for c in &checks {
        println!("{} {}: {:.3e} (bound {:.1e})", if c.pass() { "PASS" } else { "FAIL" }, c.name, c.value, c.bound);
    }
    match checks.iter().find(|c| !c.pass()) {
        Some(c) => {
            println!("first failing check: {}", c.name);
            Ok(false)
        }
        None => {
            println!("all {} checks passed", checks.len());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Spectrum(a) => spectrum(a).map(|_| true),
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Validate { suite, tolerance } => validate_cmd(suite, tolerance),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
