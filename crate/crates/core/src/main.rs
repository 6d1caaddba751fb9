use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qdcavity::experiments::config::KEYS;
use qdcavity::experiments::studies::with_workers;
use qdcavity::experiments::validate::invariant_suite;
use qdcavity::experiments::{
    overhauser_study, parse_config, run_spectrum, sweep_dephasing, sweep_detuning, sweep_injection, Config,
    ExperimentError, StudyReport,
};

fn config_help() -> String {
    let mut s = String::from("Config keys (key = value, `#` starts a comment):\n");
    for (k, unit) in KEYS {
        s.push_str(&format!("  {k:<24} {unit}\n"));
    }
    s.push_str("\nExit codes: 0 success, 1 configuration error, 2 solver failure.");
    s
}

#[derive(Parser)]
#[command(name = "qdcavity", version, about = "Quantum-dot exciton complexes in a nanocavity: steady states and emission spectra")]
#[command(after_long_help = config_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration; measured defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweep points and frequency grids (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for Monte Carlo sampling and random invariant checks; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Steady state and spectra at one parameter point.
    Spectrum,
    /// Spectra against cavity detuning, with and without pure dephasing.
    SweepDetuning,
    /// Bare-cavity intensity and F-factor prediction against pure dephasing.
    SweepDephasing,
    /// Spectra around BX_y against injection rate, without dephasing.
    SweepInjection,
    /// Dark-exciton activation by the Overhauser field.
    Overhauser,
    /// Run the invariant suite.
    Validate,
}

fn load(path: Option<&Path>) -> Result<Config, ExperimentError> {
    Ok(match path {
        Some(p) => parse_config(p)?,
        None => Config::default(),
    })
}

fn run(cli: &Cli) -> Result<Option<StudyReport>, ExperimentError> {
    let mut cfg = load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.overhauser.seed = seed;
    }
    let out = cli.out.as_path();
    let report = match cli.command {
        Command::Spectrum => run_spectrum(&cfg, out)?,
        Command::SweepDetuning => sweep_detuning(&cfg, out)?,
        Command::SweepDephasing => sweep_dephasing(&cfg, out)?,
        Command::SweepInjection => sweep_injection(&cfg, out)?,
        Command::Overhauser => overhauser_study(&cfg, out)?,
        Command::Validate => return Ok(None),
    };
    Ok(Some(report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    faer::set_global_parallelism(faer::Par::Seq);
    if let Command::Validate = cli.command {
        let checks = with_workers(cli.workers, || invariant_suite(cli.seed.unwrap_or(0)));
        let mut ok = true;
        for c in &checks {
            println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            ok &= c.passed;
        }
        return if ok { ExitCode::SUCCESS } else { ExitCode::from(2) };
    }
    match with_workers(cli.workers, || run(&cli)) {
        Ok(Some(report)) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            for (v, msg) in &report.failures {
                eprintln!("point {v} failed: {msg}");
            }
            if report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
