//! Library side of the `anatomy` command-line tool.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod svg;
pub mod validate;

use std::fs;

use anatomy_core::{ConfigOverrides, GateConfig};

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};
use crate::output::{sha256_hex, InputFile, OutputSet};
use crate::validate::{run_validation, DEFAULT_ORACLE_BINS, QUICK_ORACLE_BINS};

/// Figure defaults, then the config file, then command-line flags.
pub fn resolve_config(cli: &Cli) -> CliResult<(GateConfig, Vec<InputFile>)> {
    let mut overrides = ConfigOverrides::default();
    let mut inputs = Vec::new();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        overrides = ConfigOverrides::parse(&text)?;
        inputs.push(InputFile { path: path.display().to_string(), sha256: sha256_hex(text.as_bytes()) });
    }
    let cfg = overrides.merge(&cli.flag_overrides()).resolve()?;
    Ok((cfg, inputs))
}

pub fn run(cli: Cli) -> CliResult<()> {
    let (cfg, inputs) = resolve_config(&cli)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(jobs);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| execute(&cli, &cfg, inputs))
}

fn execute(cli: &Cli, cfg: &GateConfig, inputs: Vec<InputFile>) -> CliResult<()> {
    let mut out = OutputSet::create(&cli.out_dir, cli.command.name())?;
    let mut outcome = Ok(());
    match &cli.command {
        Command::Trajectory => commands::trajectory(cfg, &mut out)?,
        Command::Sweep { points, compare_truncation } => {
            commands::sweep(cfg, *points, *compare_truncation, &mut out)?;
        }
        Command::Wigner { outcome } => {
            commands::wigner(cfg, &outcome.outcomes(), &mut out)?;
        }
        Command::HusimiSlice { bin, outcome, route } => {
            let outcomes = outcome.outcomes();
            if outcomes.len() != 1 {
                return Err(CliError::Usage("husimi-slice takes --outcome g or e".into()));
            }
            commands::husimi_slice(cfg, outcomes[0], *bin, (*route).into(), &mut out)?;
        }
        Command::Validate { quick, oracle_bins } => {
            let bins = oracle_bins.unwrap_or(if *quick { QUICK_ORACLE_BINS } else { DEFAULT_ORACLE_BINS });
            let report = run_validation(cfg, bins);
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            out.write("validation.json", json.as_bytes())?;
            for c in &report.checks {
                println!(
                    "{} {:<44} max_error {:>11.3e}  tol {:.3e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.max_error,
                    c.tolerance
                );
            }
            if !report.passed {
                let names: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
                outcome = Err(CliError::ValidationFailed(names.join(", ")));
            }
        }
    }
    let arguments = std::env::args().skip(1).collect();
    out.finish(cfg, arguments, inputs)?;
    outcome
}
