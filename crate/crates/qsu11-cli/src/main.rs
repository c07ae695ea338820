mod cli;
mod commands;
mod config;
mod report;

use std::io::Write;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use crate::cli::{Cli, Format};
use crate::config::{thread_limit, InvalidConfig, Settings};

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InvalidConfig>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Runs the command; `Ok(false)` when a check failed.
fn run() -> Result<bool> {
    let settings = Settings::resolve(Cli::parse())?;
    if let Some(n) = thread_limit()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let outcome = commands::run(&settings)?;
    match &settings.out {
        Some(path) => report::write_atomic(path, &outcome.body)?,
        None => std::io::stdout().write_all(outcome.body.as_bytes())?,
    }
    if settings.format != Format::Text || settings.out.is_some() {
        for check in &outcome.checks {
            eprintln!("{}", check.line());
        }
    }
    let failed: Vec<&str> = outcome
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if !failed.is_empty() {
        eprintln!("{} check(s) failed: {}", failed.len(), failed.join("; "));
    }
    Ok(failed.is_empty())
}
