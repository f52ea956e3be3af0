use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod report;

use args::{Cli, Command};

/// Errors that end a run with exit status 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Library(String),
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Library(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Library(m) => write!(f, "error: {m}"),
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SYMDYN_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SYMDYN_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    let (report, output) = match &cli.command {
        Command::GraphBall(a) => (commands::graph_ball(a)?, &a.output),
        Command::GraphDim(a) => (commands::graph_dim(a)?, &a.output),
        Command::GraphSpeed(a) => (commands::graph_speed(a)?, &a.output),
        Command::SysPropagation(a) => (commands::sys_propagation(a)?, &a.output),
        Command::SysPanorama(a) => (commands::sys_panorama(a)?, &a.output),
        Command::SysEquicontinuity(a) => (commands::sys_equicontinuity(a)?, &a.output),
        Command::SysOdometerChain(a) => (commands::sys_odometer_chain(a)?, &a.output),
        Command::EntropyBall(a) => (commands::entropy_ball(a)?, &a.output),
        Command::EntropyTau(a) => (commands::entropy_tau(a)?, &a.output),
        Command::CexRoundtrip(a) => (commands::cex_roundtrip_cmd(a)?, &a.output),
        Command::CexPropagation(a) => (commands::cex_propagation(a)?, &a.output),
        Command::MetricDim(a) => (commands::metric_dim(a)?, &a.output),
        Command::MetricLipschitz(a) => (commands::metric_lipschitz(a)?, &a.output),
        Command::HolderCheck(a) => (commands::holder_check(a)?, &a.output),
    };
    let text = report.render(output.format);
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
