//! `monephase <command> --config <path> [--out <dir>] [--set key=value]...`
//!
//! Exit status: 0 on success, 1 on invalid input or configuration, 2 when a
//! numerical step failed to converge (outputs are written but flagged).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use monephase::pipeline::{run_command, Command, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Transform,
    Breakpoints,
    FitPhase,
    Irf,
    Calibrate,
    Landau,
    Efficiency,
    Synth,
    Report,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Transform => Command::Transform,
            Cmd::Breakpoints => Command::Breakpoints,
            Cmd::FitPhase => Command::FitPhase,
            Cmd::Irf => Command::Irf,
            Cmd::Calibrate => Command::Calibrate,
            Cmd::Landau => Command::Landau,
            Cmd::Efficiency => Command::Efficiency,
            Cmd::Synth => Command::Synth,
            Cmd::Report => Command::Report,
        }
    }
}

/// Monetary phase-transition pipeline.
#[derive(Debug, Parser)]
#[command(name = "monephase", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// TOML configuration; defaults reproduce the baseline specification.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Canonical monetary CSV, overriding `data.monetary`.
    #[arg(long)]
    monetary: Option<PathBuf>,
    /// Canonical CPI CSV, overriding `data.cpi`.
    #[arg(long)]
    cpi: Option<PathBuf>,
    /// `key=value` override of any configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn load_config(args: &Args) -> monephase::error::Result<RunConfig> {
    let mut cfg = RunConfig::load(args.config.as_deref(), &args.overrides)?;
    if let Some(o) = &args.out {
        cfg.out_dir = o.clone();
    }
    if let Some(m) = &args.monetary {
        cfg.monetary = Some(m.clone());
    }
    if let Some(c) = &args.cpi {
        cfg.cpi = Some(c.clone());
    }
    Ok(cfg)
}

fn exit_code(e: &monephase::error::Error) -> u8 {
    if e.is_validation() {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let command = Command::from(args.command);

    let result = load_config(&args)
        .and_then(|cfg| run_command(command, &cfg))
        .map_err(|e| {
            let code = exit_code(&e);
            (anyhow::Error::new(e).context(format!("`{command}` failed")), code)
        });
    match result {
        Ok(outcome) => {
            for m in &outcome.messages {
                println!("{m}");
            }
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            if outcome.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("{command}: numerical step did not converge; outputs are flagged");
                ExitCode::from(2)
            }
        }
        Err((e, code)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
