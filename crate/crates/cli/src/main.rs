mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use error::{CliError, Result};
use output::Sink;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Spectrum,
    Weave,
    Shadow,
    Katok,
    Shrink,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Weave => "weave",
            Command::Shadow => "shadow",
            Command::Katok => "katok",
            Command::Shrink => "shrink",
        }
    }
}

/// Seeded shadowing, weaving and entropy experiments on symbolic and
/// interval systems.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    command: Command,
}

fn run(args: &Args) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Read { path: args.config.clone(), source })?;
    let cfg = config::parse(&text)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let mut sink = Sink::new(&args.out, &text, seed, args.command.name());
    let outcome = match args.command {
        Command::Spectrum => commands::spectrum::run(&cfg, &mut sink),
        Command::Weave => commands::weave::run(&cfg, seed, &mut sink),
        Command::Shadow => commands::shadow::run(&cfg, seed, &mut sink),
        Command::Katok => commands::katok::run(&cfg, &mut sink),
        Command::Shrink => commands::shrink::run(&cfg, seed, &mut sink),
    }?;
    let mut lines = outcome.summary;
    for path in sink.commit()? {
        lines.push(format!("wrote {}", path.display()));
    }
    match outcome.failure {
        Some(e) => {
            for l in &lines {
                println!("{l}");
            }
            Err(e)
        }
        None => Ok(lines),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
