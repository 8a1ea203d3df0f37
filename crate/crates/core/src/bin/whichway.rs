use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use whichway::scenario::{self, DiagnosticKind, Override, OutputFormat, RunOptions, ScenarioError};

#[derive(Parser)]
#[command(name = "whichway", version, about = "Run which-way interferometer and collapse scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and emit its result table.
    Run {
        file: PathBuf,
        /// Override a scenario key, e.g. `--set ww.gamma=0.5`. Applied in order.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_parser = ["csv", "json"])]
        format: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report problems in a scenario file without running it.
    Validate { file: PathBuf },
}

fn run(cli: Cli) -> Result<(), ScenarioError> {
    match cli.command {
        Command::Run {
            file,
            set,
            output,
            format,
            seed,
        } => {
            let options = RunOptions {
                overrides: set.iter().map(|s| s.parse()).collect::<Result<Vec<Override>, _>>()?,
                output,
                format: format.as_deref().map(str::parse::<OutputFormat>).transpose()?,
                seed,
            };
            let (table, dest, format) = scenario::run_file(&file, &options)?;
            match dest {
                Some(path) => eprintln!("wrote {} rows to {}", table.rows.len(), path.display()),
                None => {
                    std::io::stdout()
                        .write_all(table.render(format).as_bytes())
                        .map_err(|e| ScenarioError::Io(e.to_string()))?;
                }
            }
            Ok(())
        }
        Command::Validate { file } => {
            let diagnostics = scenario::validate_file(&file)?;
            if diagnostics.is_empty() {
                println!("{}: ok", file.display());
                return Ok(());
            }
            for d in &diagnostics {
                println!("{d}");
            }
            let summary = format!("{} problem(s) found", diagnostics.len());
            if diagnostics.iter().any(|d| d.kind == DiagnosticKind::Structure) {
                Err(ScenarioError::Parse(summary))
            } else {
                Err(ScenarioError::Domain(summary))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("whichway: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
