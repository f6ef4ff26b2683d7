use std::path::PathBuf;

use clap::{Parser, Subcommand};
use framekit_cli::commands::{self, CheckArgs, Streams, SuiteArgs, EXIT_INPUT};
use framekit_cli::config::Format;

/// Generate fusion frame instances and verify bound theorems on them.
#[derive(Parser)]
#[command(name = "framekit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write instance files for a suite config or a single generator spec.
    Gen {
        #[arg(long)]
        config: PathBuf,
        /// Replace the seeds of the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one instance file against a theorem and print the report.
    Check {
        file: PathBuf,
        /// One of thm3.1, lem3.2, thm3.4, lem4.1, thm4.4.1, thm4.4.2,
        /// thm4.4.3, prop4.5, thm4.6, thm4.7.
        theorem: String,
        /// Seed of the probe grid; defaults to the seed in the file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate and check a whole suite; the built-in suite without --config.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let (mut stdout, mut stderr) = (std::io::stdout().lock(), std::io::stderr().lock());
    let mut streams = Streams {
        out: &mut stdout,
        err: &mut stderr,
    };
    let code = match cli.command {
        Command::Gen { config, seed, out } => commands::cmd_gen(&config, seed, out.as_deref(), &mut streams),
        Command::Check {
            file,
            theorem,
            seed,
            tol,
            format,
            out,
        } => {
            let args = CheckArgs {
                seed,
                tol,
                format,
                out: out.as_deref(),
            };
            commands::cmd_check(&file, &theorem, &args, &mut streams)
        }
        Command::Suite {
            config,
            seed,
            tol,
            format,
            out,
        } => {
            let args = SuiteArgs {
                config: config.as_deref(),
                seed,
                tol,
                format,
                out: out.as_deref(),
            };
            commands::cmd_suite(&args, &mut streams)
        }
    };
    drop(streams);
    std::process::exit(code);
}
