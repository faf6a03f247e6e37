use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qnmlab_cli::config::{self, SEED_ENV};
use qnmlab_cli::error::EXIT_CHECK_FAILED;
use qnmlab_cli::{experiments, runner, verdict, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "qnmlab", version, about = "Run non-malleability and authentication experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments in a JSON config file
    Run {
        config: PathBuf,
        /// Write JSON-lines verdicts here instead of the config's `output` (or stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Run up to N experiments concurrently
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Record wall-clock runtime in each verdict (output is then not reproducible)
        #[arg(long)]
        timings: bool,
        /// Suppress the summary table
        #[arg(short, long)]
        quiet: bool,
    },
    /// List built-in experiments
    List,
    /// Show what an experiment checks and which config keys it accepts
    Describe { experiment: String },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::List => {
            for e in experiments::EXPERIMENTS {
                println!("{:<24} {}", e.name, e.claim);
            }
            Ok(0)
        }
        Command::Describe { experiment } => {
            let e = experiments::find(&experiment)?;
            println!("{}\n\n{}\n", e.name, e.claim);
            println!("default scheme: {}", e.default_scheme);
            println!("scheme override: {:?}", e.scheme);
            println!("attack set configurable: {}", e.attacks);
            println!("state battery configurable: {}", e.states);
            println!("checks: {}", e.checks.join(", "));
            Ok(0)
        }
        Command::Run { config: path, output, parallel, timings, quiet } => {
            let mut plan = config::load_plan(&path)?;
            let env = std::env::var(SEED_ENV).ok();
            config::resolve_seeds(&mut plan, env.as_deref())?;
            let records = runner::run_plan(&plan, RunOptions { parallel, timings })?;
            let lines = runner::json_lines(&records);
            let summary = verdict::summary_table(&records);
            match output.or(plan.output.clone()) {
                Some(p) => {
                    std::fs::write(&p, lines)?;
                    if !quiet {
                        print!("{summary}");
                    }
                }
                None => {
                    std::io::stdout().write_all(lines.as_bytes())?;
                    if !quiet {
                        eprint!("{summary}");
                    }
                }
            }
            Ok(if records.iter().all(|r| r.pass) { 0 } else { EXIT_CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qnmlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
