use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use whlab_cli::{builtins, config, prepare, run, CliError};

#[derive(Parser)]
#[command(name = "whlab", version, about = "Symbols and spectra of Wiener-Hopf operators on weighted half-line spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment in a config file and write the report.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print weight, kernel, Orlicz and experiment names with parameters.
    ListBuiltins,
    /// Check a config file against the schema.
    Validate { config: PathBuf },
    /// Print the JSON Schema of config files.
    Schema,
}

fn report_error(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListBuiltins => {
            print!("{}", builtins::builtins_text());
            ExitCode::SUCCESS
        }
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&config::config_schema()).expect("schema serialises"));
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match prepare(&config, None) {
            Ok(c) => {
                println!("ok: {} experiment", c.experiment.kind());
                ExitCode::SUCCESS
            }
            Err(e) => report_error(&e),
        },
        Command::Run { config, out, seed } => match run(&config, out.as_deref(), seed) {
            Ok(summary) => {
                for v in &summary.outcome.verdicts {
                    println!("{} {} measured={:e} threshold={:e}", if v.pass { "PASS" } else { "FAIL" }, v.invariant, v.measured, v.threshold);
                }
                for n in &summary.outcome.notes {
                    println!("note: {n}");
                }
                println!("report: {}", summary.out_dir.join("report.json").display());
                if summary.pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => report_error(&e),
        },
    }
}
