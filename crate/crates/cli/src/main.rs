use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mwlab_cli::{parse_config, run_command, CliError, Command, RunConfig, EXIT_PASS, EXIT_VERDICT};

#[derive(Debug, Parser)]
#[command(name = "mwlab", version, about = "Multiple-weight multiplier experiments")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON parameter document for the command.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run(args: Args) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| CliError::Io { path: args.config.display().to_string(), source })?;
    let params = parse_config(args.command, &text)?;
    let cfg = RunConfig { command: args.command, params, out: args.out, seed: args.seed, threads: args.threads };
    let outcome = run_command(&cfg)?;
    println!("{}: {}", args.command.name(), if outcome.pass { "pass" } else { "fail" });
    Ok(if outcome.pass { EXIT_PASS } else { EXIT_VERDICT })
}

fn main() -> ExitCode {
    let code = match run(Args::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
