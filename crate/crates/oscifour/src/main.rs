use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oscifour::{run, CliError, Command};

#[derive(Parser)]
#[command(
    name = "oscifour",
    version,
    about = "Taylor-Fourier solver for highly oscillatory ODEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute coefficients and write them with a metadata sidecar.
    Solve(Args),
    /// Evaluate coefficients (from `coefficients = <file>` or a fresh solve) at the configured times.
    Eval(Args),
    /// Compare against the reference integrator.
    Errors(Args),
    /// Averaged-flow diagnostics.
    Averaged(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel transforms.
    #[arg(long)]
    threads: Option<usize>,
    /// `key=value` overrides applied after the config file.
    overrides: Vec<String>,
}

fn set_threads(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::config("--threads must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("--threads: {e}")))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Eval(a) => (Command::Eval, a),
        Cmd::Errors(a) => (Command::Errors, a),
        Cmd::Averaged(a) => (Command::Averaged, a),
    };
    let result = args.threads.map_or(Ok(()), set_threads).and_then(|_| {
        run(
            command,
            &args.config,
            args.out.as_deref(),
            &args.overrides,
            &mut std::io::stdout(),
        )
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
