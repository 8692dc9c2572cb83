use std::process::ExitCode;

use clap::Parser;

use qlsp::config::{ExperimentConfig, Params};
use qlsp::experiments;
use qlsp::Result;

/// Runs the QSVT linear-solver experiments and writes CSV results.
#[derive(Debug, Parser)]
#[command(name = "qlsp", version, allow_negative_numbers = true)]
struct Cli {
    /// `key=value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<std::path::PathBuf>,

    #[command(flatten)]
    params: Params,
}

fn run(cli: Cli) -> Result<()> {
    let params = match &cli.config {
        Some(path) => cli.params.over(Params::from_file(path)?),
        None => cli.params,
    };
    let cfg = ExperimentConfig::resolve(params)?;
    let out = experiments::run(&cfg)?;
    for (k, v) in &out.summary {
        println!("{k}: {v}");
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
