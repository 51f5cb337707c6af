mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::config::ConfigError;
use crate::run::Command;

/// Detection probabilities of guided photons: tables and plots from a TOML run file.
#[derive(Debug, Parser)]
#[command(name = "wgphot", version)]
struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    command: Command,
    /// Run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the configuration.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to one per core).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let resolved = config::load(&cli.config).and_then(|loaded| {
        let cfg = loaded.resolve(cli.out.as_deref())?;
        Ok((loaded, cfg))
    });
    let (loaded, cfg) = match resolved {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run::execute(cli.command, &loaded, cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
