//! `readtask`: synthesize corpora, extract features, run evaluation
//! protocols, ablations and control analyses.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser};

use failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "readtask", about = "Reading-task classification from eye-tracking and EEG")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root; results go to <out>/<run-id>/.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Run directory name (default: the subcommand name).
    #[arg(long, global = true)]
    run_id: Option<String>,
    /// Corpus directory in the interchange format.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[command(subcommand)]
    command: commands::Command,
}

fn version() -> &'static str {
    let v = format!(
        "{} (report schema {}, corpus format {}, model format {})",
        env!("CARGO_PKG_VERSION"),
        readtask::evaluation::REPORT_SCHEMA_VERSION,
        readtask::corpus::CORPUS_FORMAT_VERSION,
        readtask::learners::MODEL_FORMAT_VERSION
    );
    Box::leak(v.into_boxed_str())
}

fn parse() -> Result<Cli, clap::Error> {
    let matches = Cli::command().version(version()).try_get_matches()?;
    Cli::from_arg_matches(&matches)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = config::load(cli.config.as_deref())?;
    if let Some(v) = cli.out {
        cfg.out = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.jobs {
        cfg.jobs = Some(v);
    }
    if let Some(v) = cli.run_id {
        cfg.run_id = Some(v);
    }
    if let Some(v) = cli.corpus {
        cfg.corpus = Some(v);
    }
    if let Some(n) = cfg.jobs {
        if n == 0 {
            return Err(Failure::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    commands::run(cli.command, cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let f = Failure::usage(e.render().to_string().trim_end());
            eprintln!("{}", f.record());
            return f.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.record());
            f.exit_code()
        }
    }
}
