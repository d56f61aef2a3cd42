use std::path::PathBuf;
use std::process::ExitCode;

use aggan_cli::config::{parse_config, Kind, Seeds};
use aggan_cli::run::{load_dataset, run, scatter, Outcome, RunError, RunOptions};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aggan", version, about = "Annealed evolutionary GAN training, theory simulation and imbalance benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// A seed count (`5` means 0..5) or a comma-separated list.
    #[arg(long)]
    seeds: Option<String>,
    /// Replace an existing run directory.
    #[arg(long)]
    overwrite: bool,
    /// Seeds or sweep cells run concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    Train(RunArgs),
    Bench(RunArgs),
    Theory(RunArgs),
    Sweep(RunArgs),
    /// Tag 2-D sample files with their nearest mode.
    Scatter {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        samples: Vec<PathBuf>,
    },
    /// Parse and validate a config, printing it with defaults filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn execute(kind: Kind, args: RunArgs) -> ExitCode {
    let mut cfg = match parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if cfg.kind != kind {
        return fail(
            EXIT_CONFIG,
            format!("config kind is {} but the {} subcommand was used", cfg.kind.as_str(), kind.as_str()),
        );
    }
    if let Some(s) = &args.seeds {
        cfg = match Seeds::parse_flag(s).and_then(|s| cfg.with_seeds(s)) {
            Ok(c) => c,
            Err(e) => return fail(EXIT_CONFIG, e),
        };
    }
    let Some(out) = args.out.or_else(|| cfg.output.clone()) else {
        return fail(EXIT_CONFIG, "no output directory: pass --out or set `output` in the config");
    };
    let opts = RunOptions { out, overwrite: args.overwrite, jobs: args.jobs };
    match run(&cfg, &opts) {
        Ok(report) => {
            for s in report.seeds.iter().filter(|s| s.error.is_some()) {
                eprintln!("seed {} failed: {}", s.seed, s.error.as_deref().unwrap_or_default());
            }
            println!("{} run {} in {}", kind.as_str(), report.outcome.as_str(), report.dir.display());
            match report.outcome {
                Outcome::Complete => ExitCode::SUCCESS,
                Outcome::Partial => ExitCode::from(EXIT_PARTIAL),
                Outcome::Failed => ExitCode::from(EXIT_RUNTIME),
            }
        }
        Err(RunError::Config(e)) => fail(EXIT_CONFIG, e),
        Err(RunError::Runtime(e)) => fail(EXIT_RUNTIME, e),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Train(a) => execute(Kind::Train, a),
        Command::Bench(a) => execute(Kind::Bench, a),
        Command::Theory(a) => execute(Kind::Theory, a),
        Command::Sweep(a) => execute(Kind::Sweep, a),
        Command::Validate { config } => match parse_config(&config) {
            Ok(cfg) => {
                print!("{}", aggan_cli::config::to_toml(&cfg));
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_CONFIG, e),
        },
        Command::Scatter { config, out, samples } => {
            let cfg = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let mixture = match load_dataset(&cfg.dataset) {
                Ok(l) => l.mixture,
                Err(e) => return fail(EXIT_RUNTIME, e),
            };
            let Some(mixture) = mixture else {
                return fail(EXIT_CONFIG, "scatter needs a mixture dataset (ring, grid or rings2)");
            };
            match scatter(&mixture, &samples, &out) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(RunError::Config(e)) => fail(EXIT_CONFIG, e),
                Err(RunError::Runtime(e)) => fail(EXIT_RUNTIME, e),
            }
        }
    }
}
