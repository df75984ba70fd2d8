use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use gmt_rect::harness::{emit_report, lookup, registry, run_experiment, ExperimentConfig, Format};
use gmt_rect::Result;

#[derive(Parser)]
#[command(name = "gmt-rect", version, about = "Seeded rectifiability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiments and write their reports under <out>/<id>/.
    Run {
        /// Experiment ids, or `all`.
        #[arg(required = true)]
        ids: Vec<String>,
        /// TOML file overriding the shipped parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Run the experiments concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Print the registered experiments with the statements they test.
    List,
}

const FORMATS: [Format; 4] = [Format::Json, Format::Csv, Format::Tables, Format::Manifest];

fn run_one(id: &str, user: Option<&str>, seed: Option<u64>, out: &Path) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(id, user, seed)?;
    let dir = out.join(id);
    cfg.output_dir = Some(dir.clone());
    let report = run_experiment(&cfg)?;
    emit_report(&report, &FORMATS, &dir)?;
    let passed = report.passed();
    let good = report.verdicts.iter().filter(|v| v.pass).count();
    println!(
        "{} {id} ({good}/{} verdicts, {} ms)",
        if passed { "PASS" } else { "FAIL" },
        report.verdicts.len(),
        report.timestamp.runtime_ms
    );
    for v in report.verdicts.iter().filter(|v| !v.pass) {
        println!(
            "  failed {}: measured {} expected {}",
            v.assertion, v.measured, v.expected
        );
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for e in registry() {
                println!("{:<22} {}", e.id, e.anchor);
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            ids,
            config,
            out,
            seed,
            parallel,
        } => {
            let ids: Vec<String> = if ids.iter().any(|i| i == "all") {
                registry().iter().map(|e| e.id.to_string()).collect()
            } else {
                ids
            };
            for id in &ids {
                if let Err(e) = lookup(id) {
                    eprintln!("error: {e}; see `gmt-rect list`");
                    return ExitCode::from(2);
                }
            }
            let user = match config.as_deref().map(std::fs::read_to_string).transpose() {
                Ok(text) => text,
                Err(e) => {
                    eprintln!("error: cannot read config: {e}");
                    return ExitCode::from(2);
                }
            };
            let one = |id: &String| match run_one(id, user.as_deref(), seed, &out) {
                Ok(passed) => passed,
                Err(e) => {
                    eprintln!("ERROR {id}: {e}");
                    false
                }
            };
            let results: Vec<bool> = if parallel {
                ids.par_iter().map(one).collect()
            } else {
                ids.iter().map(one).collect()
            };
            if results.iter().all(|&p| p) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
