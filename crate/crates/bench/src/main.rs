use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use ripm_bench::{emit_table, read_results, run, write_results, write_traces, RunConfig};

#[derive(Parser)]
#[command(name = "ripm-bench", version, about = "Run and summarize solver benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver of a JSON config and write reports, table and traces.
    Run {
        config: PathBuf,
        /// Overrides `budget` from the config.
        #[arg(long)]
        budget: Option<usize>,
        /// Overrides `output_dir` from the config (the environment variable still wins).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Overrides the problem seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the statistics table of a results directory.
    Table { results_dir: PathBuf },
    /// (Re)write the trace CSVs of a results directory and list them.
    Trace { results_dir: PathBuf },
}

fn load(config: &PathBuf, budget: Option<usize>, output_dir: Option<PathBuf>, seed: Option<u64>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(config)?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    if let Some(b) = budget {
        value["budget"] = b.into();
    }
    if let Some(d) = output_dir {
        value["output_dir"] = d.to_string_lossy().into_owned().into();
    }
    if let Some(s) = seed {
        value["problem"]["seed"] = s.into();
    }
    RunConfig::from_json(&value.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, budget, output_dir, seed } => {
            let cfg = match load(&config, budget, output_dir, seed) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(1);
                }
            };
            let dir = cfg.resolved_output_dir();
            let res = match run(&cfg).and_then(|res| write_results(&res, &dir).map(|_| res)) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(1);
                }
            };
            print!("{}", emit_table(&res));
            for r in &res.reports {
                if let Some(m) = &r.message {
                    eprintln!("{}: {:?}: {m}", r.solver, r.termination);
                }
            }
            if res.any_hard_failure() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Table { results_dir } => match read_results(&results_dir) {
            Ok(res) => {
                print!("{}", emit_table(&res));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Command::Trace { results_dir } => match read_results(&results_dir).and_then(|res| write_traces(&res, &results_dir)) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}
