use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kobayashi::runner::{self, ExperimentConfig, RunError, RunOptions};

#[derive(Parser)]
#[command(name = "kobayashi", version, about = "Kobayashi metric experiments on bounded domains in C^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its report, tables and manifest.
    Run {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        /// Worker threads; the KOBAYASHI_THREADS environment variable takes precedence.
        #[arg(long, value_name = "N")]
        threads: Option<usize>,
    },
    /// Print the built-in domains, maps and quasi-geodesics as JSON.
    Corpus,
    /// Check a config file against the schema without running it.
    ValidateConfig {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
}

fn report_error(err: &RunError, out: Option<&PathBuf>) -> ExitCode {
    let json = err.to_json();
    let text = serde_json::to_string_pretty(&json).unwrap_or_else(|_| err.to_string());
    if let Some(dir) = out {
        let _ = runner::write_atomic(dir, "error.json", format!("{text}\n").as_bytes());
    }
    eprintln!("{text}");
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seed, threads } => {
            let cfg = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => return report_error(&e, out.as_ref()),
            };
            let out = out.or_else(|| cfg.out_dir.clone());
            let opts = RunOptions::from_env(out.clone(), seed, threads);
            match runner::run(&cfg, &opts) {
                Ok(m) => {
                    let summary = serde_json::json!({
                        "experiment": m.experiment,
                        "seed": m.seed,
                        "threads": m.threads,
                        "wall_clock_seconds": m.wall_clock_seconds,
                        "files": m.files.iter().map(|f| &f.path).collect::<Vec<_>>(),
                    });
                    println!("{}", serde_json::to_string_pretty(&summary).expect("summary"));
                    ExitCode::SUCCESS
                }
                Err(e) => report_error(&e, out.as_ref()),
            }
        }
        Command::Corpus => {
            println!("{}", serde_json::to_string_pretty(&kobayashi::corpus::listing()).expect("corpus"));
            ExitCode::SUCCESS
        }
        Command::ValidateConfig { config } => match ExperimentConfig::from_path(&config) {
            Ok(c) => {
                println!(
                    "{}",
                    serde_json::json!({ "ok": true, "experiment": c.experiment.name(), "schema_version": c.schema_version })
                );
                ExitCode::SUCCESS
            }
            Err(e) => report_error(&e, None),
        },
    }
}
