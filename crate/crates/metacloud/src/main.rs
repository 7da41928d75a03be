use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metacloud::acceptance::{self, Options};
use metacloud::config::ExperimentConfig;
use metacloud::{experiment, generate, report, Error, Result};

/// Sample clouds of meta densities and check their limit shapes.
#[derive(Debug, Parser)]
#[command(name = "metacloud", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory; defaults to `output_dir` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a config with every default filled in.
    PrintConfig { config: Option<PathBuf> },
    /// Run the acceptance suite.
    Selftest {
        /// Reduced sample sizes.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value = "selftest")]
        out: PathBuf,
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        #[arg(long, default_value_t = acceptance::SEED)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("metacloud: {e}");
            ExitCode::from(1)
        }
    }
}

/// `Ok(false)` when a gate failed.
fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Cmd::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            let threads = generate::thread_count()?;
            let outcome = experiment::run(&cfg, &out, threads)?;
            for g in &outcome.gates {
                println!("{} {}: {}", if g.pass { "PASS" } else { "FAIL" }, g.name, g.detail);
            }
            println!("{} files in {}", outcome.files.len(), out.display());
            Ok(outcome.passed())
        }
        Cmd::PrintConfig { config } => {
            let cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig::default(),
            };
            print!("{}", cfg.to_toml());
            Ok(true)
        }
        Cmd::Selftest { quick, out, only, seed } => {
            let exe = std::env::current_exe().map_err(|e| Error::io("metacloud", e))?;
            let opts = Options {
                quick,
                only,
                seed,
                threads: generate::thread_count()?,
                exe: Some(exe),
                scratch: out.join("scratch"),
            };
            let results = acceptance::run_all(&opts);
            acceptance::write_outputs(&results, &out)?;
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| vec![r.id.to_string(), r.pass.to_string(), r.expected_red().to_string()])
                .collect();
            let table = report::table_csv(&["criterion", "pass", "expected_red"], &rows);
            report::write_file(&out.join("criteria.csv"), table.as_bytes())?;
            for r in &results {
                println!("{}", r.line());
            }
            Ok(results.iter().all(|r| r.pass || r.expected_red()))
        }
    }
}
