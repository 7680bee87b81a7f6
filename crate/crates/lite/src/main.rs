use std::fs::{self, File};
use std::io::BufWriter;
use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use lite::harness::{self, Algorithm, Plan, DEFAULT_BUDGETS};
use lite::service::{self, AppState};
use lite::{report, results};
use lite_core::Config;

#[derive(Parser)]
#[command(name = "lite", version, about = "Label-frugal multi-objective optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded repeats of each algorithm over each dataset.
    Run {
        /// A .csv file or a directory of them. Repeatable.
        #[arg(long, required = true)]
        data: Vec<PathBuf>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "lite-certain,lite-uncertain,sway,random,baseline"
        )]
        algo: Vec<Algorithm>,
        #[arg(long, value_delimiter = ',')]
        budget: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Exponent of the sway stopping size, `2 * N^stop`.
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank the treatments in a results directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also print where each algorithm's best treatment ranked across datasets.
        #[arg(long)]
        table6: bool,
    },
    /// Serve the labeling API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        data: PathBuf,
        /// Where session journals live. Defaults to `<data>/.sessions`.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run {
            data,
            algo,
            budget,
            repeats,
            seed,
            stop,
            out,
        } => {
            let mut config = Config::default();
            if let Some(stop) = stop {
                config.stop = stop;
            }
            let plan = Plan {
                algorithms: algo,
                budgets: if budget.is_empty() {
                    DEFAULT_BUDGETS.to_vec()
                } else {
                    budget
                },
                repeats,
                seed,
                config,
            };
            plan.validate()?;
            let paths = harness::expand_paths(&data)?;
            let (datasets, failed) = harness::load_datasets(&paths);
            for (path, e) in &failed {
                log::error!("skipping {}: {e}", path.display());
            }
            if datasets.is_empty() {
                bail!("no dataset could be loaded");
            }
            let runs = harness::run_plan(&plan, &datasets)?;
            fs::create_dir_all(&out)?;
            let records: Vec<_> = runs.iter().map(|r| r.record.clone()).collect();
            results::write_records(BufWriter::new(File::create(out.join("results.csv"))?), &records)?;
            results::write_timings(BufWriter::new(File::create(out.join("timings.csv"))?), &runs)?;
            let failed_runs = records.iter().filter(|r| r.status != harness::Status::Ok).count();
            log::info!(
                "{} records ({} failed) written to {}",
                records.len(),
                failed_runs,
                out.display()
            );
            if !failed.is_empty() {
                bail!("{} dataset(s) failed to load", failed.len());
            }
        }
        Command::Report { input, table6 } => {
            let path = if input.is_dir() {
                input.join("results.csv")
            } else {
                input
            };
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let records = results::read_records(file)?;
            let reports = report::rank_records(&records);
            for r in &reports {
                println!("{}", report::render_by_rank(r));
                println!("{}", report::render_by_labels(r));
            }
            if table6 {
                println!("{}", report::render_summary(&report::summarize_best(&reports)));
            }
        }
        Command::Serve {
            port,
            data,
            state,
            host,
        } => {
            let state_dir = state.unwrap_or_else(|| data.join(".sessions"));
            let app = AppState::open(&data, &state_dir)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(service::serve(SocketAddr::new(host, port), app))?;
        }
    }
    Ok(())
}
