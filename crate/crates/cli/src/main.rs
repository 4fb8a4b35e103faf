use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use basketsvm::datagen::{generate, write_stream};
use basketsvm::experiment::{parse_plan, read_results, run_plan, table1_report};
use basketsvm::{Dataset, DriftSpec};

/// Budgeted online SVM experiments on drifting, imbalanced streams.
#[derive(Parser, Debug)]
#[command(name = "basketsvm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every cell of an experiment plan and write CSV results.
    Run {
        plan: PathBuf,
        /// Output directory (overrides `out` in the plan).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (overrides `workers` in the plan).
        #[arg(long)]
        workers: Option<usize>,
        /// Replace the plan's seed list with this single seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Generate a synthetic stream in the canonical CSV serialization.
    Gen {
        /// Parallel, LinearShift, Opposite, Cross, Parabola or SEA3D.
        dataset: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n_total: Option<usize>,
        #[arg(long)]
        noise_sigma: Option<f64>,
        #[arg(long)]
        class_ratio: Option<f64>,
        /// Total displacement of the class means (2-D datasets).
        #[arg(long)]
        drift: Option<f64>,
    },
    /// Print the best strategy cell per dataset next to the baselines.
    Report { results: PathBuf },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run {
            plan,
            out,
            workers,
            seed_override,
        } => {
            let mut plan = parse_plan(&plan).with_context(|| format!("reading plan {}", plan.display()))?;
            if let Some(out) = out {
                plan.out_dir = out;
            }
            if let Some(w) = workers {
                if w == 0 {
                    bail!("--workers must be at least 1");
                }
                plan.workers = w;
            }
            if let Some(s) = seed_override {
                plan.seeds = vec![s];
            }
            eprintln!(
                "{} runs ({} sources x {} seeds x {} cells + {} baselines)",
                plan.total_runs(),
                plan.source_count(),
                plan.seeds.len(),
                plan.cells().len(),
                plan.baselines.len()
            );
            let dir = run_plan(&plan)?;
            println!("{}", dir.join("results.csv").display());
        }
        Command::Gen {
            dataset,
            seed,
            out,
            n_total,
            noise_sigma,
            class_ratio,
            drift,
        } => {
            let dataset: Dataset = dataset.parse()?;
            let mut spec = DriftSpec::new(dataset, seed);
            if let Some(n) = n_total {
                spec.n_total = n;
                spec.n_train = spec.n_train.min(n.saturating_sub(1)).max(1);
            }
            if let Some(s) = noise_sigma {
                spec.noise_sigma = s;
            }
            if let Some(r) = class_ratio {
                spec.class_ratio = r;
            }
            if let Some(d) = drift {
                spec.drift = d;
            }
            let stream = generate(&spec)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut w = BufWriter::new(file);
            write_stream(&mut w, &stream)?;
            w.flush()?;
        }
        Command::Report { results } => {
            let rows = read_results(&results).with_context(|| format!("reading {}", results.display()))?;
            print!("{}", table1_report(&rows)?);
        }
    }
    Ok(())
}
