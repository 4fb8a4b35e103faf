use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use super::plan::{Baseline, ExperimentPlan};
use super::report::{summarize, write_summary};
use crate::datagen::{generate, read_stream, split_train_test, LabeledStream};
use crate::error::{invalid_input, Result};
use crate::eval::{run_prequential, EvalRecord, Learner, RunConfig, TrajectoryPoint};
use crate::pipeline::{grid_search_c, GridSearchSpec, Normalizer};
use crate::sample::Sample;
use crate::strategy::bool_code;

/// Column order of `results.csv`.
pub const RESULT_COLUMNS: [&str; 16] = [
    "run_id",
    "dataset",
    "seed",
    "include",
    "exclude",
    "balance",
    "ksv",
    "relabel",
    "capacity",
    "C",
    "final_ba",
    "update_count",
    "retrain_count",
    "wall_time_s",
    "flags",
    "error",
];

/// One line of `results.csv`. Strategy columns hold the canonical
/// identifiers for basket runs; baselines put `STATIC` or `PA` in `include`
/// and leave the other strategy columns empty.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub run_id: String,
    pub dataset: String,
    pub seed: u64,
    pub include: String,
    pub exclude: String,
    pub balance: String,
    pub ksv: String,
    pub relabel: String,
    pub capacity: String,
    pub c: Option<f64>,
    pub final_ba: Option<f64>,
    pub update_count: Option<u64>,
    pub retrain_count: Option<u64>,
    pub wall_time_s: Option<f64>,
    pub flags: String,
    pub error: String,
}

impl ResultRow {
    pub fn is_baseline(&self) -> bool {
        self.include == "STATIC" || self.include == "PA"
    }

    pub(crate) fn to_record(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            self.run_id.clone(),
            self.dataset.clone(),
            self.seed.to_string(),
            self.include.clone(),
            self.exclude.clone(),
            self.balance.clone(),
            self.ksv.clone(),
            self.relabel.clone(),
            self.capacity.clone(),
            opt(self.c.map(|v| v.to_string())),
            opt(self.final_ba.map(|v| v.to_string())),
            opt(self.update_count.map(|v| v.to_string())),
            opt(self.retrain_count.map(|v| v.to_string())),
            opt(self.wall_time_s.map(|v| format!("{v:.6}"))),
            self.flags.clone(),
            self.error.clone(),
        ]
    }

    pub(crate) fn from_record(rec: &csv::StringRecord) -> Result<Self> {
        if rec.len() != RESULT_COLUMNS.len() {
            return Err(invalid_input(format!(
                "results row has {} columns, expected {}",
                rec.len(),
                RESULT_COLUMNS.len()
            )));
        }
        fn opt<T: std::str::FromStr>(s: &str, col: &str) -> Result<Option<T>> {
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| invalid_input(format!("bad value `{s}` in column {col}")))
        }
        Ok(Self {
            run_id: rec[0].to_string(),
            dataset: rec[1].to_string(),
            seed: rec[2]
                .parse()
                .map_err(|_| invalid_input(format!("bad seed `{}`", &rec[2])))?,
            include: rec[3].to_string(),
            exclude: rec[4].to_string(),
            balance: rec[5].to_string(),
            ksv: rec[6].to_string(),
            relabel: rec[7].to_string(),
            capacity: rec[8].to_string(),
            c: opt(&rec[9], "C")?,
            final_ba: opt(&rec[10], "final_ba")?,
            update_count: opt(&rec[11], "update_count")?,
            retrain_count: opt(&rec[12], "retrain_count")?,
            wall_time_s: opt(&rec[13], "wall_time_s")?,
            flags: rec[14].to_string(),
            error: rec[15].to_string(),
        })
    }
}

struct Source {
    name: String,
    seed: u64,
    /// Train/test split, or the reason it could not be produced.
    data: std::result::Result<(Vec<Sample>, Vec<Sample>), String>,
}

struct Prepared<'a> {
    source: &'a Source,
    c: std::result::Result<f64, String>,
}

struct Job<'a> {
    run_id: String,
    prepared: &'a Prepared<'a>,
    learner: Learner,
}

/// Executes every run of the plan and writes `results.csv`, `summary.csv`
/// and `trajectories.csv` into the plan's output directory, which is
/// returned.
///
/// `C` is chosen once per (source, seed) on the normalized training part
/// and shared by all strategy cells and baselines. Runs execute on a pool of
/// `plan.workers` threads; output order is the grid order.
pub fn run_plan(plan: &ExperimentPlan) -> Result<PathBuf> {
    let cells = plan.cells();
    info!(
        "plan: {} sources x {} seeds x ({} cells + {} baselines) = {} runs",
        plan.source_count(),
        plan.seeds.len(),
        cells.len(),
        plan.baselines.len(),
        plan.total_runs()
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers.max(1))
        .build()
        .map_err(|e| invalid_input(format!("cannot build worker pool: {e}")))?;

    let external: Vec<(String, std::result::Result<LabeledStream, String>)> = plan
        .streams
        .iter()
        .map(|p| (stream_name(p), load_stream(p).map_err(|e| e.to_string())))
        .collect();

    let mut sources = Vec::new();
    for &dataset in &plan.datasets {
        for &seed in &plan.seeds {
            let data = generate(&plan.generator.spec(dataset, seed))
                .and_then(|s| split_train_test(&s.samples, plan.generator.n_train))
                .map_err(|e| e.to_string());
            sources.push(Source {
                name: dataset.to_string(),
                seed,
                data,
            });
        }
    }
    for (name, stream) in &external {
        for &seed in &plan.seeds {
            let data = stream
                .clone()
                .and_then(|s| split_train_test(&s.samples, plan.generator.n_train).map_err(|e| e.to_string()));
            sources.push(Source {
                name: name.clone(),
                seed,
                data,
            });
        }
    }

    let prepared: Vec<Prepared<'_>> = pool.install(|| {
        sources
            .par_iter()
            .map(|source| Prepared {
                source,
                c: choose_c(plan, source),
            })
            .collect()
    });

    let mut jobs = Vec::with_capacity(plan.total_runs());
    for p in &prepared {
        let learners = cells.iter().map(|&c| Learner::Basket(c)).chain(plan.baselines.iter().map(|b| match b {
            Baseline::Static => Learner::Static,
            Baseline::PassiveAggressive => Learner::PassiveAggressive,
        }));
        for learner in learners {
            jobs.push(Job {
                run_id: format!("r{:06}", jobs.len()),
                prepared: p,
                learner,
            });
        }
    }

    let outcomes: Vec<(ResultRow, Vec<TrajectoryPoint>)> =
        pool.install(|| jobs.par_iter().map(|job| execute(plan, job)).collect());

    fs::create_dir_all(&plan.out_dir)?;
    let mut results = csv::Writer::from_path(plan.out_dir.join("results.csv"))?;
    results.write_record(RESULT_COLUMNS)?;
    for (row, _) in &outcomes {
        results.write_record(row.to_record())?;
    }
    results.flush()?;

    let mut traj = csv::Writer::from_path(plan.out_dir.join("trajectories.csv"))?;
    traj.write_record(["run_id", "arrival_index", "balanced_accuracy"])?;
    for (row, points) in &outcomes {
        for p in points {
            traj.write_record([
                row.run_id.clone(),
                p.arrival_index.to_string(),
                p.balanced_accuracy.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    traj.flush()?;

    let rows: Vec<ResultRow> = outcomes.into_iter().map(|(r, _)| r).collect();
    write_summary(&plan.out_dir.join("summary.csv"), &summarize(&rows))?;
    Ok(plan.out_dir.clone())
}

fn stream_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_stream(path: &Path) -> Result<LabeledStream> {
    let file = File::open(path)?;
    read_stream(BufReader::new(file), &stream_name(path))
}

fn choose_c(plan: &ExperimentPlan, source: &Source) -> std::result::Result<f64, String> {
    let (train, _) = source.data.as_ref().map_err(Clone::clone)?;
    let spec = GridSearchSpec {
        c_grid: plan.c_grid.clone(),
        folds: plan.folds,
        repetitions: plan.repetitions,
        seed: source.seed,
    };
    let normalized = Normalizer::fit(train)
        .and_then(|n| n.apply_all(train))
        .map_err(|e| e.to_string())?;
    let result = grid_search_c(&normalized, &spec, plan.class_weights).map_err(|e| e.to_string())?;
    info!("{} seed {}: C = {}", source.name, source.seed, result.best_c);
    Ok(result.best_c)
}

fn execute(plan: &ExperimentPlan, job: &Job<'_>) -> (ResultRow, Vec<TrajectoryPoint>) {
    let source = job.prepared.source;
    let mut row = ResultRow {
        run_id: job.run_id.clone(),
        dataset: source.name.clone(),
        seed: source.seed,
        include: String::new(),
        exclude: String::new(),
        balance: String::new(),
        ksv: String::new(),
        relabel: String::new(),
        capacity: String::new(),
        c: job.prepared.c.as_ref().ok().copied(),
        final_ba: None,
        update_count: None,
        retrain_count: None,
        wall_time_s: None,
        flags: String::new(),
        error: String::new(),
    };
    match job.learner {
        Learner::Static => row.include = "STATIC".into(),
        Learner::PassiveAggressive => row.include = "PA".into(),
        Learner::Basket(cfg) => {
            row.include = cfg.include.to_string();
            row.exclude = cfg.exclude.to_string();
            row.balance = cfg.balance.to_string();
            row.ksv = bool_code(cfg.keep_only_sv).to_string();
            row.relabel = bool_code(cfg.relabel).to_string();
            row.capacity = cfg.capacity.to_string();
        }
    }

    let outcome: std::result::Result<EvalRecord, String> = (|| {
        let (train, test) = source.data.as_ref().map_err(Clone::clone)?;
        let c = job.prepared.c.clone()?;
        let mut config = RunConfig::new(job.learner, c, plan.class_weights, source.seed);
        config.threshold = plan.threshold;
        config.stride = plan.stride;
        run_prequential(train, test, &config).map_err(|e| e.to_string())
    })();

    match outcome {
        Ok(rec) => {
            row.final_ba = rec.final_ba;
            row.update_count = Some(rec.update_count);
            row.retrain_count = Some(rec.retrain_count);
            row.wall_time_s = Some(rec.wall_time);
            row.flags = rec.flags.to_string();
            if rec.final_ba.is_none() {
                row.error = "balanced accuracy undefined: test stream lacks a class".into();
            }
            (row, rec.trajectory)
        }
        Err(e) => {
            warn!("run {} ({}, seed {}) failed: {e}", row.run_id, row.dataset, row.seed);
            row.error = e;
            (row, Vec::new())
        }
    }
}
