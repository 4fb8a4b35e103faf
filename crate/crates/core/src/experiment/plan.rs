//! Plan files.
//!
//! A plan is a list of `key = value` lines. Values are either a single item
//! or a comma-separated list; numeric lists also accept an inclusive range
//! `start..end step s` (`step` defaults to ±1). `#` starts a comment.
//!
//! ```text
//! datasets     = LinearShift, Opposite, Cross
//! seeds        = 1..5
//! include      = ADD_ALL, ONLY_MISCLASSIFIED, ONLY_WITHIN_MARGIN
//! exclude      = REMOVE_OLDEST, REMOVE_FARTHEST
//! balance      = DONT_HANDLE_RATIO, KEEP_RATIO_AS_IT_IS, BALANCED_RATIO
//! ksv          = false
//! relabel      = false
//! capacity     = 50..1000 step 50
//! log10_c      = 0..-4 step -0.5
//! folds        = 5
//! repetitions  = 2
//! class_weight = 1.0, 1.0
//! baselines    = STATIC, PA
//! workers      = 4
//! out          = results
//! ```
//!
//! Every key is listed in [`KEYS`]; anything else is rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::datagen::{Dataset, DriftSpec};
use crate::eval::ThresholdMode;
use crate::model::ClassWeights;
use crate::strategy::{BalanceRule, ExclusionRule, InclusionRule, StrategyConfig};

/// Keys accepted in a plan file.
pub const KEYS: &[&str] = &[
    "datasets",
    "streams",
    "seeds",
    "include",
    "exclude",
    "balance",
    "ksv",
    "relabel",
    "capacity",
    "log10_c",
    "c_grid",
    "folds",
    "repetitions",
    "class_weight",
    "baselines",
    "threshold",
    "workers",
    "out",
    "n_total",
    "n_train",
    "noise_sigma",
    "class_ratio",
    "drift",
    "stride",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub struct PlanError {
    /// 1-based line number, when the problem is tied to one line.
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "plan line {l}, key `{}`: {}", self.key, self.message),
            None => write!(f, "plan key `{}`: {}", self.key, self.message),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Baseline {
    Static,
    PassiveAggressive,
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "STATIC" | "SVM" => Ok(Baseline::Static),
            "PA" => Ok(Baseline::PassiveAggressive),
            other => Err(format!("unknown baseline `{other}`")),
        }
    }
}

/// Synthetic-stream settings shared by all generated datasets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorSettings {
    pub n_total: usize,
    pub n_train: usize,
    pub noise_sigma: f64,
    pub class_ratio: f64,
    pub drift: f64,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        let d = DriftSpec::new(Dataset::Parallel, 0);
        Self {
            n_total: d.n_total,
            n_train: d.n_train,
            noise_sigma: d.noise_sigma,
            class_ratio: d.class_ratio,
            drift: d.drift,
        }
    }
}

impl GeneratorSettings {
    pub fn spec(&self, dataset: Dataset, seed: u64) -> DriftSpec {
        DriftSpec {
            dataset,
            n_total: self.n_total,
            n_train: self.n_train,
            seed,
            noise_sigma: self.noise_sigma,
            class_ratio: self.class_ratio,
            drift: self.drift,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub datasets: Vec<Dataset>,
    /// External streams in the canonical serialization.
    pub streams: Vec<PathBuf>,
    pub seeds: Vec<u64>,
    pub include: Vec<InclusionRule>,
    pub exclude: Vec<ExclusionRule>,
    pub balance: Vec<BalanceRule>,
    pub ksv: Vec<bool>,
    pub relabel: Vec<bool>,
    pub capacity: Vec<usize>,
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub repetitions: usize,
    pub class_weights: ClassWeights,
    pub baselines: Vec<Baseline>,
    pub threshold: ThresholdMode,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub generator: GeneratorSettings,
    pub stride: usize,
}

impl ExperimentPlan {
    /// A plan with the default axes and no data sources.
    pub fn empty() -> Self {
        Self {
            datasets: Vec::new(),
            streams: Vec::new(),
            seeds: vec![0],
            include: vec![InclusionRule::AddAll],
            exclude: vec![ExclusionRule::RemoveOldest],
            balance: vec![BalanceRule::DontHandle],
            ksv: vec![false],
            relabel: vec![false],
            capacity: vec![1000],
            c_grid: (0..=8).map(|k| 10f64.powf(-0.5 * k as f64)).collect(),
            folds: 5,
            repetitions: 2,
            class_weights: ClassWeights::EQUAL,
            baselines: vec![Baseline::Static, Baseline::PassiveAggressive],
            threshold: ThresholdMode::InSample,
            workers: 1,
            out_dir: PathBuf::from("results"),
            generator: GeneratorSettings::default(),
            stride: 50,
        }
    }

    /// Strategy cells in grid order (include, exclude, balance, ksv,
    /// relabel, capacity; last axis fastest).
    pub fn cells(&self) -> Vec<StrategyConfig> {
        let mut out = Vec::new();
        for &include in &self.include {
            for &exclude in &self.exclude {
                for &balance in &self.balance {
                    for &keep_only_sv in &self.ksv {
                        for &relabel in &self.relabel {
                            for &capacity in &self.capacity {
                                out.push(StrategyConfig {
                                    include,
                                    exclude,
                                    balance,
                                    keep_only_sv,
                                    relabel,
                                    capacity,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn source_count(&self) -> usize {
        self.datasets.len() + self.streams.len()
    }

    /// `sources × seeds × (cells + baselines)`.
    pub fn total_runs(&self) -> usize {
        self.source_count() * self.seeds.len() * (self.cells().len() + self.baselines.len())
    }
}

/// Reads and validates a plan file. Relative stream paths resolve against
/// the plan's directory.
pub fn parse_plan(path: &Path) -> crate::Result<ExperimentPlan> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut plan = parse_plan_str(&text)?;
    for s in &mut plan.streams {
        if s.is_relative() {
            *s = base.join(&*s);
        }
    }
    Ok(plan)
}

pub fn parse_plan_str(text: &str) -> Result<ExperimentPlan, PlanError> {
    let mut plan = ExperimentPlan::empty();
    let mut seen: Vec<&str> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(PlanError {
                line: Some(line_no),
                key: line.to_string(),
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let err = |message: String| PlanError {
            line: Some(line_no),
            key: key.to_string(),
            message,
        };
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(err("unknown key".into()));
        };
        if seen.contains(&known) {
            return Err(err("key given more than once".into()));
        }
        seen.push(known);
        if value.is_empty() {
            return Err(err("empty value".into()));
        }
        apply(&mut plan, known, value).map_err(err)?;
    }
    if plan.datasets.is_empty() && plan.streams.is_empty() {
        return Err(PlanError {
            line: None,
            key: "datasets".into(),
            message: "missing dataset: give `datasets` and/or `streams`".into(),
        });
    }
    if seen.contains(&"log10_c") && seen.contains(&"c_grid") {
        return Err(PlanError {
            line: None,
            key: "c_grid".into(),
            message: "give either `log10_c` or `c_grid`, not both".into(),
        });
    }
    Ok(plan)
}

fn apply(plan: &mut ExperimentPlan, key: &str, value: &str) -> Result<(), String> {
    match key {
        "datasets" => plan.datasets = list(value, |s| s.parse::<Dataset>().map_err(|e| e.to_string()))?,
        "streams" => plan.streams = list(value, |s| Ok(PathBuf::from(s)))?,
        "seeds" => plan.seeds = int_range(value)?.into_iter().map(|v| v as u64).collect(),
        "include" => plan.include = list(value, |s| s.parse().map_err(|e: crate::Error| e.to_string()))?,
        "exclude" => plan.exclude = list(value, |s| s.parse().map_err(|e: crate::Error| e.to_string()))?,
        "balance" => plan.balance = list(value, |s| s.parse().map_err(|e: crate::Error| e.to_string()))?,
        "ksv" => plan.ksv = list(value, parse_bool)?,
        "relabel" => plan.relabel = list(value, parse_bool)?,
        "capacity" => {
            let caps = int_range(value)?;
            if let Some(c) = caps.iter().find(|&&c| c < 2) {
                return Err(format!("capacity {c} is below 2"));
            }
            plan.capacity = caps.into_iter().map(|c| c as usize).collect();
        }
        "log10_c" => plan.c_grid = float_range(value)?.into_iter().map(|e| 10f64.powf(e)).collect(),
        "c_grid" => {
            let grid = float_range(value)?;
            if let Some(c) = grid.iter().find(|&&c| !(c > 0.0)) {
                return Err(format!("C value {c} is not positive"));
            }
            plan.c_grid = grid;
        }
        "folds" => plan.folds = single_usize(value, 2)?,
        "repetitions" => plan.repetitions = single_usize(value, 1)?,
        "class_weight" => {
            let w = list(value, parse_f64)?;
            if w.len() != 2 {
                return Err("expected two weights: negative, positive".into());
            }
            plan.class_weights = ClassWeights::new(w[0], w[1]).map_err(|e| e.to_string())?;
        }
        "baselines" => {
            plan.baselines = if value.eq_ignore_ascii_case("none") {
                Vec::new()
            } else {
                list(value, |s| s.parse::<Baseline>())?
            }
        }
        "threshold" => {
            plan.threshold = match value {
                "in_sample" => ThresholdMode::InSample,
                "zero" => ThresholdMode::Zero,
                other => return Err(format!("unknown threshold mode `{other}` (in_sample, zero)")),
            }
        }
        "workers" => plan.workers = single_usize(value, 1)?,
        "out" => plan.out_dir = PathBuf::from(value),
        "n_total" => plan.generator.n_total = single_usize(value, 2)?,
        "n_train" => plan.generator.n_train = single_usize(value, 1)?,
        "noise_sigma" => plan.generator.noise_sigma = positive_f64(value)?,
        "class_ratio" => plan.generator.class_ratio = positive_f64(value)?,
        "drift" => plan.generator.drift = parse_f64(value)?,
        "stride" => plan.stride = single_usize(value, 1)?,
        _ => unreachable!("key list and match arms disagree on `{key}`"),
    }
    Ok(())
}

fn list<T>(value: &str, mut f: impl FnMut(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items: Vec<&str> = value.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err("empty list element".into());
    }
    items.into_iter().map(&mut f).collect()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "t" | "yes" => Ok(true),
        "false" | "f" | "no" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{s}` is not a finite number"))
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive"))
    }
}

fn single_usize(s: &str, min: usize) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))?;
    if v < min {
        return Err(format!("must be at least {min}"));
    }
    Ok(v)
}

/// Splits `a..b step s` into its parts; `None` for plain lists.
fn range_parts(item: &str) -> Option<(&str, &str, Option<&str>)> {
    let (start, rest) = item.split_once("..")?;
    let (end, step) = match rest.split_once("step") {
        Some((e, s)) => (e, Some(s.trim())),
        None => (rest, None),
    };
    Some((start.trim(), end.trim(), step))
}

fn int_range(value: &str) -> Result<Vec<i64>, String> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim) {
        let parse = |s: &str| s.parse::<i64>().map_err(|_| format!("`{s}` is not an integer"));
        match range_parts(item) {
            None => out.push(parse(item)?),
            Some((a, b, step)) => {
                let (a, b) = (parse(a)?, parse(b)?);
                let step = match step {
                    Some(s) => parse(s)?,
                    None if b >= a => 1,
                    None => -1,
                };
                if step == 0 || (b - a).signum() * step.signum() < 0 {
                    return Err(format!("range `{item}` is empty"));
                }
                let mut v = a;
                while (step > 0 && v <= b) || (step < 0 && v >= b) {
                    out.push(v);
                    v += step;
                }
            }
        }
    }
    if out.is_empty() {
        return Err("empty range".into());
    }
    Ok(out)
}

fn float_range(value: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim) {
        match range_parts(item) {
            None => out.push(parse_f64(item)?),
            Some((a, b, step)) => {
                let (a, b) = (parse_f64(a)?, parse_f64(b)?);
                let step = match step {
                    Some(s) => parse_f64(s)?,
                    None if b >= a => 1.0,
                    None => -1.0,
                };
                let span = (b - a) / step;
                if step == 0.0 || span < -1e-9 {
                    return Err(format!("range `{item}` is empty"));
                }
                let n = (span + 1e-9).floor() as usize;
                out.extend((0..=n).map(|k| a + k as f64 * step));
            }
        }
    }
    Ok(out)
}
