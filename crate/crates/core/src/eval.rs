//! Balanced accuracy and the test-then-train stream evaluator.

use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid_input, Error, Result};
use crate::model::{ClassWeights, LinearModel, SvmParams};
use crate::online::{OnlineState, RunFlags};
use crate::pipeline::{optimize_threshold, Normalizer};
use crate::sample::{Label, Sample};
use crate::solver::{fit_dcd, SolverOptions};
use crate::strategy::StrategyConfig;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub fp: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Positive, Label::Positive) => self.tp += 1,
            (Label::Positive, Label::Negative) => self.fn_ += 1,
            (Label::Negative, Label::Negative) => self.tn += 1,
            (Label::Negative, Label::Positive) => self.fp += 1,
        }
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

/// `½ (TP/P + TN/N)`; undefined unless both classes occurred.
pub fn balanced_accuracy(c: &ConfusionCounts) -> Result<f64> {
    let (p, n) = (c.positives(), c.negatives());
    if p == 0 || n == 0 {
        return Err(Error::UndefinedMetric(format!(
            "balanced accuracy needs both classes (P = {p}, N = {n})"
        )));
    }
    Ok(0.5 * (c.tp as f64 / p as f64 + c.tn as f64 / n as f64))
}

/// What adapts during the test stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Learner {
    /// The SVM trained on all training data, never updated.
    Static,
    /// Passive-aggressive updates on every revealed sample, no stored data.
    PassiveAggressive,
    /// Budgeted basket with the given data-selection strategy.
    Basket(StrategyConfig),
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Learner::Static => f.write_str("STATIC"),
            Learner::PassiveAggressive => f.write_str("PA"),
            Learner::Basket(c) => write!(
                f,
                "{}/{}/{}/ksv={}/rel={}/{}",
                c.include, c.exclude, c.balance, c.keep_only_sv, c.relabel, c.capacity
            ),
        }
    }
}

/// How the decision threshold is set before the test stream starts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ThresholdMode {
    /// Optimized for balanced accuracy on the initial model's training scores.
    #[default]
    InSample,
    /// Fixed at zero.
    Zero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub learner: Learner,
    pub c: f64,
    pub class_weights: ClassWeights,
    pub seed: u64,
    pub threshold: ThresholdMode,
    /// Record the running balanced accuracy every `stride` test samples.
    pub stride: usize,
}

impl RunConfig {
    pub fn new(learner: Learner, c: f64, class_weights: ClassWeights, seed: u64) -> Self {
        Self {
            learner,
            c,
            class_weights,
            seed,
            threshold: ThresholdMode::InSample,
            stride: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub arrival_index: u64,
    /// `None` while one of the classes has not been seen yet.
    pub balanced_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub config: RunConfig,
    pub counts: ConfusionCounts,
    pub final_ba: Option<f64>,
    pub trajectory: Vec<TrajectoryPoint>,
    pub update_count: u64,
    pub retrain_count: u64,
    pub wall_time: f64,
    pub flags: RunFlags,
    pub threshold: f64,
    pub initial_model: LinearModel,
    pub final_model: LinearModel,
}

enum Adapter {
    Fixed(LinearModel),
    Pa { model: LinearModel, updates: u64 },
    Basket(Box<OnlineState>),
}

impl Adapter {
    fn model(&self) -> &LinearModel {
        match self {
            Adapter::Fixed(m) => m,
            Adapter::Pa { model, .. } => model,
            Adapter::Basket(s) => s.model(),
        }
    }
}

/// Prequential evaluation: every test sample is first predicted with the
/// current model and the frozen threshold, scored, and only then revealed
/// to the learner.
///
/// The normalizer, the initial model and the threshold are all fitted on
/// `train`.
pub fn run_prequential(train: &[Sample], test: &[Sample], config: &RunConfig) -> Result<EvalRecord> {
    let started = Instant::now();
    if config.stride == 0 {
        return Err(invalid_input("trajectory stride must be positive"));
    }
    let params = SvmParams::new(config.c, config.class_weights)?;
    let normalizer = Normalizer::fit(train)?;
    let train = normalizer.apply_all(train)?;
    let test = normalizer.apply_all(test)?;

    let mut adapter = match config.learner {
        Learner::Basket(strategy) => Adapter::Basket(Box::new(OnlineState::init(&train, strategy, params, config.seed)?)),
        Learner::Static | Learner::PassiveAggressive => {
            if !train.iter().any(|s| s.label == Label::Positive) || !train.iter().any(|s| s.label == Label::Negative) {
                return Err(invalid_input("training set must contain both classes"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let fit = fit_dcd(&train, params, None, &SolverOptions::offline(train.len(), params.c), &mut rng)?;
            if config.learner == Learner::Static {
                Adapter::Fixed(fit.model)
            } else {
                Adapter::Pa {
                    model: fit.model,
                    updates: 0,
                }
            }
        }
    };
    let initial_model = adapter.model().clone();

    let threshold = match config.threshold {
        ThresholdMode::Zero => 0.0,
        ThresholdMode::InSample => {
            let scores: Vec<(f64, Label)> = train
                .iter()
                .map(|s| Ok((initial_model.decision_value(&s.features)?, s.label)))
                .collect::<Result<_>>()?;
            optimize_threshold(&scores)?
        }
    };

    let mut counts = ConfusionCounts::default();
    let mut trajectory = Vec::with_capacity(test.len() / config.stride + 1);
    for (i, sample) in test.iter().enumerate() {
        let f = adapter.model().decision_value(&sample.features)?;
        let predicted = if f >= threshold { Label::Positive } else { Label::Negative };
        counts.record(sample.label, predicted);

        match &mut adapter {
            Adapter::Fixed(_) => {}
            Adapter::Pa { model, updates } => {
                let next = model.pa_update(&sample.features, sample.label)?;
                if next != *model {
                    *updates += 1;
                    *model = next;
                }
            }
            Adapter::Basket(state) => {
                state.process_sample(sample)?;
            }
        }

        if (i + 1) % config.stride == 0 {
            trajectory.push(TrajectoryPoint {
                arrival_index: sample.arrival_index,
                balanced_accuracy: balanced_accuracy(&counts).ok(),
            });
        }
    }

    let (update_count, retrain_count, flags) = match &adapter {
        Adapter::Fixed(_) => (0, 1, RunFlags::default()),
        Adapter::Pa { updates, .. } => (*updates, 1, RunFlags::default()),
        Adapter::Basket(s) => (s.update_count(), s.retrain_count(), s.flags()),
    };
    Ok(EvalRecord {
        config: config.clone(),
        counts,
        final_ba: balanced_accuracy(&counts).ok(),
        trajectory,
        update_count,
        retrain_count,
        wall_time: started.elapsed().as_secs_f64(),
        flags,
        threshold,
        final_model: adapter.model().clone(),
        initial_model,
    })
}
