//! Budgeted online learning for a linear soft-margin SVM.
//!
//! The learner keeps a bounded basket of training samples and decides,
//! per arriving sample, whether to store it, which stored sample to evict,
//! whether to rebalance classes, prune non-support vectors or relabel, and
//! whether a warm-started retrain is needed at all. Around it sit the
//! synthetic drift generators, the training-time pipeline and a
//! prequential (test-then-train) evaluator that reports balanced accuracy.

pub mod basket;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod model;
pub mod online;
pub mod pipeline;
pub mod sample;
pub mod solver;
pub mod strategy;

pub use basket::{Basket, BasketEntry, ClassCounts};
pub use datagen::{Dataset, DriftSpec, LabeledStream};
pub use error::{Error, Result};
pub use eval::{balanced_accuracy, run_prequential, ConfusionCounts, EvalRecord, Learner, RunConfig, ThresholdMode};
pub use model::{ClassWeights, LinearModel, SvmParams};
pub use online::{OnlineState, RunFlags, StepOutcome};
pub use pipeline::{GridSearchSpec, Normalizer};
pub use sample::{Label, LabeledPoint, Sample};
pub use solver::{fit_dcd, DualState, Fit, SolverOptions, WarmStart};
pub use strategy::{BalanceRule, ExclusionRule, InclusionRule, StrategyConfig};
