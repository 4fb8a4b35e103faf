//! One online learner: basket, model and the per-sample update loop.

use std::fmt;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basket::{apply_ksv, choose_removal, needs_retrain, relabel_all, should_include, Basket, ClassCounts};
use crate::error::{invalid_input, Result};
use crate::model::{LinearModel, SvmParams};
use crate::sample::{Label, Sample};
use crate::solver::{fit_dcd, DualState, SolverOptions, WarmStart};
use crate::strategy::StrategyConfig;

/// Counters for fallback events that change the configured behaviour.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunFlags {
    /// KEEP_RATIO found no entry of the incoming class.
    pub keep_ratio_fallbacks: u64,
    /// Keep-only-support-vectors would have emptied the basket.
    pub ksv_fallbacks: u64,
}

impl RunFlags {
    pub fn is_empty(&self) -> bool {
        self.keep_ratio_fallbacks == 0 && self.ksv_fallbacks == 0
    }
}

impl fmt::Display for RunFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.keep_ratio_fallbacks > 0 {
            parts.push(format!("keep_ratio_fallback={}", self.keep_ratio_fallbacks));
        }
        if self.ksv_fallbacks > 0 {
            parts.push(format!("ksv_fallback={}", self.ksv_fallbacks));
        }
        f.write_str(&parts.join(";"))
    }
}

/// What a call to [`OnlineState::process_sample`] did.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepOutcome {
    pub included: bool,
    /// Arrival index and dual weight of the evicted entry.
    pub removed: Option<(u64, f64)>,
    /// The lazy-update rule asked for a refit.
    pub retrained: bool,
    /// Number of solver calls made in this step.
    pub fits: usize,
    pub ksv_removed: usize,
    pub relabeled: usize,
    pub keep_ratio_fallback: bool,
    pub ksv_fallback: bool,
}

#[derive(Clone, Debug)]
pub struct OnlineState {
    basket: Basket,
    model: LinearModel,
    config: StrategyConfig,
    update_count: u64,
    retrain_count: u64,
    flags: RunFlags,
    reference_counts: ClassCounts,
    rng: ChaCha8Rng,
}

impl OnlineState {
    /// Fills the basket from the training data and trains from scratch.
    ///
    /// When the training set exceeds the capacity, only the most recent
    /// `capacity` samples are kept.
    pub fn init(training: &[Sample], config: StrategyConfig, params: SvmParams, seed: u64) -> Result<Self> {
        config.validate()?;
        if training.is_empty() {
            return Err(invalid_input("training set is empty"));
        }
        if !training.iter().any(|s| s.label == Label::Positive) || !training.iter().any(|s| s.label == Label::Negative) {
            return Err(invalid_input("training set must contain both classes"));
        }
        if training.windows(2).any(|w| w[0].arrival_index >= w[1].arrival_index) {
            return Err(invalid_input("training samples must be in strictly increasing arrival order"));
        }
        let dim = training[0].dim();
        if training.iter().any(|s| s.dim() != dim) {
            return Err(invalid_input("training samples have inconsistent dimensions"));
        }

        let start = training.len().saturating_sub(config.capacity);
        let mut basket = Basket::new(config.capacity);
        for s in &training[start..] {
            basket.push(s.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = SolverOptions::offline(basket.len(), params.c);
        let fit = fit_dcd(basket.entries(), params, None, &opts, &mut rng)?;
        basket.set_alphas(&fit.dual.alphas);
        let reference_counts = basket.class_counts();
        Ok(Self {
            basket,
            model: fit.model,
            config,
            update_count: 0,
            retrain_count: 1,
            flags: RunFlags::default(),
            reference_counts,
            rng,
        })
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    pub fn basket(&self) -> &Basket {
        &self.basket
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    /// Number of steps in which the model was refitted.
    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    /// Number of solver calls, including the initial fit.
    pub fn retrain_count(&self) -> u64 {
        self.retrain_count
    }

    pub fn flags(&self) -> RunFlags {
        self.flags
    }

    /// Class counts right after the basket was first filled.
    pub fn reference_counts(&self) -> ClassCounts {
        self.reference_counts
    }

    pub fn dual(&self) -> DualState {
        let alphas = self.basket.alphas();
        let objective = crate::solver::dual_objective(&self.model, &alphas);
        DualState { alphas, objective }
    }

    /// Updates basket and model after the true label of `sample` is revealed.
    pub fn process_sample(&mut self, sample: &Sample) -> Result<StepOutcome> {
        if sample.dim() != self.model.dim() {
            return Err(invalid_input(format!(
                "dimension mismatch: model has {}, sample has {}",
                self.model.dim(),
                sample.dim()
            )));
        }
        let mut out = StepOutcome::default();
        if !should_include(self.config.include, &self.model, &sample.features, sample.label) {
            return Ok(out);
        }
        out.included = true;

        if self.basket.is_full() {
            if let Some(removal) = choose_removal(&self.config, &self.basket, &self.model, sample.label) {
                if removal.fallback {
                    out.keep_ratio_fallback = true;
                    self.flags.keep_ratio_fallbacks += 1;
                    warn!(
                        "KEEP_RATIO: no entry of class {} in basket at arrival {}, removing over all entries",
                        sample.label, sample.arrival_index
                    );
                }
                let victim = self.basket.remove(removal.index);
                if victim.alpha > 0.0 {
                    self.model
                        .axpy(-(victim.alpha * victim.current_label.sign()), &victim.sample.features);
                }
                out.removed = Some((victim.sample.arrival_index, victim.alpha));
            }
        }

        self.basket.push(sample.clone());

        let added = Some((sample.features.as_slice(), sample.label));
        if needs_retrain(&self.model, added, out.removed.map(|(_, a)| a)) {
            self.refit()?;
            out.retrained = true;
            out.fits += 1;
        }

        if self.config.keep_only_sv {
            let ksv = apply_ksv(&mut self.basket);
            out.ksv_removed = ksv.removed;
            if ksv.fallback {
                out.ksv_fallback = true;
                self.flags.ksv_fallbacks += 1;
                warn!(
                    "keep-only-support-vectors found no support vector at arrival {}, keeping one entry",
                    sample.arrival_index
                );
            }
        }

        if self.config.relabel {
            out.relabeled = relabel_all(&mut self.basket, &mut self.model);
            if out.relabeled > 0 {
                self.refit()?;
                out.fits += 1;
            }
        }

        if out.fits > 0 {
            self.update_count += 1;
        }
        Ok(out)
    }

    fn refit(&mut self) -> Result<()> {
        let alphas = self.basket.alphas();
        let params = self.model.params;
        let warm = WarmStart {
            model: &self.model,
            alphas: &alphas,
        };
        let fit = fit_dcd(
            self.basket.entries(),
            params,
            Some(warm),
            &SolverOptions::online(params.c),
            &mut self.rng,
        )?;
        self.basket.set_alphas(&fit.dual.alphas);
        self.model = fit.model;
        self.retrain_count += 1;
        Ok(())
    }
}
