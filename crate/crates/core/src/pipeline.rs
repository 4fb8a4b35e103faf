//! Training-time plumbing: feature standardization, choice of `C` by
//! stratified cross-validation, and the decision threshold.

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid_input, Result};
use crate::eval::{balanced_accuracy, ConfusionCounts};
use crate::model::{ClassWeights, SvmParams};
use crate::sample::{Label, Sample};
use crate::solver::{fit_dcd, SolverOptions};

/// Standard deviations below this are replaced by 1.
pub const STD_FLOOR: f64 = 1e-12;

/// Per-feature z-score transform, fitted once and then frozen.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    /// Sample mean and population standard deviation of each feature.
    pub fn fit(train: &[Sample]) -> Result<Self> {
        let first = train.first().ok_or_else(|| invalid_input("cannot fit a normalizer on no data"))?;
        let dim = first.dim();
        if train.iter().any(|s| s.dim() != dim) {
            return Err(invalid_input("inconsistent feature dimensions"));
        }
        let n = train.len() as f64;
        let mut mean = vec![0.0; dim];
        for s in train {
            for (m, x) in mean.iter_mut().zip(&s.features) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for s in train {
            for ((v, x), m) in var.iter_mut().zip(&s.features).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .enumerate()
            .map(|(j, v)| {
                let sd = (v / n).sqrt();
                if sd < STD_FLOOR {
                    warn!("feature {j} has zero variance in the training data; leaving it unscaled");
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(invalid_input(format!(
                "dimension mismatch: normalizer has {}, sample has {}",
                self.mean.len(),
                x.len()
            )));
        }
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| (x - m) / s)
            .collect())
    }

    pub fn apply_all(&self, samples: &[Sample]) -> Result<Vec<Sample>> {
        samples
            .iter()
            .map(|s| Ok(Sample::new(self.apply(&s.features)?, s.label, s.arrival_index)))
            .collect()
    }
}

/// Cross-validation setup for choosing `C`. The metric is balanced accuracy.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSearchSpec {
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl GridSearchSpec {
    /// `C ∈ {10⁰, 10^−0.5, …, 10⁻⁴}`, 5 folds, 2 repetitions.
    pub fn standard(seed: u64) -> Self {
        Self {
            c_grid: (0..=8).map(|k| 10f64.powf(-0.5 * k as f64)).collect(),
            folds: 5,
            repetitions: 2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_grid.is_empty() {
            return Err(invalid_input("C grid is empty"));
        }
        if let Some(c) = self.c_grid.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
            return Err(invalid_input(format!("C grid value {c} is not positive")));
        }
        if self.folds < 2 {
            return Err(invalid_input(format!("need at least 2 folds, got {}", self.folds)));
        }
        if self.repetitions == 0 {
            return Err(invalid_input("need at least one repetition"));
        }
        Ok(())
    }
}

/// Mean cross-validated balanced accuracy of one grid value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridScore {
    pub c: f64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSearchResult {
    pub best_c: f64,
    pub scores: Vec<GridScore>,
}

/// Assigns every sample to one of `folds` folds, class by class.
///
/// Each class's members are ordered by arrival index, shuffled with `rng`
/// and cut into contiguous chunks whose sizes follow largest-remainder
/// rounding of the proportional share (equal quotas, so the first
/// `n mod folds` folds get one extra sample).
pub fn stratified_folds(samples: &[Sample], folds: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut assignment = vec![0; samples.len()];
    for label in [Label::Negative, Label::Positive] {
        let mut members: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].label == label).collect();
        members.sort_by_key(|&i| samples[i].arrival_index);
        members.shuffle(rng);
        let n = members.len();
        let base = n / folds;
        let extra = n % folds;
        let mut pos = 0;
        for f in 0..folds {
            let size = base + usize::from(f < extra);
            for &i in &members[pos..pos + size] {
                assignment[i] = f;
            }
            pos += size;
        }
    }
    assignment
}

/// Picks `C` by repeated stratified k-fold cross-validation of a static SVM.
///
/// Every fold×repetition score counts equally; the first grid value with
/// the highest mean wins.
pub fn grid_search_c(train: &[Sample], spec: &GridSearchSpec, class_weights: ClassWeights) -> Result<GridSearchResult> {
    spec.validate()?;
    let mut ordered: Vec<&Sample> = train.iter().collect();
    ordered.sort_by_key(|s| s.arrival_index);
    let ordered: Vec<Sample> = ordered.into_iter().cloned().collect();

    // Folds depend only on the seed and the labels, not on C.
    let mut splits = Vec::with_capacity(spec.repetitions);
    for rep in 0..spec.repetitions {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(rep as u64 + 1)));
        splits.push(stratified_folds(&ordered, spec.folds, &mut rng));
    }
    for (rep, assignment) in splits.iter().enumerate() {
        for f in 0..spec.folds {
            for label in [Label::Negative, Label::Positive] {
                let in_val = (0..ordered.len()).any(|i| assignment[i] == f && ordered[i].label == label);
                let in_fit = (0..ordered.len()).any(|i| assignment[i] != f && ordered[i].label == label);
                if !in_val || !in_fit {
                    return Err(invalid_input(format!(
                        "fold {f} of repetition {rep} lacks class {label}; too few samples for {} folds",
                        spec.folds
                    )));
                }
            }
        }
    }

    let mut scores = Vec::with_capacity(spec.c_grid.len());
    for &c in &spec.c_grid {
        let params = SvmParams::new(c, class_weights)?;
        let mut total = 0.0;
        let mut count = 0usize;
        for (rep, assignment) in splits.iter().enumerate() {
            for f in 0..spec.folds {
                let fit_set: Vec<&Sample> = (0..ordered.len()).filter(|&i| assignment[i] != f).map(|i| &ordered[i]).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add((rep * spec.folds + f) as u64));
                let fit = fit_dcd(&fit_set, params, None, &SolverOptions::offline(fit_set.len(), c), &mut rng)?;
                let mut counts = ConfusionCounts::default();
                for i in (0..ordered.len()).filter(|&i| assignment[i] == f) {
                    let s = &ordered[i];
                    counts.record(s.label, Label::from_decision(fit.model.decision_unchecked(&s.features)));
                }
                total += balanced_accuracy(&counts)?;
                count += 1;
            }
        }
        scores.push(GridScore {
            c,
            score: total / count as f64,
        });
    }
    let mut best = scores[0];
    for s in &scores[1..] {
        if s.score > best.score {
            best = *s;
        }
    }
    Ok(GridSearchResult {
        best_c: best.c,
        scores,
    })
}

/// Chooses the cut on decision values that maximizes balanced accuracy of
/// "positive iff score ≥ threshold".
///
/// Candidates are the midpoints between consecutive distinct scores plus
/// ±∞; among equally good candidates the one closest to zero wins.
pub fn optimize_threshold(scores: &[(f64, Label)]) -> Result<f64> {
    if scores.is_empty() {
        return Err(invalid_input("no scores to optimize a threshold on"));
    }
    let positives = scores.iter().filter(|(_, l)| *l == Label::Positive).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(invalid_input("threshold optimization needs both classes"));
    }
    if scores.iter().any(|(s, _)| s.is_nan()) {
        return Err(invalid_input("NaN score"));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Threshold −∞: everything positive.
    let mut tp = positives;
    let mut tn = 0usize;
    let ba = |tp: usize, tn: usize| 0.5 * (tp as f64 / positives as f64 + tn as f64 / negatives as f64);
    let mut best_t = f64::NEG_INFINITY;
    let mut best_ba = ba(tp, tn);

    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == v {
            match sorted[i].1 {
                Label::Positive => tp -= 1,
                Label::Negative => tn += 1,
            }
            i += 1;
        }
        let t = if i < sorted.len() {
            0.5 * (v + sorted[i].0)
        } else {
            f64::INFINITY
        };
        let candidate = ba(tp, tn);
        if candidate > best_ba || (candidate == best_ba && t.abs() < best_t.abs()) {
            best_ba = candidate;
            best_t = t;
        }
    }
    Ok(best_t)
}
