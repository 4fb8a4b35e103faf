//! Linear decision function with the offset folded into the regularizer.
//!
//! The model is `f(x) = ⟨w, x⟩ + b`, obtained from the soft-margin problem
//! that penalizes `½‖w‖² + ½b²`. Equivalently every input is augmented with
//! a constant 1 component whose weight is `b`, which is why the diagonal of
//! the dual Hessian is `⟨x, x⟩ + 1`.

use crate::error::{invalid_input, Result};
use crate::sample::{dot, Label};

/// Multipliers applied to `C` per class, giving box constraints
/// `0 ≤ α_i ≤ C · weight(y_i)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassWeights {
    pub negative: f64,
    pub positive: f64,
}

impl ClassWeights {
    pub const EQUAL: ClassWeights = ClassWeights {
        negative: 1.0,
        positive: 1.0,
    };

    pub fn new(negative: f64, positive: f64) -> Result<Self> {
        if !(negative > 0.0 && positive > 0.0) || !negative.is_finite() || !positive.is_finite() {
            return Err(invalid_input(format!(
                "class weights must be positive and finite, got ({negative}, {positive})"
            )));
        }
        Ok(Self { negative, positive })
    }

    #[inline]
    pub fn get(&self, label: Label) -> f64 {
        match label {
            Label::Negative => self.negative,
            Label::Positive => self.positive,
        }
    }
}

impl Default for ClassWeights {
    fn default() -> Self {
        Self::EQUAL
    }
}

/// Regularization constant plus per-class weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub class_weights: ClassWeights,
}

impl SvmParams {
    pub fn new(c: f64, class_weights: ClassWeights) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid_input(format!("C must be positive, got {c}")));
        }
        Ok(Self { c, class_weights })
    }

    /// Upper bound of the dual box for a sample of class `label`.
    #[inline]
    pub fn upper_bound(&self, label: Label) -> f64 {
        self.c * self.class_weights.get(label)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub params: SvmParams,
}

impl LinearModel {
    /// The all-zero model of dimension `dim`.
    pub fn zeros(dim: usize, params: SvmParams) -> Self {
        Self {
            w: vec![0.0; dim],
            b: 0.0,
            params,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// `⟨w, x⟩ + b`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(invalid_input(format!(
                "dimension mismatch: model has {}, sample has {}",
                self.w.len(),
                x.len()
            )));
        }
        Ok(self.decision_unchecked(x))
    }

    #[inline]
    pub(crate) fn decision_unchecked(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }

    /// Adds `coef · (x, 1)` to `(w, b)`.
    #[inline]
    pub(crate) fn axpy(&mut self, coef: f64, x: &[f64]) {
        for (wj, xj) in self.w.iter_mut().zip(x) {
            *wj += coef * xj;
        }
        self.b += coef;
    }

    /// Passive-aggressive step: solves for the dual weight of `(x, y)` alone,
    /// with everything already absorbed in `(w, b)` held fixed, folds the
    /// result into the model and forgets the sample.
    pub fn pa_update(&self, x: &[f64], y: Label) -> Result<LinearModel> {
        let f = self.decision_value(x)?;
        let ys = y.sign();
        let loss = f64::max(0.0, 1.0 - ys * f);
        let q = dot(x, x) + 1.0;
        let tau = f64::min(self.params.upper_bound(y), loss / q);
        let mut next = self.clone();
        if tau != 0.0 {
            next.axpy(tau * ys, x);
        }
        Ok(next)
    }
}
