//! Dual coordinate descent for the offset-regularized hinge-loss SVM.
//!
//! Dual problem over the training points `(x_i, y_i)`:
//!
//! ```text
//! min_α  ½ Σ_ij α_i α_j y_i y_j (⟨x_i, x_j⟩ + 1) − Σ_i α_i
//! s.t.   0 ≤ α_i ≤ C · weight(y_i)
//! ```
//!
//! The primal pair `w = Σ α_i y_i x_i`, `b = Σ α_i y_i` is kept up to date
//! after every coordinate move, so each step costs O(d).

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{invalid_input, invalid_state, Result};
use crate::model::{LinearModel, SvmParams};
use crate::sample::{dot, LabeledPoint};

/// Epoch budget and stopping tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Maximum number of full sweeps over the training points.
    pub max_epochs: usize,
    /// Stop once every projected gradient in a sweep is at most this.
    pub tolerance: f64,
}

impl SolverOptions {
    /// `min(0.01 · C, 0.01)`.
    pub fn default_tolerance(c: f64) -> f64 {
        f64::min(0.01 * c, 0.01)
    }

    /// Budget for training from scratch: 100 epochs per training point.
    pub fn offline(n: usize, c: f64) -> Self {
        Self {
            max_epochs: 100 * n.max(1),
            tolerance: Self::default_tolerance(c),
        }
    }

    /// Budget for warm-started retraining after a basket change.
    pub fn online(c: f64) -> Self {
        Self {
            max_epochs: 10,
            tolerance: Self::default_tolerance(c),
        }
    }
}

/// Dual weights aligned with the training points, plus the dual objective.
#[derive(Clone, Debug, PartialEq)]
pub struct DualState {
    pub alphas: Vec<f64>,
    pub objective: f64,
}

impl DualState {
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn support_vector_count(&self) -> usize {
        self.alphas.iter().filter(|&&a| a > 0.0).count()
    }
}

/// Outcome of [`fit_dcd`].
#[derive(Clone, Debug)]
pub struct Fit {
    pub model: LinearModel,
    pub dual: DualState,
    pub epochs: usize,
    pub converged: bool,
}

/// Warm-start input: a model whose `(w, b)` equals `Σ α_i y_i (x_i, 1)` over
/// the given alphas.
#[derive(Clone, Copy, Debug)]
pub struct WarmStart<'a> {
    pub model: &'a LinearModel,
    pub alphas: &'a [f64],
}

/// Projected gradient of coordinate `alpha ∈ [0, upper]` with gradient `g`.
#[inline]
pub fn projected_gradient(g: f64, alpha: f64, upper: f64) -> f64 {
    if alpha <= 0.0 {
        f64::min(g, 0.0)
    } else if alpha >= upper {
        f64::max(g, 0.0)
    } else {
        g
    }
}

/// One exact minimization along a single dual coordinate.
///
/// Moves `alpha` to `clip(alpha − G/Q, 0, upper)` with
/// `G = y f(x) − 1`, `Q = ⟨x, x⟩ + 1`, and applies the change to `model`.
/// Returns the new value of the coordinate.
pub fn coordinate_step(model: &mut LinearModel, point: &impl LabeledPoint, alpha: f64) -> f64 {
    let x = point.features();
    let y = point.label();
    let upper = model.params.upper_bound(y);
    let g = y.sign() * model.decision_unchecked(x) - 1.0;
    step_with(model, x, y.sign(), alpha, g, point.diag(), upper)
}

#[inline]
fn step_with(model: &mut LinearModel, x: &[f64], ys: f64, alpha: f64, g: f64, q: f64, upper: f64) -> f64 {
    let next = f64::min(f64::max(alpha - g / q, 0.0), upper);
    let delta = next - alpha;
    if delta != 0.0 {
        model.axpy(delta * ys, x);
    }
    next
}

/// `½(‖w‖² + b²) − Σ α`, valid when the model represents the alphas.
pub fn dual_objective(model: &LinearModel, alphas: &[f64]) -> f64 {
    0.5 * (dot(&model.w, &model.w) + model.b * model.b) - alphas.iter().sum::<f64>()
}

/// Trains the SVM by randomized dual coordinate descent.
///
/// Without `warm` the solve starts at `α = 0`. With `warm`, the given alphas
/// and model are the starting point; entries that were appended since the
/// last fit must carry `α = 0`, and contributions of removed entries must
/// already be subtracted from the model.
pub fn fit_dcd<P: LabeledPoint, R: Rng + ?Sized>(
    points: &[P],
    params: SvmParams,
    warm: Option<WarmStart<'_>>,
    options: &SolverOptions,
    rng: &mut R,
) -> Result<Fit> {
    if points.is_empty() {
        return Err(invalid_state("cannot fit an SVM on an empty training set"));
    }
    if !(params.c > 0.0) {
        return Err(invalid_input(format!("C must be positive, got {}", params.c)));
    }
    if !(options.tolerance > 0.0) {
        return Err(invalid_input(format!(
            "tolerance must be positive, got {}",
            options.tolerance
        )));
    }
    let dim = points[0].features().len();
    if let Some(p) = points.iter().find(|p| p.features().len() != dim) {
        return Err(invalid_input(format!(
            "dimension mismatch: expected {dim}, found {}",
            p.features().len()
        )));
    }

    let (mut model, mut alphas) = match warm {
        None => (LinearModel::zeros(dim, params), vec![0.0; points.len()]),
        Some(w) => {
            if w.alphas.len() != points.len() {
                return Err(invalid_state(format!(
                    "warm start has {} alphas for {} points",
                    w.alphas.len(),
                    points.len()
                )));
            }
            if w.model.dim() != dim {
                return Err(invalid_input(format!(
                    "dimension mismatch: warm model has {}, data has {dim}",
                    w.model.dim()
                )));
            }
            let mut model = w.model.clone();
            model.params = params;
            (model, w.alphas.to_vec())
        }
    };

    let diag: Vec<f64> = points.iter().map(|p| p.diag()).collect();
    let upper: Vec<f64> = points.iter().map(|p| params.upper_bound(p.label())).collect();
    for (i, (&a, &u)) in alphas.iter().zip(&upper).enumerate() {
        if !(0.0..=u).contains(&a) {
            return Err(invalid_state(format!(
                "alpha[{i}] = {a} outside box [0, {u}]"
            )));
        }
    }

    let mut sweeps = Sweeps {
        alphas: &mut alphas,
        diag: &diag,
        upper: &upper,
        order: (0..points.len()).collect(),
        options,
    };
    let (epochs, converged) = match dim {
        1 => sweeps.run_packed::<1, _, _>(points, &mut model, rng),
        2 => sweeps.run_packed::<2, _, _>(points, &mut model, rng),
        3 => sweeps.run_packed::<3, _, _>(points, &mut model, rng),
        _ => sweeps.run(points, &mut model, rng),
    };

    let objective = dual_objective(&model, &alphas);
    Ok(Fit {
        model,
        dual: DualState { alphas, objective },
        epochs,
        converged,
    })
}

/// Epoch loop state shared by the generic and the fixed-dimension paths.
///
/// Coordinates already within tolerance are left alone so that a converged
/// state is a fixed point.
struct Sweeps<'a> {
    alphas: &'a mut [f64],
    diag: &'a [f64],
    upper: &'a [f64],
    order: Vec<usize>,
    options: &'a SolverOptions,
}

impl Sweeps<'_> {
    fn run<P: LabeledPoint, R: Rng + ?Sized>(&mut self, points: &[P], model: &mut LinearModel, rng: &mut R) -> (usize, bool) {
        let mut epochs = 0;
        while epochs < self.options.max_epochs {
            self.order.shuffle(rng);
            epochs += 1;
            let mut max_violation = 0.0f64;
            for &i in &self.order {
                let p = &points[i];
                let x = p.features();
                let ys = p.label().sign();
                let g = ys * model.decision_unchecked(x) - 1.0;
                let pg = projected_gradient(g, self.alphas[i], self.upper[i]).abs();
                max_violation = max_violation.max(pg);
                if pg > self.options.tolerance {
                    self.alphas[i] = step_with(model, x, ys, self.alphas[i], g, self.diag[i], self.upper[i]);
                }
            }
            if max_violation <= self.options.tolerance {
                return (epochs, true);
            }
        }
        (epochs, false)
    }

    /// Same arithmetic as [`Sweeps::run`] on features packed into fixed-size
    /// arrays.
    fn run_packed<const D: usize, P: LabeledPoint, R: Rng + ?Sized>(
        &mut self,
        points: &[P],
        model: &mut LinearModel,
        rng: &mut R,
    ) -> (usize, bool) {
        let xs: Vec<[f64; D]> = points
            .iter()
            .map(|p| p.features().try_into().expect("dimension checked by the caller"))
            .collect();
        let ys: Vec<f64> = points.iter().map(|p| p.label().sign()).collect();
        let mut w: [f64; D] = model.w.as_slice().try_into().expect("dimension checked by the caller");
        let mut b = model.b;

        let mut epochs = 0;
        let mut converged = false;
        while epochs < self.options.max_epochs {
            self.order.shuffle(rng);
            epochs += 1;
            let mut max_violation = 0.0f64;
            for &i in &self.order {
                let x = &xs[i];
                let mut f = -0.0;
                for j in 0..D {
                    f += w[j] * x[j];
                }
                let g = ys[i] * (f + b) - 1.0;
                let alpha = self.alphas[i];
                let upper = self.upper[i];
                let pg = projected_gradient(g, alpha, upper).abs();
                max_violation = max_violation.max(pg);
                if pg > self.options.tolerance {
                    let next = f64::min(f64::max(alpha - g / self.diag[i], 0.0), upper);
                    let delta = next - alpha;
                    if delta != 0.0 {
                        let coef = delta * ys[i];
                        for j in 0..D {
                            w[j] += coef * x[j];
                        }
                        b += coef;
                    }
                    self.alphas[i] = next;
                }
            }
            if max_violation <= self.options.tolerance {
                converged = true;
                break;
            }
        }
        model.w.copy_from_slice(&w);
        model.b = b;
        (epochs, converged)
    }
}

/// Largest projected-gradient magnitude over the training points; zero at
/// an exact optimum.
pub fn kkt_violation<P: LabeledPoint>(points: &[P], alphas: &[f64], model: &LinearModel) -> Result<f64> {
    if points.len() != alphas.len() {
        return Err(invalid_state(format!(
            "{} points but {} alphas",
            points.len(),
            alphas.len()
        )));
    }
    let mut worst = 0.0f64;
    for (p, &a) in points.iter().zip(alphas) {
        let g = p.label().sign() * model.decision_value(p.features())? - 1.0;
        let u = model.params.upper_bound(p.label());
        worst = worst.max(projected_gradient(g, a, u).abs());
    }
    Ok(worst)
}
