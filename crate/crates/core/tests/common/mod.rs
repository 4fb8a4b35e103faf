//! Test-only oracles, independent of the coordinate-descent code path.
#![allow(dead_code)]

use basketsvm::{Label, Sample};
use rand::Rng;

/// Dense augmented Hessian `Q_ij = y_i y_j (⟨x_i, x_j⟩ + 1)`.
pub fn gram(points: &[Sample]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let k: f64 = points[i]
                .features
                .iter()
                .zip(&points[j].features)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + 1.0;
            q[i][j] = points[i].label.sign() * points[j].label.sign() * k;
        }
    }
    q
}

/// `½ αᵀQα − Σα` evaluated from the dense matrix.
pub fn dense_objective(q: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * q[i][j];
        }
    }
    0.5 * quad - alpha.iter().sum::<f64>()
}

/// Primal pair `(w, b)` represented by the alphas.
pub fn primal_from_dual(points: &[Sample], alpha: &[f64]) -> (Vec<f64>, f64) {
    let d = points[0].features.len();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for (p, &a) in points.iter().zip(alpha) {
        let ya = a * p.label.sign();
        for (wj, xj) in w.iter_mut().zip(&p.features) {
            *wj += ya * xj;
        }
        b += ya;
    }
    (w, b)
}

/// Full-gradient projected descent on the dense dual, run until every
/// projected-gradient component is at most `tol` (or the iteration cap).
pub fn projected_gradient_reference(points: &[Sample], upper: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
    let q = gram(points);
    let n = points.len();
    // Gershgorin bound on the largest eigenvalue.
    let lmax = q
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let step = 1.0 / lmax;
    let mut alpha = vec![0.0; n];
    for _ in 0..max_iter {
        let grad: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| q[i][j] * alpha[j]).sum::<f64>() - 1.0)
            .collect();
        let worst = (0..n)
            .map(|i| {
                let g = grad[i];
                if alpha[i] <= 0.0 {
                    (-g).max(0.0)
                } else if alpha[i] >= upper[i] {
                    g.max(0.0)
                } else {
                    g.abs()
                }
            })
            .fold(0.0, f64::max);
        if worst <= tol {
            break;
        }
        for i in 0..n {
            alpha[i] = (alpha[i] - step * grad[i]).clamp(0.0, upper[i]);
        }
    }
    alpha
}

/// Random small problem: up to `max_n` samples in up to `max_d` dimensions.
pub fn random_problem<R: Rng>(rng: &mut R, max_n: usize, max_d: usize) -> Vec<Sample> {
    let n = rng.random_range(1..=max_n);
    let d = rng.random_range(1..=max_d);
    (0..n)
        .map(|i| {
            let label = if rng.random_bool(0.5) { Label::Positive } else { Label::Negative };
            let shift = 0.7 * label.sign();
            let features = (0..d).map(|_| rng.random_range(-2.0..2.0) + shift).collect();
            Sample::new(features, label, i as u64)
        })
        .collect()
}

/// 2-D Gaussian blobs around (±1.5, 0) with the given label sequence.
pub fn blob_stream<R: Rng>(rng: &mut R, labels: &[Label], start: u64) -> Vec<Sample> {
    labels
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let cx = 1.5 * y.sign();
            let features = vec![cx + rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            Sample::new(features, y, start + i as u64)
        })
        .collect()
}

/// Balanced accuracy by direct counting, used as an oracle.
pub fn brute_ba(truth_pred: impl IntoIterator<Item = (Label, Label)>) -> Option<f64> {
    let (mut tp, mut p, mut tn, mut n) = (0u64, 0u64, 0u64, 0u64);
    for (t, y) in truth_pred {
        match t {
            Label::Positive => {
                p += 1;
                tp += u64::from(y == Label::Positive);
            }
            Label::Negative => {
                n += 1;
                tn += u64::from(y == Label::Negative);
            }
        }
    }
    (p > 0 && n > 0).then(|| 0.5 * (tp as f64 / p as f64 + tn as f64 / n as f64))
}
