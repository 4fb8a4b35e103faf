mod common;

use basketsvm::solver::{coordinate_step, dual_objective, kkt_violation};
use basketsvm::{fit_dcd, ClassWeights, Label, LinearModel, Sample, SolverOptions, SvmParams, WarmStart};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn problem() -> impl Strategy<Value = (Vec<Sample>, f64)> {
    let point = (prop::collection::vec(-3.0..3.0f64, 2), any::<bool>());
    (prop::collection::vec(point, 1..25), prop::sample::select(vec![0.01, 0.1, 1.0, 10.0])).prop_map(|(pts, c)| {
        let samples = pts
            .into_iter()
            .enumerate()
            .map(|(i, (x, pos))| {
                let y = if pos { Label::Positive } else { Label::Negative };
                Sample::new(x, y, i as u64)
            })
            .collect();
        (samples, c)
    })
}

fn bits(m: &LinearModel) -> Vec<u64> {
    m.w.iter().chain(std::iter::once(&m.b)).map(|v| v.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_represents_alphas((points, c) in problem(), seed in any::<u64>()) {
        let params = SvmParams::new(c, ClassWeights::EQUAL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fit = fit_dcd(&points, params, None, &SolverOptions::offline(points.len(), c), &mut rng).unwrap();
        let (w, b) = common::primal_from_dual(&points, &fit.dual.alphas);
        for (a, r) in fit.model.w.iter().zip(&w) {
            prop_assert!((a - r).abs() <= 1e-9);
        }
        prop_assert!((fit.model.b - b).abs() <= 1e-9);
        for (a, p) in fit.dual.alphas.iter().zip(&points) {
            prop_assert!(*a >= 0.0 && *a <= params.upper_bound(p.label));
        }
    }

    #[test]
    fn converged_fit_is_a_fixed_point((points, c) in problem(), seed in any::<u64>()) {
        let params = SvmParams::new(c, ClassWeights::EQUAL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let options = SolverOptions::offline(points.len(), c);
        let fit = fit_dcd(&points, params, None, &options, &mut rng).unwrap();
        prop_assume!(fit.converged);
        let warm = WarmStart { model: &fit.model, alphas: &fit.dual.alphas };
        let again = fit_dcd(&points, params, Some(warm), &SolverOptions::online(c), &mut rng).unwrap();
        prop_assert_eq!(bits(&again.model), bits(&fit.model));
        prop_assert_eq!(again.epochs, 1);
    }

    #[test]
    fn adding_a_margin_satisfying_point_keeps_the_model((points, c) in problem(), seed in any::<u64>()) {
        let params = SvmParams::new(c, ClassWeights::EQUAL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fit = fit_dcd(&points, params, None, &SolverOptions::offline(points.len(), c), &mut rng).unwrap();
        prop_assume!(fit.converged);
        // Place a point far on the correct side of the hyperplane.
        let norm2: f64 = fit.model.w.iter().map(|v| v * v).sum();
        prop_assume!(norm2 > 1e-6);
        let scale = (2.0 - fit.model.b) / norm2;
        let x: Vec<f64> = fit.model.w.iter().map(|v| v * scale.max(0.0) * 2.0).collect();
        let extra = Sample::new(x, Label::Positive, points.len() as u64);
        prop_assume!(fit.model.decision_value(&extra.features).unwrap() >= 1.0);
        let mut extended = points.clone();
        extended.push(extra);
        let mut alphas = fit.dual.alphas.clone();
        alphas.push(0.0);
        let warm = WarmStart { model: &fit.model, alphas: &alphas };
        let again = fit_dcd(&extended, params, Some(warm), &SolverOptions::online(c), &mut rng).unwrap();
        prop_assert_eq!(bits(&again.model), bits(&fit.model));
    }

    #[test]
    fn pa_matches_coordinate_step(
        w in prop::collection::vec(-2.0..2.0f64, 3),
        b in -2.0..2.0f64,
        x in prop::collection::vec(-3.0..3.0f64, 3),
        pos in any::<bool>(),
        c in 0.001..100.0f64,
        wn in 0.1..5.0f64,
        wp in 0.1..5.0f64,
    ) {
        let params = SvmParams::new(c, ClassWeights::new(wn, wp).unwrap()).unwrap();
        let mut model = LinearModel::zeros(3, params);
        model.w = w;
        model.b = b;
        let y = if pos { Label::Positive } else { Label::Negative };
        let pa = model.pa_update(&x, y).unwrap();
        let mut step = model.clone();
        coordinate_step(&mut step, &Sample::new(x, y, 0), 0.0);
        prop_assert_eq!(bits(&pa), bits(&step));
    }
}

#[test]
fn converged_fits_satisfy_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let points = common::random_problem(&mut rng, 30, 4);
        let params = SvmParams::new(1.0, ClassWeights::new(1.0, 3.0).unwrap()).unwrap();
        let options = SolverOptions::offline(points.len(), 1.0);
        let fit = fit_dcd(&points, params, None, &options, &mut rng).unwrap();
        assert!(fit.converged);
        let viol = kkt_violation(&points, &fit.dual.alphas, &fit.model).unwrap();
        assert!(viol <= options.tolerance, "violation {viol}");
        let obj = dual_objective(&fit.model, &fit.dual.alphas);
        assert!((obj - fit.dual.objective).abs() < 1e-12);
    }
}

#[test]
fn dcd_objective_never_exceeds_reference_by_much() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..40 {
        let points = common::random_problem(&mut rng, 6, 2);
        let params = SvmParams::new(1.0, ClassWeights::EQUAL).unwrap();
        let upper = vec![1.0; points.len()];
        let reference = common::projected_gradient_reference(&points, &upper, 1e-10, 2_000_000);
        let ref_obj = common::dense_objective(&common::gram(&points), &reference);
        let options = SolverOptions {
            max_epochs: 100_000,
            tolerance: 1e-12,
        };
        let fit = fit_dcd(&points, params, None, &options, &mut rng).unwrap();
        assert!((fit.dual.objective - ref_obj).abs() < 1e-8, "{} vs {ref_obj}", fit.dual.objective);
    }
}

#[test]
fn dual_objective_agrees_with_dense_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let points = common::random_problem(&mut rng, 8, 3);
        let params = SvmParams::new(1.0, ClassWeights::EQUAL).unwrap();
        let fit = fit_dcd(&points, params, None, &SolverOptions::offline(points.len(), 1.0), &mut rng).unwrap();
        let dense = common::dense_objective(&common::gram(&points), &fit.dual.alphas);
        assert!((dense - dual_objective(&fit.model, &fit.dual.alphas)).abs() < 1e-9);
    }
}
