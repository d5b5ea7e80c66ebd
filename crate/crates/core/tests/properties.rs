use approx::assert_relative_eq;
use proptest::prelude::*;

use pathfollow::approx::ApproxPath;
use pathfollow::experiments::{gen_nonseparable, gen_regression};
use pathfollow::homotopy::{newton_step, newton_step_grad_form, run_newton_path, NewtonSchedule, StepRule};
use pathfollow::linalg::scaled_weights;
use pathfollow::loss::{AffineLoss, Dataset, LossModel, ScalarFamily};
use pathfollow::ode::rosset_grid;
use pathfollow::path::RegularizedObjective;
use pathfollow::{Matrix, Vector};

fn logistic(n: usize, p: usize, seed: u64) -> AffineLoss {
    AffineLoss::logistic(&gen_nonseparable(n, p, seed).unwrap().0).unwrap()
}

fn ridge(n: usize, p: usize, seed: u64) -> AffineLoss {
    AffineLoss::squared_error(&gen_regression(n, p, 0.5, seed).unwrap().0).unwrap()
}

fn vec_strategy(p: usize, scale: f64) -> impl Strategy<Value = Vector> {
    proptest::collection::vec(-scale..scale, p).prop_map(Vector::from_vec)
}

fn central_grad(loss: &dyn LossModel, x: &Vector, h: f64) -> Vector {
    Vector::from_fn(x.len(), |j, _| {
        let mut a = x.clone();
        let mut b = x.clone();
        a[j] += h;
        b[j] -= h;
        (loss.value(&a).unwrap() - loss.value(&b).unwrap()) / (2.0 * h)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradients_match_differences(seed in 0u64..1000, x in vec_strategy(4, 3.0)) {
        for loss in [logistic(30, 4, seed), ridge(30, 4, seed)] {
            let g = loss.gradient(&x).unwrap();
            let fd = central_grad(&loss, &x, 1e-5);
            prop_assert!((&g - &fd).norm() <= 1e-6 * g.norm().max(1.0));
        }
    }

    #[test]
    fn barrier_gradients_match_differences(z in 0.05f64..20.0) {
        for f in [ScalarFamily::LogBarrier, ScalarFamily::EntropyBarrier, ScalarFamily::Exponential] {
            let loss = AffineLoss::scalar(f);
            let x = Vector::from_element(1, z);
            let h = 1e-4 * z;
            let fd = central_grad(&loss, &x, h)[0];
            let g = loss.gradient(&x).unwrap()[0];
            prop_assert!((fd - g).abs() <= 1e-5 * g.abs().max(1.0), "{f:?} at {z}: {fd} vs {g}");
        }
    }

    #[test]
    fn scaled_objective_is_strongly_convex(
        seed in 0u64..500,
        t in 0.01f64..8.0,
        a in vec_strategy(3, 2.0),
        b in vec_strategy(3, 2.0),
    ) {
        let loss = logistic(25, 3, seed);
        let obj = RegularizedObjective::new(&loss);
        let fa = obj.f_value(t, &a).unwrap();
        let fb = obj.f_value(t, &b).unwrap();
        let ga = obj.f_grad(t, &a).unwrap();
        let d = &b - &a;
        let lower = fa + ga.dot(&d) + 0.5 * (-t).exp() * d.norm_squared();
        prop_assert!(fb >= lower - 1e-12 * fb.abs().max(1.0));
    }

    #[test]
    fn scaled_weights_sum_to_one(t in 0.0f64..700.0) {
        let (a, b) = scaled_weights(t);
        prop_assert!((a + b - 1.0).abs() <= 1e-15);
        prop_assert!(a >= 0.0 && b > 0.0);
    }

    #[test]
    fn newton_update_forms_agree(seed in 0u64..500, t_k in 0.05f64..6.0, alpha in 1e-4f64..0.5, x in vec_strategy(3, 1.0)) {
        let loss = logistic(30, 3, seed);
        let obj = RegularizedObjective::new(&loss);
        let direct = newton_step(&obj, &x, t_k + alpha).unwrap();
        let via_g = newton_step_grad_form(&obj, &x, t_k, alpha).unwrap();
        prop_assert!((&direct - &via_g).norm() <= 1e-10 * direct.norm().max(1.0));
    }

    #[test]
    fn interpolation_stays_on_segments(
        knots in proptest::collection::vec((0.01f64..1.0, -5.0f64..5.0, -5.0f64..5.0), 1..8),
        u in 0.0f64..1.0,
    ) {
        let mut t = 0.0;
        let grid: Vec<(f64, Vector)> = knots
            .iter()
            .map(|&(dt, a, b)| {
                t += dt;
                (t, Vector::from_vec(vec![a, b]))
            })
            .collect();
        let last = grid.last().unwrap().clone();
        let path = ApproxPath::new(grid.clone(), 2, last.0 + 1.0).unwrap();
        for (tk, th) in &grid {
            prop_assert!((path.eval(*tk).unwrap() - th).norm() <= 1e-12 * th.norm().max(1.0));
        }
        // Inside a segment the value is the convex combination of its ends.
        let mut prev = (0.0, Vector::zeros(2));
        for (tk, th) in &grid {
            let s = prev.0 + u * (tk - prev.0);
            let expected = &prev.1 * (1.0 - u) + th * u;
            prop_assert!((path.eval(s).unwrap() - expected).norm() <= 1e-9 * (1.0 + th.norm() + prev.1.norm()));
            prev = (*tk, th.clone());
        }
        prop_assert_eq!(path.eval(last.0 + 0.5).unwrap(), last.1.clone());
        prop_assert!(path.eval(last.0 + 2.0).is_err());
    }

    #[test]
    fn exact_solutions_ignore_the_start(seed in 0u64..200, t in 0.1f64..8.0, x in vec_strategy(4, 2.0)) {
        let loss = logistic(40, 4, seed);
        let obj = RegularizedObjective::new(&loss);
        let cold = obj.solve_exact(t, 1e-10, None).unwrap();
        let warm = obj.solve_exact(t, 1e-10, Some(&x)).unwrap();
        // Both are within e^t·tol of θ(t) by strong convexity.
        prop_assert!((&cold.theta - &warm.theta).norm() <= 2.0 * t.exp() * 1e-10 + 1e-12);
        // Optimality: (e^t - 1)∇L(θ) + θ = 0, up to the stopping tolerance.
        let r = loss.gradient(&cold.theta).unwrap() * t.exp_m1() + &cold.theta;
        prop_assert!(r.norm() <= t.exp() * 1e-10 * 1.0001);
    }

    #[test]
    fn rosset_grid_is_monotone_and_spaced_in_penalty(n in 2usize..60, t_min in 0.01f64..1.0, span in 0.5f64..15.0) {
        let t_max = t_min + span;
        let g = rosset_grid(n, t_min, t_max).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], t_min);
        prop_assert_eq!(g[n - 1], t_max);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
        let pen: Vec<f64> = g.iter().map(|t| 1.0 / t.exp_m1()).collect();
        let step = (pen[0] - pen[n - 1]) / (n - 1) as f64;
        for w in pen.windows(2) {
            prop_assert!(((w[0] - w[1]) - step).abs() <= 1e-9 * pen[0]);
        }
    }

    #[test]
    fn newton_steps_never_shrink_by_more_than_half(seed in 0u64..100, eps in 1e-6f64..1e-1) {
        let loss = logistic(40, 3, seed);
        let obj = RegularizedObjective::new(&loss);
        let s = NewtonSchedule::new(&obj, eps, 6.0).unwrap().with_rule(StepRule::Practical);
        let trace = run_newton_path(&obj, &s).unwrap();
        for w in trace.iterates.windows(2) {
            prop_assert!(w[1].alpha >= 0.5 * w[0].alpha * (1.0 - 1e-12));
            prop_assert!(w[1].alpha <= s.alpha_max);
        }
        prop_assert!(trace.iterates.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn dataset_csv_round_trips(rows in proptest::collection::vec((any::<bool>(), -1e6f64..1e6, -1e-6f64..1e-6), 1..20)) {
        let n = rows.len();
        let x = Matrix::from_fn(n, 2, |i, j| if j == 0 { rows[i].1 } else { rows[i].2 });
        let y = Vector::from_fn(n, |i, _| if rows[i].0 { 1.0 } else { -1.0 });
        let d = Dataset::new(x, y).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, d);
    }
}

#[test]
fn quadratic_newton_path_is_exact_at_every_grid_point() {
    let loss = ridge(60, 5, 4);
    let obj = RegularizedObjective::new(&loss);
    let s = NewtonSchedule::new(&obj, 1e-4, 8.0).unwrap();
    let trace = run_newton_path(&obj, &s).unwrap();
    for it in &trace.iterates {
        let exact = obj.solve_exact(it.t, 1e-13, None).unwrap();
        assert_relative_eq!(it.theta, exact.theta, epsilon = 1e-10);
    }
}
