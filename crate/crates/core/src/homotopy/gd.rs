use std::time::Instant;

use super::newton::check_alpha;
use super::{ln1p_exp, MAX_GRID_POINTS};
use crate::error::{PathError, Result};
use crate::path::RegularizedObjective;
use crate::trace::{Method, PathIterate, PathTrace, TerminationReason};
use crate::Vector;

/// Step-size schedule and inner-loop settings for the gradient-descent homotopy.
#[derive(Debug, Clone)]
pub struct GdSchedule {
    pub alpha_max: f64,
    pub epsilon: f64,
    pub t_max: f64,
    /// Constant in the inner stopping rule.
    pub c0: f64,
    pub shrink: f64,
    pub armijo: f64,
    pub initial_eta: f64,
    pub inner_cap: u64,
    pub grad0_norm: f64,
    pub alpha1_override: Option<f64>,
}

impl GdSchedule {
    /// Refuses losses without a finite gradient Lipschitz constant.
    pub fn new(obj: &RegularizedObjective<'_>, epsilon: f64, t_max: f64) -> Result<Self> {
        let profile = obj.loss.profile()?;
        if !profile.grad_lipschitz.is_finite() {
            return Err(PathError::Unsupported(format!(
                "{} has no global gradient Lipschitz constant; use a second-order method",
                obj.loss.name()
            )));
        }
        let grad0_norm = obj.loss.gradient(&Vector::zeros(obj.dim()))?.norm();
        Self::from_grad0(grad0_norm, epsilon, t_max)
    }

    pub fn from_grad0(grad0_norm: f64, epsilon: f64, t_max: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(PathError::Argument(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(t_max > 0.0) {
            return Err(PathError::Argument(format!("t_max must be positive, got {t_max}")));
        }
        Ok(Self {
            alpha_max: 2f64.ln(),
            epsilon,
            t_max,
            c0: 12.0,
            shrink: 0.5,
            armijo: 1e-4,
            initial_eta: 1.0,
            inner_cap: 1_000_000,
            grad0_norm,
            alpha1_override: None,
        })
    }

    pub fn with_alpha1(mut self, alpha1: f64) -> Result<Self> {
        if !(alpha1 > 0.0 && alpha1 < self.alpha_max) {
            return Err(PathError::Argument(format!("alpha1 override must lie in (0, ln 2), got {alpha1}")));
        }
        self.alpha1_override = Some(alpha1);
        Ok(self)
    }
}

pub fn gd_alpha1(sched: &GdSchedule) -> f64 {
    if let Some(a) = sched.alpha1_override {
        return a;
    }
    sched.alpha_max.min((sched.epsilon.sqrt() / sched.grad0_norm).ln_1p())
}

pub fn gd_alpha_next(sched: &GdSchedule, state: &PathIterate) -> f64 {
    let doubling = sched.alpha_max.min(2.0 * state.alpha);
    let th = state.theta.norm();
    if th == 0.0 {
        return doubling;
    }
    let t = state.t;
    let growth = ln1p_exp(0.5 * sched.epsilon.ln() + t / 2.0 + (-(-t).exp_m1()).ln() - th.ln());
    doubling.min(growth)
}

pub fn gd_should_stop(sched: &GdSchedule, state: &PathIterate) -> bool {
    if state.t > sched.t_max {
        return true;
    }
    2.0 * state.theta.norm_squared() / state.t.exp_m1() <= sched.epsilon
}

/// Backtracking gradient descent on `f_t` until
/// `‖∇f_t(θ)‖ ≤ (e^α - 1) ‖θ‖ / (C₀ (e^t - 1))`.
///
/// Returns the final point, the number of gradient steps taken, and the final
/// gradient norm.
pub fn gd_inner(
    obj: &RegularizedObjective<'_>,
    t: f64,
    theta_init: &Vector,
    alpha: f64,
    sched: &GdSchedule,
) -> Result<(Vector, u64, f64)> {
    if !(t > 0.0 && alpha > 0.0) {
        return Err(PathError::Argument(format!("gd_inner needs t > 0 and alpha > 0, got t={t}, alpha={alpha}")));
    }
    let factor = alpha.exp_m1() / (sched.c0 * t.exp_m1());
    let mut theta = theta_init.clone();
    let mut f = obj.f_value(t, &theta)?;
    let mut steps = 0u64;
    loop {
        let g = obj.f_grad(t, &theta)?;
        let gn = g.norm();
        if gn <= factor * theta.norm() {
            return Ok((theta, steps, gn));
        }
        if steps >= sched.inner_cap {
            return Err(PathError::Convergence { what: "gradient inner loop", iterations: steps as usize, residual: gn });
        }
        let gg = gn * gn;
        let mut eta = sched.initial_eta;
        let mut accepted = false;
        for _ in 0..80 {
            let cand = &theta - &g * eta;
            if obj.loss.contains(&cand) {
                let fc = obj.f_value(t, &cand)?;
                if fc <= f - sched.armijo * eta * gg + 1e-14 * f.abs() {
                    theta = cand;
                    f = fc;
                    accepted = true;
                    break;
                }
            }
            eta *= sched.shrink;
        }
        if !accepted {
            return Err(PathError::Convergence { what: "gradient backtracking", iterations: 80, residual: gn });
        }
        steps += 1;
    }
}

/// Plain gradient descent on `f_t` with a fixed step; returns every iterate.
pub fn gradient_steps_fixed(
    obj: &RegularizedObjective<'_>,
    t: f64,
    theta_init: &Vector,
    eta: f64,
    steps: usize,
) -> Result<Vec<Vector>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut theta = theta_init.clone();
    out.push(theta.clone());
    for _ in 0..steps {
        theta -= obj.f_grad(t, &theta)? * eta;
        out.push(theta.clone());
    }
    Ok(out)
}

/// Runs the gradient-descent homotopy from `θ(0) = 0`.
pub fn run_gd_path(obj: &RegularizedObjective<'_>, sched: &GdSchedule) -> Result<PathTrace> {
    let start = Instant::now();
    let mut trace = PathTrace {
        method: Method::Gd,
        iterates: Vec::new(),
        termination: TerminationReason::NormCriterion,
        total_inner_steps: 0,
        linear_solves: 0,
        wall_time: 0.0,
        next_alpha: None,
        t_max: sched.t_max,
    };
    if sched.grad0_norm == 0.0 {
        trace.wall_time = start.elapsed().as_secs_f64();
        return Ok(trace);
    }
    let mut theta = Vector::zeros(obj.dim());
    let mut t = 0.0;
    let mut alpha = gd_alpha1(sched);
    for k in 1..=MAX_GRID_POINTS {
        check_alpha(k, alpha, None, sched.alpha_max)?;
        t += alpha;
        let (th, steps, g_norm) = gd_inner(obj, t, &theta, alpha, sched)?;
        theta = th;
        trace.total_inner_steps += steps;
        let state = PathIterate { k, t, alpha, theta: theta.clone(), g_norm, inner_steps: steps };
        let stop = gd_should_stop(sched, &state);
        let next = gd_alpha_next(sched, &state);
        trace.iterates.push(state);
        if stop {
            trace.termination =
                if t > sched.t_max { TerminationReason::TExceeded } else { TerminationReason::NormCriterion };
            trace.next_alpha = Some(next);
            trace.wall_time = start.elapsed().as_secs_f64();
            return Ok(trace);
        }
        check_alpha(k + 1, next, Some(alpha), sched.alpha_max)?;
        alpha = next;
    }
    Err(PathError::Nontermination { cap: MAX_GRID_POINTS, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{AffineLoss, ScalarFamily};
    use approx::assert_relative_eq;

    #[test]
    fn alpha1_example() {
        let s = GdSchedule::from_grad0(0.5, 1e-4, 10.0).unwrap();
        assert_relative_eq!(gd_alpha1(&s), 1.02f64.ln(), max_relative = 1e-12);
        let big = GdSchedule::from_grad0(0.5, 10.0, 10.0).unwrap();
        assert_relative_eq!(gd_alpha1(&big), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn alpha_next_regimes() {
        let s = GdSchedule::from_grad0(0.5, 1e-4, 10.0).unwrap();
        let mk = |t: f64, alpha: f64, th: f64| PathIterate { k: 2, t, alpha, theta: Vector::from_element(1, th), g_norm: 0.0, inner_steps: 0 };
        assert_eq!(gd_alpha_next(&s, &mk(0.01, 0.01, 1e-8)), 0.02);
        let st = mk(2.0, 0.3, 50.0);
        let expected = (0.01 * 1f64.exp() * (1.0 - (-2f64).exp()) / 50.0).ln_1p();
        assert_relative_eq!(gd_alpha_next(&s, &st), expected, max_relative = 1e-12);
        assert_eq!(gd_alpha_next(&s, &mk(0.01, 0.01, 0.0)), 0.02);
    }

    #[test]
    fn stopping_rule() {
        let s = GdSchedule::from_grad0(0.5, 1e-4, 10.0).unwrap();
        let mk = |t: f64, th: f64| PathIterate { k: 1, t, alpha: 0.1, theta: Vector::from_element(1, th), g_norm: 0.0, inner_steps: 0 };
        assert!(gd_should_stop(&s, &mk(10.5, 1.0)));
        assert!(!gd_should_stop(&s, &mk(0.02, 0.01)));
        assert!(gd_should_stop(&s, &mk(20.0, 1.0)));
    }

    #[test]
    fn inner_zero_steps_when_already_accurate() {
        let loss = AffineLoss::shifted_square(1.0);
        let obj = RegularizedObjective::new(&loss);
        let s = GdSchedule::new(&obj, 1e-4, 5.0).unwrap();
        let exact = obj.solve_exact(1.0, 1e-14, None).unwrap();
        let (th, steps, _) = gd_inner(&obj, 1.0, &exact.theta, 0.1, &s).unwrap();
        assert_eq!(steps, 0);
        assert_eq!(th, exact.theta);
    }

    #[test]
    fn fixed_step_contraction_on_quadratic() {
        // f_t(θ) = a (θ-1)² + (b/2) θ², curvature 2a + b.
        let loss = AffineLoss::shifted_square(1.0);
        let obj = RegularizedObjective::new(&loss);
        let t = 1.0;
        let (a, b) = crate::linalg::scaled_weights(t);
        let curv = 2.0 * a + b;
        let eta = 0.5 / curv;
        let opt = obj.solve_exact(t, 1e-14, None).unwrap().theta[0];
        let its = gradient_steps_fixed(&obj, t, &Vector::zeros(1), eta, 10).unwrap();
        let predicted = 1.0 - eta * 2.0 * curv * curv / (curv + curv);
        for w in its.windows(2) {
            let ratio = (w[1][0] - opt).abs() / (w[0][0] - opt).abs();
            assert_relative_eq!(ratio, predicted, max_relative = 0.05);
        }
    }

    #[test]
    fn refuses_losses_without_lipschitz_gradient() {
        let loss = AffineLoss::composed(ScalarFamily::Exponential, Vector::from_element(1, 1.0), 0.0);
        let obj = RegularizedObjective::new(&loss);
        assert!(matches!(GdSchedule::new(&obj, 1e-3, 5.0), Err(PathError::Unsupported(_))));
    }

    #[test]
    fn quadratic_run_finishes() {
        let loss = AffineLoss::shifted_square(1.0);
        let obj = RegularizedObjective::new(&loss);
        let s = GdSchedule::new(&obj, 1e-4, 5.0).unwrap();
        let trace = run_gd_path(&obj, &s).unwrap();
        assert!(trace.total_inner_steps > 0);
        for it in &trace.iterates {
            let bound = it.alpha.exp_m1() * it.theta.norm() / (12.0 * it.t.exp_m1());
            assert!(it.g_norm <= bound);
        }
        let empty = AffineLoss::shifted_square(0.0);
        let obj0 = RegularizedObjective::new(&empty);
        let s0 = GdSchedule::new(&obj0, 1e-4, 5.0).unwrap();
        assert!(run_gd_path(&obj0, &s0).unwrap().is_empty());
    }
}
