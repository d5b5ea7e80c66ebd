use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{ln1p_exp, ln_expm1, MAX_GRID_POINTS};
use crate::error::{PathError, Result};
use crate::linalg::scaled_weights;
use crate::loss::SmoothnessProfile;
use crate::path::RegularizedObjective;
use crate::trace::{Method, PathIterate, PathTrace, TerminationReason};
use crate::Vector;

pub const C2: f64 = 442.0;

/// How the Newton step sizes are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// Full rule including the β-dependent guards that certify the bound.
    Certified,
    /// Drops the β-dependent guards; steps are limited only by `α_max`,
    /// doubling, and the `‖θ_k‖` growth term.
    Practical,
}

/// Step-size schedule for the Newton homotopy.
#[derive(Debug, Clone)]
pub struct NewtonSchedule {
    pub alpha_max: f64,
    pub epsilon: f64,
    pub t_max: f64,
    pub profile: SmoothnessProfile,
    /// `‖∇L(0)‖`.
    pub grad0_norm: f64,
    pub rule: StepRule,
    /// Replaces the computed first step when set.
    pub alpha1_override: Option<f64>,
}

impl NewtonSchedule {
    /// Certified schedule with `α_max = 0.1`.
    pub fn new(obj: &RegularizedObjective<'_>, epsilon: f64, t_max: f64) -> Result<Self> {
        let profile = obj.loss.profile()?;
        let grad0_norm = obj.loss.gradient(&Vector::zeros(obj.dim()))?.norm();
        Self::from_profile(profile, grad0_norm, epsilon, t_max)
    }

    pub fn from_profile(profile: SmoothnessProfile, grad0_norm: f64, epsilon: f64, t_max: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(PathError::Argument(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(t_max > 0.0) {
            return Err(PathError::Argument(format!("t_max must be positive, got {t_max}")));
        }
        profile.validate()?;
        Ok(Self {
            alpha_max: 0.1,
            epsilon,
            t_max,
            profile,
            grad0_norm,
            rule: StepRule::Certified,
            alpha1_override: None,
        })
    }

    pub fn with_alpha_max(mut self, alpha_max: f64) -> Result<Self> {
        if !(alpha_max > 0.0 && alpha_max <= 0.1) {
            return Err(PathError::Argument(format!("alpha_max must lie in (0, 0.1], got {alpha_max}")));
        }
        self.alpha_max = alpha_max;
        Ok(self)
    }

    pub fn with_rule(mut self, rule: StepRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_alpha1(mut self, alpha1: f64) -> Result<Self> {
        if !(alpha1 > 0.0 && alpha1 <= self.alpha_max) {
            return Err(PathError::Argument(format!(
                "alpha1 override must lie in (0, alpha_max = {}], got {alpha1}",
                self.alpha_max
            )));
        }
        self.alpha1_override = Some(alpha1);
        Ok(self)
    }

    /// `C₁` evaluated at a given first step.
    pub fn c1(&self, alpha1: f64) -> f64 {
        let g1 = self.profile.gamma1;
        if g1 <= 1.0 {
            return 15.0;
        }
        let nu = self.profile.nu;
        let a = nu.powf(g1 - 1.0);
        let b = nu.powf(g1) * (-alpha1).exp() * (-(-alpha1).exp_m1());
        15.0 * a.min(b)
    }

    /// Stopping threshold `(e^{α₁} - 1)² ‖∇L(0)‖²`.
    pub fn norm_threshold(&self) -> f64 {
        let a = newton_alpha1(self).exp_m1();
        a * a * self.grad0_norm * self.grad0_norm
    }
}

/// First step size.
///
/// Takes the upper bound with equality. When `γ₁ > 1` the constant `C₁`
/// depends on `α₁`; it is first evaluated at `α_max` and then once more at
/// the resulting `α₁`.
pub fn newton_alpha1(sched: &NewtonSchedule) -> f64 {
    if let Some(a) = sched.alpha1_override {
        return a;
    }
    let g0 = sched.grad0_norm;
    let base = sched.alpha_max.min((sched.epsilon.sqrt() / g0).ln_1p());
    if sched.rule == StepRule::Practical {
        return base;
    }
    let p = &sched.profile;
    let expo = (2.0 - p.gamma1).min(1.0 - p.gamma2 / 2.0);
    let guard = |c1: f64| {
        let c = c1.max(2f64.sqrt() * C2);
        // ln(1 + (c β g0)^{-expo})
        ln1p_exp(-expo * (c.ln() + p.beta.ln() + g0.ln()))
    };
    let first = base.min(guard(sched.c1(sched.alpha_max)));
    base.min(guard(sched.c1(first)))
}

/// Next step size from the state at grid point `k`.
pub fn newton_alpha_next(sched: &NewtonSchedule, state: &PathIterate) -> f64 {
    let doubling = sched.alpha_max.min(2.0 * state.alpha);
    let th = state.theta.norm();
    if th == 0.0 {
        return doubling;
    }
    let t = state.t;
    let alpha1 = newton_alpha1(sched);
    let growth = ln1p_exp(
        t / 2.0 + alpha1.exp_m1().ln() + sched.grad0_norm.ln() + (-(-t).exp_m1()).ln() - th.ln(),
    );
    let mut next = doubling.min(growth);
    if sched.rule == StepRule::Certified {
        let p = &sched.profile;
        let lem = ln_expm1(t);
        let log_max = (-p.gamma1 * lem).max((-1.0 - p.gamma2 / 2.0) * lem);
        let log_term = C2.ln() + p.beta.ln() + t + log_max + th.ln();
        next = next.min(ln1p_exp(-log_term));
    }
    next
}

/// Stopping rule evaluated at the newest grid point.
pub fn newton_should_stop(sched: &NewtonSchedule, state: &PathIterate) -> bool {
    if state.t > sched.t_max {
        return true;
    }
    2.0 * state.theta.norm_squared() / state.t.exp_m1() <= sched.norm_threshold()
}

/// One warm-started Newton step on `f_{t_next}` from `θ_k`.
pub fn newton_step(obj: &RegularizedObjective<'_>, theta_k: &Vector, t_next: f64) -> Result<Vector> {
    if !(t_next > 0.0) {
        return Err(PathError::Argument(format!("t_next must be positive, got {t_next}")));
    }
    let (g, h) = obj.loss.derivatives(theta_k)?;
    newton_step_with(obj, theta_k, t_next, &g, &h)
}

fn newton_step_with(
    obj: &RegularizedObjective<'_>,
    theta_k: &Vector,
    t_next: f64,
    grad: &Vector,
    hess: &crate::Matrix,
) -> Result<Vector> {
    let (a, b) = scaled_weights(t_next);
    let rhs = grad * a + theta_k * b;
    Ok(theta_k - obj.solve_system(t_next, hess, &rhs)?)
}

/// The same update written through the scaled gradient `g_k` at `t_k`.
pub fn newton_step_grad_form(
    obj: &RegularizedObjective<'_>,
    theta_k: &Vector,
    t_k: f64,
    alpha: f64,
) -> Result<Vector> {
    let (g, h) = obj.loss.derivatives(theta_k)?;
    let (ak, bk) = scaled_weights(t_k);
    let g_k = &g * ak + theta_k * bk;
    let (aa, ba) = scaled_weights(alpha);
    let rhs = &g * aa + g_k * ba;
    Ok(theta_k - obj.solve_system(t_k + alpha, &h, &rhs)?)
}

/// Runs the Newton homotopy from `θ(0) = 0` until the schedule stops.
///
/// Returns an empty trace when `∇L(0) = 0`, since the path is then identically
/// zero. Every proposed step is checked against `α_{k+1} ≥ α_k / 2` and
/// `α_k < ln 2`.
pub fn run_newton_path(obj: &RegularizedObjective<'_>, sched: &NewtonSchedule) -> Result<PathTrace> {
    let start = Instant::now();
    let p = obj.dim();
    let mut trace = PathTrace {
        method: Method::Newton,
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
    let mut theta = Vector::zeros(p);
    let mut t = 0.0;
    let mut alpha = newton_alpha1(sched);
    let (mut grad, mut hess) = obj.loss.derivatives(&theta)?;
    for k in 1..=MAX_GRID_POINTS {
        check_alpha(k, alpha, None, sched.alpha_max)?;
        let t_next = t + alpha;
        theta = newton_step_with(obj, &theta, t_next, &grad, &hess)?;
        t = t_next;
        trace.linear_solves += 1;
        (grad, hess) = obj.loss.derivatives(&theta)?;
        let (a, b) = scaled_weights(t);
        let g_norm = (&grad * a + &theta * b).norm();
        let state = PathIterate { k, t, alpha, theta: theta.clone(), g_norm, inner_steps: 1 };
        let stop = newton_should_stop(sched, &state);
        let next = newton_alpha_next(sched, &state);
        trace.iterates.push(state);
        trace.total_inner_steps += 1;
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

pub(super) fn check_alpha(k: usize, alpha: f64, prev: Option<f64>, upper: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha > upper {
        return Err(PathError::ScheduleInvariant { k, detail: format!("step {alpha} is not in (0, {upper}]") });
    }
    if let Some(prev) = prev {
        if alpha < 0.5 * prev * (1.0 - 1e-12) {
            return Err(PathError::ScheduleInvariant {
                k,
                detail: format!("step {alpha} is less than half of the previous step {prev}"),
            });
        }
    }
    Ok(())
}
