use serde::Serialize;

use crate::error::Result;
use crate::homotopy::{gd_alpha1, newton_alpha1, GdSchedule, NewtonSchedule};
use crate::path::RegularizedObjective;
use crate::trace::{PathTrace, TerminationReason};

/// `e^{-t_k} ((e^{α_{k+1}} - 1) / (1 - e^{-t_k}))² ‖θ_k‖²` for every grid point
/// that has a successor step, the last one using `trace.next_alpha`.
fn interpolation_terms(trace: &PathTrace) -> Vec<f64> {
    let n = trace.len();
    (0..n)
        .filter_map(|i| {
            let it = &trace.iterates[i];
            let next = if i + 1 < n { Some(trace.iterates[i + 1].alpha) } else { trace.next_alpha }?;
            let ratio = next.exp_m1() / (-(-it.t).exp_m1());
            Some((-it.t).exp() * ratio * ratio * it.theta.norm_squared())
        })
        .collect()
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().cloned().fold(0.0, f64::max)
}

/// `‖θ(t)‖` from a reference solve (at most at the reference cap).
pub fn reference_norm_at(obj: &RegularizedObjective<'_>, t: f64, ref_tol: f64) -> Result<f64> {
    Ok(obj.solve_exact(t, ref_tol, None)?.theta.norm())
}

/// Right-hand side of the global Newton path bound.
///
/// When the run stopped by passing `t_max` the bound is
/// `8 max{(e^{α₁}-1)²‖∇L(0)‖², max_{k≤N} term_k}`. When it stopped early by
/// the norm rule the last term is replaced by
/// `2 max(‖θ(t_max)‖², ‖θ_N‖²) / (e^{t_N} - 1)`, which needs
/// `theta_tmax_norm`; without it the result is `None`.
pub fn newton_bound_rhs(trace: &PathTrace, sched: &NewtonSchedule, theta_tmax_norm: Option<f64>) -> Option<f64> {
    let g0 = sched.grad0_norm;
    let a1 = newton_alpha1(sched).exp_m1();
    let first = a1 * a1 * g0 * g0;
    if trace.is_empty() {
        return Some(0.0);
    }
    let terms = interpolation_terms(trace);
    match trace.termination {
        TerminationReason::TExceeded => Some(8.0 * first.max(max_of(&terms))),
        _ => {
            let last = trace.iterates.last().unwrap();
            let tail_norm = theta_tmax_norm?;
            let n = trace.len();
            let middle = max_of(&terms[..terms.len().min(n - 1)]);
            let tail = 2.0 * tail_norm.powi(2).max(last.theta.norm_squared()) / last.t.exp_m1();
            Some((8.0 * first).max(8.0 * middle).max(tail))
        }
    }
}

/// Right-hand side of the global gradient-descent path bound.
///
/// `2 max{(e^{α₁}-1)²‖∇L(0)‖², max_{k≤N-1} term_k}` when `t_N ≥ t_max`, plus
/// the candidate `‖θ(t_max)‖² / (e^{t_N} - 1)` inside the maximum otherwise.
pub fn gd_bound_rhs(trace: &PathTrace, sched: &GdSchedule, theta_tmax_norm: Option<f64>) -> Option<f64> {
    let g0 = sched.grad0_norm;
    let a1 = gd_alpha1(sched).exp_m1();
    let first = a1 * a1 * g0 * g0;
    if trace.is_empty() {
        return Some(0.0);
    }
    let n = trace.len();
    let terms = interpolation_terms(trace);
    let middle = max_of(&terms[..terms.len().min(n - 1)]);
    let last = trace.iterates.last().unwrap();
    if last.t >= sched.t_max {
        Some(2.0 * first.max(middle))
    } else {
        let tail = theta_tmax_norm?.powi(2) / last.t.exp_m1();
        Some(2.0 * first.max(middle).max(tail))
    }
}

/// Gradient steps that guarantee the inner accuracy needed at `t_{k+1}` for a
/// loss with constants `(m, L)` and step `η`:
///
/// `(ln 24 + max(0, ln(L_{k+1}/m_k))) / -ln(1 - 2 m_{k+1} L_{k+1} η / (m_{k+1} + L_{k+1}))`
/// with `m_k = m(1-e^{-t_k}) + e^{-t_k}` and `L_k` likewise.
pub fn gd_inner_steps_required(m: f64, l: f64, t_k: f64, t_next: f64, eta: f64) -> f64 {
    let scale = |c: f64, t: f64| c * (-(-t).exp_m1()) + (-t).exp();
    let m_k = scale(m, t_k);
    let m_n = scale(m, t_next);
    let l_n = scale(l, t_next);
    let num = 24f64.ln() + (l_n / m_k).ln().max(0.0);
    let rate = 2.0 * m_n * l_n * eta / (m_n + l_n);
    num / -(-rate).ln_1p()
}

/// Per-grid-point checks of the Newton gradient-norm bound and of the
/// `‖θ_k‖ / ‖θ(t_k)‖ ∈ [1/1.2, 1/0.8]` sandwich.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GradBoundReport {
    pub checked: usize,
    pub grad_violations: usize,
    pub sandwich_violations: usize,
    /// Grid points where the strong-convexity interval was inconclusive and a
    /// reference solve was needed.
    pub reference_solves: usize,
}

/// Checks `‖g_k‖ ≤ ‖θ(t_k)‖ (1 - e^{-α_k}) / (2(e^{t_k} - 1))` with relative
/// slack `rel_slack` at every grid point.
///
/// `f_t` is `e^{-t}`-strongly convex, so `‖θ_k - θ(t_k)‖ ≤ e^{t_k}‖g_k‖` and
/// `‖θ(t_k)‖` lies in `‖θ_k‖ ± e^{t_k}‖g_k‖`. A reference solve is only run
/// when that interval does not settle a check.
pub fn grad_norm_bound_check(
    obj: &RegularizedObjective<'_>,
    trace: &PathTrace,
    ref_tol: f64,
    rel_slack: f64,
) -> Result<GradBoundReport> {
    let mut rep = GradBoundReport::default();
    for it in &trace.iterates {
        rep.checked += 1;
        let coef = -(-it.alpha).exp_m1() / (2.0 * it.t.exp_m1());
        let th = it.theta.norm();
        let radius = it.t.exp() * it.g_norm;
        let (lo, hi) = ((th - radius).max(0.0), th + radius);
        let grad_ok = it.g_norm <= lo * coef * (1.0 + rel_slack);
        let sandwich_ok = lo > 0.0 && th / hi >= 1.0 / 1.2 && th / lo <= 1.0 / 0.8;
        if grad_ok && sandwich_ok {
            continue;
        }
        rep.reference_solves += 1;
        let exact = obj.solve_exact(it.t, ref_tol, Some(&it.theta))?.theta.norm();
        if it.g_norm > exact * coef * (1.0 + rel_slack) {
            rep.grad_violations += 1;
        }
        let ratio = th / exact;
        if !(ratio >= 1.0 / 1.2 - rel_slack && ratio <= 1.0 / 0.8 + rel_slack) {
            rep.sandwich_violations += 1;
        }
    }
    Ok(rep)
}

/// Counts consecutive grid pairs where the optimization error exceeds `slack`
/// times the interpolation error:
///
/// `e^{t_{k+1}} max{((1-e^{-t_{k+1}})/(1-e^{-t_k}))² ‖g_k‖², ‖g_{k+1}‖²}` versus
/// `(e^{-t_k} - e^{-t_{k+1}})² max{e^{t_{k+1}}‖θ_k‖²/(1-e^{-t_k})², e^{t_k}‖θ_{k+1}‖²/(1-e^{-t_{k+1}})²}`.
pub fn newton_comparability_violations(trace: &PathTrace, slack: f64) -> usize {
    trace
        .iterates
        .windows(2)
        .filter(|w| {
            let (a, b) = (&w[0], &w[1]);
            let one_a = -(-a.t).exp_m1();
            let one_b = -(-b.t).exp_m1();
            let r = one_b / one_a;
            let lhs = b.t.exp() * (r * r * a.g_norm * a.g_norm).max(b.g_norm * b.g_norm);
            let d = (-a.t).exp() - (-b.t).exp();
            let rhs = d * d
                * (b.t.exp() * a.theta.norm_squared() / (one_a * one_a))
                    .max(a.t.exp() * b.theta.norm_squared() / (one_b * one_b));
            lhs > slack * rhs
        })
        .count()
}
