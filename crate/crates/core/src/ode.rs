//! Constant-step integrators for `θ'(t) = -[(1-e^{-t})∇²L + e^{-t}I]^{-1}∇L`
//! and the one-step-Newton baseline on an equally spaced penalty grid.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{PathError, Result};
use crate::homotopy::newton_step;
use crate::path::RegularizedObjective;
use crate::trace::{Method, PathIterate, PathTrace, TerminationReason};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OdeMethod {
    Euler,
    Rk2,
}

impl OdeMethod {
    pub fn solves_per_step(self) -> u64 {
        match self {
            OdeMethod::Euler => 1,
            OdeMethod::Rk2 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub alpha: f64,
    pub t_max: f64,
    pub method: OdeMethod,
}

impl OdeConfig {
    pub fn new(method: OdeMethod, alpha: f64, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(PathError::Argument(format!("ODE t_max must be positive and finite, got {t_max}")));
        }
        if !(alpha > 0.0 && alpha <= t_max) {
            return Err(PathError::Argument(format!("ODE step must lie in (0, t_max], got {alpha}")));
        }
        Ok(Self { alpha, t_max, method })
    }

    /// `ceil(t_max / α)`, treating ratios within `1e-9` of an integer as exact.
    pub fn num_steps(&self) -> usize {
        let ratio = self.t_max / self.alpha;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

/// `θ_k + α J(θ_k, t_k)`.
pub fn euler_step(obj: &RegularizedObjective<'_>, t_k: f64, theta_k: &Vector, alpha: f64) -> Result<Vector> {
    Ok(theta_k + obj.ode_rhs(t_k, theta_k)? * alpha)
}

/// Heun's method: averages the slope at `(θ_k, t_k)` and at the Euler
/// predictor `(θ_k + αJ₁, t_k + α)`.
pub fn rk2_step(obj: &RegularizedObjective<'_>, t_k: f64, theta_k: &Vector, alpha: f64) -> Result<Vector> {
    let j1 = obj.ode_rhs(t_k, theta_k)?;
    let pred = theta_k + &j1 * alpha;
    let j2 = obj.ode_rhs(t_k + alpha, &pred)?;
    Ok(theta_k + (j1 + j2) * (0.5 * alpha))
}

/// Integrates from `θ(0) = 0` to `t_max`; the last step is shortened to land
/// exactly on `t_max`.
pub fn run_ode_path(obj: &RegularizedObjective<'_>, config: &OdeConfig) -> Result<PathTrace> {
    let start = Instant::now();
    let n = config.num_steps();
    let mut theta = Vector::zeros(obj.dim());
    let mut t = 0.0;
    let mut iterates = Vec::with_capacity(n);
    for k in 1..=n {
        let h = if k == n { config.t_max - t } else { config.alpha };
        theta = match config.method {
            OdeMethod::Euler => euler_step(obj, t, &theta, h)?,
            OdeMethod::Rk2 => rk2_step(obj, t, &theta, h)?,
        };
        t = if k == n { config.t_max } else { t + h };
        let g_norm = obj.f_grad(t, &theta)?.norm();
        iterates.push(PathIterate { k, t, alpha: h, theta: theta.clone(), g_norm, inner_steps: 1 });
    }
    Ok(PathTrace {
        method: match config.method {
            OdeMethod::Euler => Method::Euler,
            OdeMethod::Rk2 => Method::Rk2,
        },
        iterates,
        termination: TerminationReason::GridEnd,
        total_inner_steps: n as u64,
        linear_solves: n as u64 * config.method.solves_per_step(),
        wall_time: start.elapsed().as_secs_f64(),
        next_alpha: None,
        t_max: config.t_max,
    })
}

/// Grid of `n_steps` values of `t` whose ridge penalties `1/(e^t - 1)` are
/// equally spaced, ordered from the heaviest penalty (`t_min`) to the lightest
/// (`t_max`).
pub fn rosset_grid(n_steps: usize, t_min: f64, t_max: f64) -> Result<Vec<f64>> {
    if n_steps < 2 {
        return Err(PathError::Argument("rosset grid needs at least 2 points".into()));
    }
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return Err(PathError::Argument(format!("rosset grid needs 0 < t_min < t_max < inf, got {t_min}, {t_max}")));
    }
    let hi = 1.0 / t_min.exp_m1();
    let lo = 1.0 / t_max.exp_m1();
    let m = (n_steps - 1) as f64;
    let mut grid: Vec<f64> = (0..n_steps)
        .map(|j| {
            let rho = hi - (hi - lo) * j as f64 / m;
            (1.0 / rho).ln_1p()
        })
        .collect();
    grid[0] = t_min;
    grid[n_steps - 1] = t_max;
    Ok(grid)
}

/// One Newton step per point of [`rosset_grid`], starting from an exact
/// solution at `t_max` and moving toward heavier penalties.
///
/// The starting solve is not counted in `linear_solves`. Iterates are stored
/// in increasing `t`, each `alpha` being the gap to the previous grid point.
pub fn rosset_path(
    obj: &RegularizedObjective<'_>,
    n_steps: usize,
    t_min: f64,
    t_max: f64,
    ref_tol: f64,
) -> Result<PathTrace> {
    let start = Instant::now();
    let grid = rosset_grid(n_steps, t_min, t_max)?;
    let first = obj.solve_exact(t_max, ref_tol, None)?;
    let mut theta = first.theta;
    let mut backward = Vec::with_capacity(n_steps);
    backward.push((t_max, theta.clone(), first.grad_norm));
    for &t in grid.iter().rev().skip(1) {
        theta = newton_step(obj, &theta, t)?;
        let g_norm = obj.f_grad(t, &theta)?.norm();
        backward.push((t, theta.clone(), g_norm));
    }
    let mut prev_t = 0.0;
    let iterates = backward
        .into_iter()
        .rev()
        .enumerate()
        .map(|(j, (t, theta, g_norm))| {
            let it = PathIterate { k: j + 1, t, alpha: t - prev_t, theta, g_norm, inner_steps: u64::from(t < t_max) };
            prev_t = t;
            it
        })
        .collect();
    Ok(PathTrace {
        method: Method::Rosset,
        iterates,
        termination: TerminationReason::GridEnd,
        total_inner_steps: (n_steps - 1) as u64,
        linear_solves: (n_steps - 1) as u64,
        wall_time: start.elapsed().as_secs_f64(),
        next_alpha: None,
        t_max,
    })
}
