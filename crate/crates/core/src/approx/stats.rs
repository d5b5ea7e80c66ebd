use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ApproxPath;
use crate::error::{PathError, Result};
use crate::loss::{sigmoid, softplus};
use crate::ode::{run_ode_path, OdeConfig, OdeMethod};
use crate::path::RegularizedObjective;
use crate::{Matrix, Vector};

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Least-squares slope of `ln(steps)` against `ln(1/ε)`.
pub fn complexity_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(PathError::Argument("complexity slope needs at least 3 points".into()));
    }
    if points.iter().any(|&(e, s)| !(e > 0.0) || !(s > 0.0)) {
        return Err(PathError::Argument("epsilon and step counts must be positive".into()));
    }
    let mut eps: Vec<f64> = points.iter().map(|p| p.0).collect();
    eps.sort_by(f64::total_cmp);
    if eps.windows(2).any(|w| w[0] == w[1]) {
        return Err(PathError::Argument("epsilon values must be distinct".into()));
    }
    let xs: Vec<f64> = points.iter().map(|&(e, _)| -e.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, s)| s.ln()).collect();
    Ok(ls_slope(&xs, &ys))
}

/// Empirical order of an ODE integrator: the slope of `ln(max_k ‖θ_k - θ(t_k)‖)`
/// against `ln α`.
///
/// Returns the slope with the per-step errors, or `None` for the slope when
/// every error is at rounding level (the integrator is exact on the problem).
pub fn ode_order_estimate(
    obj: &RegularizedObjective<'_>,
    method: OdeMethod,
    alphas: &[f64],
    t_max: f64,
    ref_tol: f64,
) -> Result<(Option<f64>, Vec<f64>)> {
    if alphas.len() < 2 {
        return Err(PathError::Argument("order estimate needs at least two step sizes".into()));
    }
    let mut errors = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let trace = run_ode_path(obj, &OdeConfig::new(method, alpha, t_max)?)?;
        let mut worst: f64 = 0.0;
        for it in &trace.iterates {
            let exact = obj.solve_exact(it.t, ref_tol, Some(&it.theta))?;
            worst = worst.max((&it.theta - &exact.theta).norm());
        }
        errors.push(worst);
    }
    let scale = 1e3 * ref_tol;
    if errors.iter().any(|&e| e <= scale) {
        return Ok((None, errors));
    }
    let xs: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok((Some(ls_slope(&xs, &ys)), errors))
}

/// Monte-Carlo excess logistic risk `E ln(1+e^{-Y Xᵀθ̃(t)}) - E ln(1+e^{-Y Xᵀθ})`
/// at each `t`, with `X ~ N(0, I)` and `P(Y = 1 | X) = σ(Xᵀθ)`.
///
/// The label is integrated out exactly given `X`, which leaves the same
/// expectation with lower variance. The same draws of `X` are shared by every
/// `t`.
pub fn risk_kl(
    path: &ApproxPath,
    theta_true: &Vector,
    t_grid: &[f64],
    mc_samples: usize,
    rng_seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if mc_samples == 0 {
        return Err(PathError::Argument("need at least one Monte-Carlo sample".into()));
    }
    let p = theta_true.len();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let x = Matrix::from_fn(mc_samples, p, |_, _| StandardNormal.sample(&mut rng));
    let z_true = &x * theta_true;
    let expected = |z: &Vector| -> f64 {
        z.iter()
            .zip(z_true.iter())
            .map(|(&zi, &zt)| sigmoid(zt) * softplus(-zi) + sigmoid(-zt) * softplus(zi))
            .sum::<f64>()
            / mc_samples as f64
    };
    let base = expected(&z_true);
    t_grid
        .iter()
        .map(|&t| {
            let th = path.eval(t)?;
            Ok((t, expected(&(&x * th)) - base))
        })
        .collect()
}
