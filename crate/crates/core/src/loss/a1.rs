use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{LossModel, SmoothnessProfile};
use crate::error::Result;
use crate::linalg::sym_power;
use crate::Vector;

/// Outcome of [`check_assumption_a1`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct A1Report {
    pub samples: usize,
    pub violations: usize,
    /// Largest observed `LHS / RHS`.
    pub worst_ratio: f64,
}

const MAX_DOMAIN_TRIES: usize = 10_000;

/// Samples pairs `(θ, δ)` and tests the local Lipschitz-Hessian inequality
///
/// `‖∇L(θ+δ) - ∇L(θ) - ∇²L(θ)δ‖ ≤ β δᵀ[∇²L(θ)]^{γ₁}δ`
/// for `δᵀ[∇²L(θ)]^{γ₂}δ ≤ β^{-2}`.
///
/// Base points are Gaussian with a log-uniform scale over `[1e-3, 10]`, so
/// barrier losses get probed close to their boundary. Each `δ` is a random
/// direction scaled to a uniform fraction of the admissible radius, with a
/// third of the draws clamped onto the boundary itself. The left-hand side is
/// reduced by a floating-point cancellation allowance so exact quadratics
/// report zero.
pub fn check_assumption_a1(
    loss: &dyn LossModel,
    profile: &SmoothnessProfile,
    samples: usize,
    rng_seed: u64,
) -> Result<A1Report> {
    let p = loss.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut attempts = 0;
    while done < samples {
        attempts += 1;
        if attempts > samples * MAX_DOMAIN_TRIES {
            return Err(crate::PathError::Sampling(format!(
                "could not draw interior points for {} after {attempts} attempts",
                loss.name()
            )));
        }
        let scale = 10f64.powf(rng.random_range(-3.0..1.0));
        let theta = random_vector(&mut rng, p) * scale;
        if !loss.contains(&theta) {
            continue;
        }
        let (g0, h) = loss.derivatives(&theta)?;
        let dir = {
            let d = random_vector(&mut rng, p);
            let nrm = d.norm();
            if nrm == 0.0 {
                continue;
            }
            d / nrm
        };
        let h_g2 = sym_power(&h, profile.gamma2);
        let quad = dir.dot(&(&h_g2 * &dir));
        let radius = if quad > 0.0 {
            1.0 / (profile.beta * quad.sqrt())
        } else {
            10.0 * (1.0 + theta.norm())
        };
        let fraction: f64 = rng.random_range(0.0..1.5f64).min(1.0);
        let mut delta = dir * (radius * fraction);
        let mut shrink = 0;
        while !loss.contains(&(&theta + &delta)) {
            delta *= 0.5;
            shrink += 1;
            if shrink > 200 {
                break;
            }
        }
        if shrink > 200 {
            continue;
        }
        let g1 = loss.gradient(&(&theta + &delta))?;
        let hd = &h * &delta;
        let residual = &g1 - &g0 - &hd;
        let floor = 64.0 * f64::EPSILON * (g1.norm() + g0.norm() + hd.norm());
        let lhs = (residual.norm() - floor).max(0.0);
        let h_g1 = sym_power(&h, profile.gamma1);
        let rhs = profile.beta * delta.dot(&(&h_g1 * &delta));
        done += 1;
        if lhs == 0.0 {
            continue;
        }
        let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
        worst = worst.max(ratio);
        if lhs > rhs * (1.0 + 1e-10) {
            violations += 1;
        }
    }
    Ok(A1Report { samples, violations, worst_ratio: worst })
}

fn random_vector<R: Rng>(rng: &mut R, p: usize) -> Vector {
    Vector::from_iterator(p, (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)))
}
