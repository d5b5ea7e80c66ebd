//! The scaled regularized objective `f_t` and its exact minimizer.

use serde::Serialize;

use crate::error::{PathError, Result};
use crate::linalg::{scaled_weights, spd_solve};
use crate::loss::LossModel;
use crate::{Matrix, Vector};

/// Reference solves at larger `t` (including `t = ∞`) are performed at this value.
pub const T_CAP: f64 = 50.0;
/// Default gradient-norm tolerance of [`RegularizedObjective::solve_exact`].
pub const DEFAULT_REF_TOL: f64 = 1e-10;
const REF_MAX_ITER: usize = 10_000;

/// `f_t(θ) = (1 - e^{-t}) L(θ) + (e^{-t}/2) ‖θ‖²`.
#[derive(Clone, Copy)]
pub struct RegularizedObjective<'a> {
    pub loss: &'a dyn LossModel,
}

/// A certified minimizer of `f_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint {
    pub t: f64,
    pub theta: Vector,
    pub grad_norm: f64,
}

/// Violation counts for the monotone path properties.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PathPropertyReport {
    /// `‖θ(t)‖` decreased.
    pub norm_decreases: usize,
    /// `L(θ(t))` increased.
    pub loss_increases: usize,
    /// `‖θ(t)‖ / (e^t - 1)` increased.
    pub ratio_increases: usize,
    /// `‖θ(t)‖ > (e^t - 1) ‖∇L(0)‖`.
    pub growth_bound: usize,
}

impl PathPropertyReport {
    pub fn total(&self) -> usize {
        self.norm_decreases + self.loss_increases + self.ratio_increases + self.growth_bound
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(PathError::Argument(format!("t must be nonnegative, got {t}")))
    }
}

impl<'a> RegularizedObjective<'a> {
    pub fn new(loss: &'a dyn LossModel) -> Self {
        Self { loss }
    }

    pub fn dim(&self) -> usize {
        self.loss.dim()
    }

    pub fn f_value(&self, t: f64, theta: &Vector) -> Result<f64> {
        check_t(t)?;
        let (a, b) = scaled_weights(t);
        let loss = if a == 0.0 { 0.0 } else { a * self.loss.value(theta)? };
        Ok(loss + 0.5 * b * theta.norm_squared())
    }

    pub fn f_grad(&self, t: f64, theta: &Vector) -> Result<Vector> {
        check_t(t)?;
        let (a, b) = scaled_weights(t);
        Ok(self.loss.gradient(theta)? * a + theta * b)
    }

    /// `(1 - e^{-t}) H + e^{-t} I`.
    pub fn system_matrix(&self, t: f64, hessian: &Matrix) -> Matrix {
        let (a, b) = scaled_weights(t);
        let mut m = hessian * a;
        for i in 0..m.nrows() {
            m[(i, i)] += b;
        }
        m
    }

    /// Solves `[(1 - e^{-t}) H + e^{-t} I] x = rhs`.
    pub fn solve_system(&self, t: f64, hessian: &Matrix, rhs: &Vector) -> Result<Vector> {
        let m = self.system_matrix(t, hessian);
        spd_solve(&m, rhs, (-t).exp().max(1e-300))
    }

    /// `-[(1 - e^{-t}) ∇²L(θ) + e^{-t} I]^{-1} ∇L(θ)`.
    pub fn ode_rhs(&self, t: f64, theta: &Vector) -> Result<Vector> {
        check_t(t)?;
        let (g, h) = self.loss.derivatives(theta)?;
        Ok(-self.solve_system(t, &h, &g)?)
    }

    /// Minimizes `f_t` by damped Newton with backtracking until `‖∇f_t‖ ≤ tol`.
    ///
    /// `t` above [`T_CAP`] is clamped to it.
    pub fn solve_exact(&self, t: f64, tol: f64, theta_init: Option<&Vector>) -> Result<ReferencePoint> {
        check_t(t)?;
        if !(tol > 0.0) {
            return Err(PathError::Argument(format!("tolerance must be positive, got {tol}")));
        }
        let t = t.min(T_CAP);
        let mut theta = match theta_init {
            Some(th) if self.loss.contains(th) => th.clone(),
            _ => Vector::zeros(self.dim()),
        };
        if !self.loss.contains(&theta) {
            return Err(PathError::Domain(format!(
                "{} is not defined at the starting point",
                self.loss.name()
            )));
        }
        let (wa, wb) = scaled_weights(t);
        let mut f = self.f_value(t, &theta)?;
        for _ in 0..REF_MAX_ITER {
            let (g_loss, h) = self.loss.derivatives(&theta)?;
            let grad = &g_loss * wa + &theta * wb;
            let gn = grad.norm();
            if gn <= tol {
                return Ok(ReferencePoint { t, theta, grad_norm: gn });
            }
            let step = -self.solve_system(t, &h, &grad)?;
            let slope = grad.dot(&step);
            let mut eta = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &theta + &step * eta;
                if self.loss.contains(&cand) {
                    let fc = self.f_value(t, &cand)?;
                    // Rounding allowance: near the optimum the true decrease is
                    // below the resolution of f.
                    if fc <= f + 1e-4 * eta * slope + 1e-14 * f.abs() {
                        theta = cand;
                        f = fc;
                        accepted = true;
                        break;
                    }
                }
                eta *= 0.5;
            }
            if !accepted {
                return Err(PathError::Convergence { what: "reference solve line search", iterations: 60, residual: gn });
            }
        }
        let gn = self.f_grad(t, &theta)?.norm();
        if gn <= tol {
            return Ok(ReferencePoint { t, theta, grad_norm: gn });
        }
        Err(PathError::Convergence { what: "reference solve", iterations: REF_MAX_ITER, residual: gn })
    }

    /// Checks the monotone properties of exact path points sorted by `t`.
    ///
    /// Each comparison allows an absolute slack of `1e-6`.
    pub fn path_property_report(&self, points: &[ReferencePoint]) -> Result<PathPropertyReport> {
        const SLACK: f64 = 1e-6;
        if points.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(PathError::Argument("reference points must have strictly increasing t".into()));
        }
        let g0 = self.loss.gradient(&Vector::zeros(self.dim()))?.norm();
        let mut rep = PathPropertyReport::default();
        let mut prev: Option<(f64, f64, f64)> = None;
        for pt in points {
            let norm = pt.theta.norm();
            let loss = self.loss.value(&pt.theta)?;
            let em1 = pt.t.exp_m1();
            let ratio = if em1 > 0.0 { norm / em1 } else { f64::INFINITY };
            if norm > em1 * g0 + SLACK {
                rep.growth_bound += 1;
            }
            if let Some((pn, pl, pr)) = prev {
                if norm < pn - SLACK {
                    rep.norm_decreases += 1;
                }
                if loss > pl + SLACK {
                    rep.loss_increases += 1;
                }
                if ratio > pr + SLACK {
                    rep.ratio_increases += 1;
                }
            }
            prev = Some((norm, loss, ratio));
        }
        Ok(rep)
    }
}
