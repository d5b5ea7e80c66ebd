//! Loss functions, their derivative oracles, and smoothness constants.

mod a1;
mod dataset;
mod family;

pub use a1::{check_assumption_a1, A1Report};
pub use dataset::Dataset;
pub use family::{sigmoid, softplus, ScalarFamily, SQUARE_BETA};

use serde::{Deserialize, Serialize};

use crate::error::{PathError, Result};
use crate::linalg::eigen_extremes;
use crate::{Matrix, Vector};

/// Constants controlling every step-size formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessProfile {
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Strong convexity constant `m` of the loss.
    pub strong_convexity: f64,
    /// Gradient Lipschitz constant `L`; infinite when the loss has none.
    pub grad_lipschitz: f64,
    /// Largest Hessian eigenvalue at the origin; infinite when `0` is outside the domain.
    pub nu: f64,
}

impl SmoothnessProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = self.beta > 0.0
            && (0.0..2.0).contains(&self.gamma1)
            && (0.0..2.0).contains(&self.gamma2)
            && self.strong_convexity >= 0.0
            && self.strong_convexity <= self.grad_lipschitz
            && self.grad_lipschitz > 0.0
            && self.nu >= 0.0
            && (self.nu <= self.grad_lipschitz * (1.0 + 1e-12) || !self.nu.is_finite());
        if ok {
            Ok(())
        } else {
            Err(PathError::Argument(format!("inconsistent smoothness profile {self:?}")))
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }
}

/// A twice-differentiable convex loss `L(θ)` on a convex domain.
///
/// Implementations must be immutable after construction; all methods take
/// `&self` and may be called from several threads at once.
pub trait LossModel: Send + Sync {
    fn dim(&self) -> usize;

    fn contains(&self, theta: &Vector) -> bool;

    fn value(&self, theta: &Vector) -> Result<f64>;

    fn gradient(&self, theta: &Vector) -> Result<Vector>;

    fn hessian(&self, theta: &Vector) -> Result<Matrix>;

    /// Gradient and Hessian together; override when they share work.
    fn derivatives(&self, theta: &Vector) -> Result<(Vector, Matrix)> {
        Ok((self.gradient(theta)?, self.hessian(theta)?))
    }

    fn profile(&self) -> Result<SmoothnessProfile>;

    fn name(&self) -> String;
}

/// `L(θ) = Σ_i w_i φ(a_iᵀθ + b_i)` for a scalar family `φ`.
///
/// Logistic regression, least squares, and the one-dimensional reference
/// losses are all instances.
#[derive(Debug, Clone)]
pub struct AffineLoss {
    a: Matrix,
    /// `Aᵀ`, kept so products go through the blocked kernels.
    at: Matrix,
    b: Vector,
    w: Vector,
    family: ScalarFamily,
    label: String,
}

impl AffineLoss {
    pub fn new(family: ScalarFamily, a: Matrix, b: Vector, w: Vector) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 || a.nrows() != b.len() || a.nrows() != w.len() {
            return Err(PathError::Argument("affine loss shapes do not agree".into()));
        }
        if w.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(PathError::Argument("affine loss weights must be finite and nonnegative".into()));
        }
        let at = a.transpose();
        Ok(Self { a, at, b, w, family, label: family.name().to_string() })
    }

    /// `(1/n) Σ ln(1 + exp(-y_i x_iᵀθ))`.
    pub fn logistic(data: &Dataset) -> Result<Self> {
        data.check_binary_labels()?;
        let mut a = data.x.clone();
        for (i, mut row) in a.row_iter_mut().enumerate() {
            row *= data.y[i];
        }
        let n = data.n();
        let mut loss = Self::new(
            ScalarFamily::Logistic,
            a,
            Vector::zeros(n),
            Vector::from_element(n, 1.0 / n as f64),
        )?;
        loss.label = "logistic".into();
        Ok(loss)
    }

    /// `(1/2n) ‖Xθ - y‖²`.
    pub fn squared_error(data: &Dataset) -> Result<Self> {
        let n = data.n();
        let mut loss = Self::new(
            ScalarFamily::Square,
            data.x.clone(),
            -data.y.clone(),
            Vector::from_element(n, 0.5 / n as f64),
        )?;
        loss.label = "squared-error".into();
        Ok(loss)
    }

    /// The one-dimensional loss `φ(θ)`.
    pub fn scalar(family: ScalarFamily) -> Self {
        Self::composed(family, Vector::from_element(1, 1.0), 0.0)
    }

    /// `φ(aᵀθ + b)` on `R^p` with `p = a.len()`.
    pub fn composed(family: ScalarFamily, a: Vector, b: f64) -> Self {
        let p = a.len();
        let a = Matrix::from_row_slice(1, p, a.as_slice());
        let mut loss = Self::new(family, a, Vector::from_element(1, b), Vector::from_element(1, 1.0))
            .expect("single-row affine loss is well formed");
        loss.label = if p == 1 && loss.a[(0, 0)] == 1.0 && b == 0.0 {
            family.name().to_string()
        } else {
            format!("{}-affine", family.name())
        };
        loss
    }

    /// `(θ - c)²` in one dimension.
    pub fn shifted_square(c: f64) -> Self {
        let mut loss = Self::composed(ScalarFamily::Square, Vector::from_element(1, 1.0), -c);
        loss.label = "shifted-square".into();
        loss
    }

    pub fn family(&self) -> ScalarFamily {
        self.family
    }

    fn margins(&self, theta: &Vector) -> Result<Vector> {
        if theta.len() != self.dim() {
            return Err(PathError::Argument(format!(
                "parameter has length {} but the loss expects {}",
                theta.len(),
                self.dim()
            )));
        }
        let z = &self.a * theta + &self.b;
        if let Some(i) = z.iter().position(|&v| !self.family.in_domain(v)) {
            return Err(PathError::Domain(format!(
                "{} argument {} at row {i} is outside the domain",
                self.family.name(),
                z[i]
            )));
        }
        Ok(z)
    }

    fn hessian_from_margins(&self, z: &Vector) -> Matrix {
        let mut scaled = self.at.clone();
        for (i, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.w[i] * self.family.d2(z[i]);
        }
        let h = &scaled * &self.a;
        (&h + h.transpose()) * 0.5
    }

    fn gradient_from_margins(&self, z: &Vector) -> Vector {
        let d = Vector::from_iterator(z.len(), z.iter().zip(self.w.iter()).map(|(&zi, &wi)| wi * self.family.d1(zi)));
        &self.at * d
    }
}

impl LossModel for AffineLoss {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn contains(&self, theta: &Vector) -> bool {
        theta.len() == self.dim()
            && (&self.a * theta + &self.b).iter().all(|&v| self.family.in_domain(v))
    }

    fn value(&self, theta: &Vector) -> Result<f64> {
        let z = self.margins(theta)?;
        Ok(z.iter().zip(self.w.iter()).map(|(&zi, &wi)| wi * self.family.value(zi)).sum())
    }

    fn gradient(&self, theta: &Vector) -> Result<Vector> {
        let z = self.margins(theta)?;
        Ok(self.gradient_from_margins(&z))
    }

    fn hessian(&self, theta: &Vector) -> Result<Matrix> {
        let z = self.margins(theta)?;
        Ok(self.hessian_from_margins(&z))
    }

    fn derivatives(&self, theta: &Vector) -> Result<(Vector, Matrix)> {
        let z = self.margins(theta)?;
        Ok((self.gradient_from_margins(&z), self.hessian_from_margins(&z)))
    }

    /// Constants for the weighted sum.
    ///
    /// A single term `φ(aᵀθ + b)` scales the scalar β by
    /// `max(‖a‖^{1-γ₂}, ‖a‖^{3-2γ₁})`. A weighted sum of several terms is
    /// supported for `γ₁ = 1, γ₂ = 0` families, where β is the largest
    /// per-term value `β_φ ‖a_i‖` (the weights cancel from both sides).
    fn profile(&self) -> Result<SmoothnessProfile> {
        let (beta_f, g1, g2) = self.family.a1_constants();
        let row_norms: Vec<f64> = self.a.row_iter().map(|r| r.norm()).collect();
        let beta = if self.a.nrows() == 1 {
            let an = row_norms[0];
            if (g1 != 1.0 || g2 != 0.0) && self.w[0] != 1.0 {
                return Err(PathError::Unsupported(format!(
                    "weighted {} term has no closed-form constant",
                    self.family.name()
                )));
            }
            beta_f * an.powf(1.0 - g2).max(an.powf(3.0 - 2.0 * g1))
        } else if g1 == 1.0 && g2 == 0.0 {
            beta_f * row_norms.iter().cloned().fold(0.0, f64::max)
        } else {
            return Err(PathError::Unsupported(format!(
                "sums of {} terms are not covered by the composition rules",
                self.family.name()
            )));
        };
        if !(beta > 0.0) {
            return Err(PathError::Unsupported("loss has an all-zero design".into()));
        }

        let mut gram = self.a.clone();
        for (i, mut row) in gram.row_iter_mut().enumerate() {
            row *= self.w[i].sqrt();
        }
        let gram = gram.tr_mul(&gram);
        let (lam_min, lam_max) = eigen_extremes(&gram);
        let (c_min, c_max) = self.family.curvature_range();
        let strong_convexity = (c_min * lam_min.max(0.0)).max(0.0);
        let grad_lipschitz = if c_max.is_finite() { c_max * lam_max } else { f64::INFINITY };
        let origin = Vector::zeros(self.dim());
        let nu = if self.contains(&origin) {
            eigen_extremes(&self.hessian(&origin)?).1.max(0.0)
        } else {
            f64::INFINITY
        };
        Ok(SmoothnessProfile {
            beta,
            gamma1: g1,
            gamma2: g2,
            strong_convexity,
            grad_lipschitz: grad_lipschitz.max(strong_convexity),
            nu: if grad_lipschitz.is_finite() { nu.min(grad_lipschitz) } else { nu },
        })
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn one_sample() -> Dataset {
        Dataset::new(Matrix::from_element(1, 1, 1.0), Vector::from_element(1, 1.0)).unwrap()
    }

    #[test]
    fn logistic_single_sample() {
        let loss = AffineLoss::logistic(&one_sample()).unwrap();
        let v = loss.value(&Vector::from_element(1, 2.0)).unwrap();
        assert_relative_eq!(v, (1.0 + (-2f64).exp()).ln(), epsilon = 1e-15);
        assert_relative_eq!(v, 0.126_928, epsilon = 1e-6);
        let (g, h) = loss.derivatives(&Vector::zeros(1)).unwrap();
        assert_relative_eq!(g[0], -0.5, epsilon = 1e-15);
        assert_relative_eq!(h[(0, 0)], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn logistic_at_origin_is_ln2() {
        let x = Matrix::from_fn(7, 3, |i, j| (i as f64 - 2.0 * j as f64) * 0.37);
        let y = Vector::from_fn(7, |i, _| if i % 3 == 0 { 1.0 } else { -1.0 });
        let loss = AffineLoss::logistic(&Dataset::new(x, y).unwrap()).unwrap();
        assert_relative_eq!(loss.value(&Vector::zeros(3)).unwrap(), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn logistic_requires_binary_labels() {
        let d = Dataset::new(Matrix::from_element(1, 1, 1.0), Vector::from_element(1, 0.0)).unwrap();
        assert!(AffineLoss::logistic(&d).is_err());
    }

    #[test]
    fn squared_error_basics() {
        let x = Matrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 0.5, 0.0, 3.0]);
        let d = Dataset::new(x.clone(), Vector::zeros(3)).unwrap();
        let loss = AffineLoss::squared_error(&d).unwrap();
        assert_eq!(loss.value(&Vector::zeros(2)).unwrap(), 0.0);
        let expected = x.tr_mul(&x) / 3.0;
        for theta in [Vector::zeros(2), Vector::from_vec(vec![3.0, -7.0])] {
            assert_relative_eq!(loss.hessian(&theta).unwrap(), expected.clone(), epsilon = 1e-14);
        }
    }

    #[test]
    fn squared_error_identity_design_profile() {
        let p = 4;
        let d = Dataset::new(Matrix::identity(p, p), Vector::from_element(p, 1.0)).unwrap();
        let prof = AffineLoss::squared_error(&d).unwrap().profile().unwrap();
        assert_relative_eq!(prof.strong_convexity, 1.0 / p as f64, epsilon = 1e-14);
        assert_relative_eq!(prof.grad_lipschitz, 1.0 / p as f64, epsilon = 1e-14);
        assert_eq!((prof.gamma1, prof.gamma2), (1.0, 0.0));
        prof.validate().unwrap();
    }

    #[test]
    fn logistic_profile_constants() {
        let x = Matrix::from_row_slice(3, 2, &[3.0, 4.0, 1.0, 0.0, -2.0, 2.0]);
        let y = Vector::from_vec(vec![1.0, -1.0, 1.0]);
        let d = Dataset::new(x.clone(), y).unwrap();
        let prof = AffineLoss::logistic(&d).unwrap().profile().unwrap();
        assert_relative_eq!(prof.beta, 10.0, epsilon = 1e-14);
        assert_eq!((prof.gamma1, prof.gamma2, prof.strong_convexity), (1.0, 0.0, 0.0));
        let (_, lmax) = eigen_extremes(&x.tr_mul(&x));
        assert_relative_eq!(prof.grad_lipschitz, lmax / 12.0, epsilon = 1e-12);
        assert_relative_eq!(prof.nu, prof.grad_lipschitz, epsilon = 1e-12);
        prof.validate().unwrap();
    }

    #[test]
    fn scalar_profiles() {
        let lb = AffineLoss::scalar(ScalarFamily::LogBarrier).profile().unwrap();
        assert_eq!((lb.gamma1, lb.gamma2), (1.5, 1.0));
        assert!(lb.nu.is_infinite());
        let eb = AffineLoss::scalar(ScalarFamily::EntropyBarrier).profile().unwrap();
        assert_eq!((eb.gamma1, eb.gamma2), (1.5, 1.0));
        let ex = AffineLoss::scalar(ScalarFamily::Exponential).profile().unwrap();
        assert_eq!((ex.beta, ex.gamma1, ex.gamma2), (1.0, 1.0, 0.0));
        assert!(ex.grad_lipschitz.is_infinite());
        assert_relative_eq!(ex.nu, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn composed_beta_scaling() {
        let a = Vector::from_vec(vec![3.0, 4.0]);
        let lg = AffineLoss::composed(ScalarFamily::Logistic, a.clone(), 0.0).profile().unwrap();
        assert_relative_eq!(lg.beta, 10.0, epsilon = 1e-14);
        // γ₁ = 3/2, γ₂ = 1: both exponents vanish, β is unchanged.
        let lb = AffineLoss::composed(ScalarFamily::LogBarrier, a, 1.0).profile().unwrap();
        assert_relative_eq!(lb.beta, 2.0, epsilon = 1e-14);
        assert_relative_eq!(lb.nu, 25.0, epsilon = 1e-12);
    }

    #[test]
    fn multi_term_barrier_is_unsupported() {
        let loss = AffineLoss::new(
            ScalarFamily::LogBarrier,
            Matrix::identity(2, 2),
            Vector::from_element(2, 1.0),
            Vector::from_element(2, 1.0),
        )
        .unwrap();
        assert!(matches!(loss.profile(), Err(PathError::Unsupported(_))));
    }

    #[test]
    fn domain_violation_is_an_error() {
        let loss = AffineLoss::scalar(ScalarFamily::LogBarrier);
        let bad = Vector::from_element(1, -0.5);
        assert!(!loss.contains(&bad));
        assert!(matches!(loss.value(&bad), Err(PathError::Domain(_))));
        assert!(matches!(loss.gradient(&bad), Err(PathError::Domain(_))));
        assert!(loss.value(&Vector::from_vec(vec![1.0, 2.0])).is_err());
    }

    #[test]
    fn shifted_square_values() {
        let loss = AffineLoss::shifted_square(1.0);
        let th = Vector::from_element(1, 0.5);
        assert_relative_eq!(loss.value(&th).unwrap(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(loss.gradient(&th).unwrap()[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(loss.hessian(&th).unwrap()[(0, 0)], 2.0, epsilon = 1e-15);
    }
}
