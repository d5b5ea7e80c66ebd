//! Dense symmetric linear algebra used by every second-order update.

use nalgebra::SymmetricEigen;

use crate::error::{PathError, Result};
use crate::{Matrix, Vector};

/// Solves `matrix * x = rhs` for a symmetric positive-definite `matrix`.
///
/// Cholesky is tried first. If the factorization fails (loss of definiteness
/// through rounding) the solve falls back to an eigendecomposition with every
/// eigenvalue raised to at least `floor`.
pub fn spd_solve(matrix: &Matrix, rhs: &Vector, floor: f64) -> Result<Vector> {
    if let Some(chol) = matrix.clone().cholesky() {
        let x = chol.solve(rhs);
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x);
        }
    }
    if !(floor > 0.0) {
        return Err(PathError::Numerical(
            "system matrix is not positive definite and no eigenvalue floor was given".into(),
        ));
    }
    let eig = SymmetricEigen::new(matrix.clone());
    let coords = eig.eigenvectors.transpose() * rhs;
    let scaled = Vector::from_iterator(
        coords.len(),
        coords
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(c, &lam)| c / lam.max(floor)),
    );
    let x = &eig.eigenvectors * scaled;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(PathError::Numerical("eigen fallback produced non-finite solution".into()))
    }
}

/// Raises a symmetric PSD matrix to a real power via its eigendecomposition.
///
/// Eigenvalues are clamped at zero before powering and `0^0` is taken as 1,
/// so `power == 0` yields the identity.
pub fn sym_power(matrix: &Matrix, power: f64) -> Matrix {
    if power == 1.0 {
        return (matrix + matrix.transpose()) * 0.5;
    }
    let eig = SymmetricEigen::new(matrix.clone());
    let powered = eig.eigenvalues.map(|lam| {
        let lam = lam.max(0.0);
        if power == 0.0 {
            1.0
        } else {
            lam.powf(power)
        }
    });
    let v = &eig.eigenvectors;
    let m = v * Matrix::from_diagonal(&powered) * v.transpose();
    (&m + m.transpose()) * 0.5
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigen_extremes(matrix: &Matrix) -> (f64, f64) {
    let eig = SymmetricEigen::new(matrix.clone());
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Weights of the scaled objective: `(1 - e^{-t}, e^{-t})`.
///
/// The first weight is computed with `expm1` so it stays accurate for tiny `t`.
#[inline]
pub fn scaled_weights(t: f64) -> (f64, f64) {
    if t.is_infinite() {
        return (1.0, 0.0);
    }
    (-(-t).exp_m1(), (-t).exp())
}

/// `e^t - 1`, accurate for small `t`.
#[inline]
pub fn expm1(t: f64) -> f64 {
    t.exp_m1()
}
