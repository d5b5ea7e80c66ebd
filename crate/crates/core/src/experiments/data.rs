use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{PathError, Result};
use crate::loss::{sigmoid, Dataset};
use crate::{Matrix, Vector};

/// Per-row rejection budget for the separable generator.
pub const SEPARABLE_MAX_DRAWS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Nonseparable,
    Separable,
    Regression,
    Generative,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Nonseparable, Scenario::Separable, Scenario::Regression, Scenario::Generative];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Nonseparable => "nonseparable",
            Scenario::Separable => "separable",
            Scenario::Regression => "regression",
            Scenario::Generative => "generative",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|v| v.name() == s)
    }

    pub fn is_classification(self) -> bool {
        !matches!(self, Scenario::Regression)
    }
}

/// A generated dataset and the parameter it was drawn around, if any.
#[derive(Debug, Clone)]
pub struct Generated {
    pub data: Dataset,
    pub truth: Vector,
}

fn check_dims(n: usize, p: usize) -> Result<()> {
    if n == 0 || p == 0 {
        return Err(PathError::Argument(format!("need n >= 1 and p >= 1, got n={n}, p={p}")));
    }
    Ok(())
}

fn unit_mean(p: usize) -> Vector {
    Vector::from_element(p, 1.0 / (p as f64).sqrt())
}

fn label<R: Rng>(rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Balanced labels with `X | Y ~ N(Yμ, I)` and `μ = (1/√p, ..., 1/√p)`.
pub fn gen_nonseparable(n: usize, p: usize, seed: u64) -> Result<(Dataset, Vector)> {
    check_dims(n, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = unit_mean(p);
    let mut x = Matrix::zeros(n, p);
    let mut y = Vector::zeros(n);
    for i in 0..n {
        y[i] = label(&mut rng);
        for j in 0..p {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[(i, j)] = y[i] * mu[j] + e;
        }
    }
    Ok((Dataset::new(x, y)?, mu))
}

/// Like [`gen_nonseparable`] but each row is redrawn until `Y μᵀX > 1`.
pub fn gen_separable(n: usize, p: usize, seed: u64) -> Result<Dataset> {
    check_dims(n, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = unit_mean(p);
    let mut x = Matrix::zeros(n, p);
    let mut y = Vector::zeros(n);
    let mut row = Vector::zeros(p);
    for i in 0..n {
        y[i] = label(&mut rng);
        let mut draws = 0;
        loop {
            draws += 1;
            if draws > SEPARABLE_MAX_DRAWS {
                return Err(PathError::Sampling(format!("row {i} failed the margin rule {SEPARABLE_MAX_DRAWS} times")));
            }
            for j in 0..p {
                let e: f64 = StandardNormal.sample(&mut rng);
                row[j] = y[i] * mu[j] + e;
            }
            if y[i] * mu.dot(&row) > 1.0 {
                break;
            }
        }
        x.row_mut(i).copy_from(&row.transpose());
    }
    Dataset::new(x, y)
}

/// `Y = Xᵀθ* + e` with `X ~ N(0, I)`, `θ* = (1/√p, ...)`, `e ~ N(0, σ²)`.
pub fn gen_regression(n: usize, p: usize, sigma2: f64, seed: u64) -> Result<(Dataset, Vector)> {
    check_dims(n, p)?;
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(PathError::Argument(format!("noise variance must be finite and nonnegative, got {sigma2}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = unit_mean(p);
    let x = Matrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
    let noise = Normal::new(0.0, sigma2.sqrt()).map_err(|e| PathError::Argument(e.to_string()))?;
    let y = &x * &theta + Vector::from_fn(n, |_, _| noise.sample(&mut rng));
    Ok((Dataset::new(x, y)?, theta))
}

/// `θ ~ N(0, (16/p) I)`, `X ~ N(0, I)`, `P(Y = 1 | X) = σ(Xᵀθ)`.
pub fn gen_generative(n: usize, p: usize, seed: u64) -> Result<(Dataset, Vector)> {
    check_dims(n, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = (16.0 / p as f64).sqrt();
    let theta = Vector::from_fn(p, |_, _| { let z: f64 = StandardNormal.sample(&mut rng); sd * z });
    let x = Matrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
    let z = &x * &theta;
    let y = Vector::from_fn(n, |i, _| if rng.random_bool(sigmoid(z[i])) { 1.0 } else { -1.0 });
    Ok((Dataset::new(x, y)?, theta))
}

/// Dispatches on the scenario. The truth is `μ` for the classification
/// scenarios built around it, `θ*` for regression, and the drawn `θ` for the
/// generative model.
pub fn generate(scenario: Scenario, n: usize, p: usize, sigma2: f64, seed: u64) -> Result<Generated> {
    let (data, truth) = match scenario {
        Scenario::Nonseparable => gen_nonseparable(n, p, seed)?,
        Scenario::Separable => (gen_separable(n, p, seed)?, unit_mean(p)),
        Scenario::Regression => gen_regression(n, p, sigma2, seed)?,
        Scenario::Generative => gen_generative(n, p, seed)?,
    };
    Ok(Generated { data, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nonseparable_basics() {
        let (d, mu) = gen_nonseparable(1000, 4, 9).unwrap();
        assert_relative_eq!(mu.norm(), 1.0, epsilon = 1e-15);
        d.check_binary_labels().unwrap();
        let pos = d.y.iter().filter(|&&v| v > 0.0).count() as f64 / 1000.0;
        assert!((0.4..=0.6).contains(&pos));
        let (d2, _) = gen_nonseparable(1000, 4, 9).unwrap();
        assert_eq!(d, d2);
        let (d3, _) = gen_nonseparable(1000, 4, 10).unwrap();
        assert_ne!(d, d3);
    }

    #[test]
    fn separable_margin() {
        let d = gen_separable(200, 5, 1).unwrap();
        let mu = unit_mean(5);
        for i in 0..d.n() {
            let m = d.y[i] * mu.dot(&d.x.row(i).transpose());
            assert!(m > 1.0);
        }
    }

    #[test]
    fn regression_truth_has_unit_norm() {
        let (d, th) = gen_regression(50, 8, 0.25, 2).unwrap();
        assert_relative_eq!(th.norm(), 1.0, epsilon = 1e-14);
        assert_eq!((d.n(), d.p()), (50, 8));
        assert!(gen_regression(5, 2, -1.0, 0).is_err());
    }

    #[test]
    fn generative_is_deterministic() {
        let (a, ta) = gen_generative(30, 3, 4).unwrap();
        let (b, tb) = gen_generative(30, 3, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        a.check_binary_labels().unwrap();
    }

    #[test]
    fn zero_dimensions_are_rejected() {
        assert!(gen_nonseparable(0, 3, 0).is_err());
        assert!(gen_separable(3, 0, 0).is_err());
    }
}
