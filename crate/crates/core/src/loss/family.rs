use serde::{Deserialize, Serialize};

/// One-dimensional convex building blocks `φ(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarFamily {
    /// `ln(1 + e^{-z})`
    Logistic,
    /// `e^{-z}`
    Exponential,
    /// `-ln z`, domain `z > 0`
    LogBarrier,
    /// `z ln z - ln z`, domain `z > 0`
    EntropyBarrier,
    /// `z²`
    Square,
}

/// Placeholder β for quadratics: the Lipschitz-Hessian inequality holds with a
/// zero left-hand side, so any positive value works. A tiny value keeps the
/// β-dependent step-size guards inactive.
pub const SQUARE_BETA: f64 = 1e-8;

impl ScalarFamily {
    pub const ALL: [ScalarFamily; 5] = [
        ScalarFamily::Logistic,
        ScalarFamily::Exponential,
        ScalarFamily::LogBarrier,
        ScalarFamily::EntropyBarrier,
        ScalarFamily::Square,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScalarFamily::Logistic => "logistic",
            ScalarFamily::Exponential => "exponential",
            ScalarFamily::LogBarrier => "log-barrier",
            ScalarFamily::EntropyBarrier => "entropy-barrier",
            ScalarFamily::Square => "square",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }

    pub fn in_domain(self, z: f64) -> bool {
        match self {
            ScalarFamily::LogBarrier | ScalarFamily::EntropyBarrier => z > 0.0 && z.is_finite(),
            _ => z.is_finite(),
        }
    }

    pub fn value(self, z: f64) -> f64 {
        match self {
            ScalarFamily::Logistic => softplus(-z),
            ScalarFamily::Exponential => (-z).exp(),
            ScalarFamily::LogBarrier => -z.ln(),
            ScalarFamily::EntropyBarrier => z * z.ln() - z.ln(),
            ScalarFamily::Square => z * z,
        }
    }

    pub fn d1(self, z: f64) -> f64 {
        match self {
            ScalarFamily::Logistic => -sigmoid(-z),
            ScalarFamily::Exponential => -(-z).exp(),
            ScalarFamily::LogBarrier => -1.0 / z,
            ScalarFamily::EntropyBarrier => z.ln() + 1.0 - 1.0 / z,
            ScalarFamily::Square => 2.0 * z,
        }
    }

    pub fn d2(self, z: f64) -> f64 {
        match self {
            ScalarFamily::Logistic => sigmoid(z) * sigmoid(-z),
            ScalarFamily::Exponential => (-z).exp(),
            ScalarFamily::LogBarrier => 1.0 / (z * z),
            ScalarFamily::EntropyBarrier => 1.0 / z + 1.0 / (z * z),
            ScalarFamily::Square => 2.0,
        }
    }

    /// `(β, γ₁, γ₂)` for the one-dimensional function.
    ///
    /// Exponential uses β = 1: the bound needs `e^u ≤ 1 + 2u` on `[0, 1/β]`,
    /// which fails at β = 1/2.
    pub fn a1_constants(self) -> (f64, f64, f64) {
        match self {
            ScalarFamily::Logistic => (2.0, 1.0, 0.0),
            ScalarFamily::Exponential => (1.0, 1.0, 0.0),
            ScalarFamily::LogBarrier => (2.0, 1.5, 1.0),
            ScalarFamily::EntropyBarrier => ((3.0 + 5f64.sqrt()) / 2.0, 1.5, 1.0),
            ScalarFamily::Square => (SQUARE_BETA, 1.0, 0.0),
        }
    }

    /// `(inf φ'', sup φ'')` over the domain.
    pub fn curvature_range(self) -> (f64, f64) {
        match self {
            ScalarFamily::Logistic => (0.0, 0.25),
            ScalarFamily::Exponential => (0.0, f64::INFINITY),
            ScalarFamily::LogBarrier => (0.0, f64::INFINITY),
            ScalarFamily::EntropyBarrier => (0.0, f64::INFINITY),
            ScalarFamily::Square => (2.0, 2.0),
        }
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `1 / (1 + e^{-x})` without overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn logistic_values() {
        assert_relative_eq!(ScalarFamily::Logistic.value(0.0), 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(ScalarFamily::Logistic.value(2.0), 0.126_928_011_042_972_1, epsilon = 1e-14);
        assert_relative_eq!(ScalarFamily::Logistic.d1(0.0), -0.5, epsilon = 1e-15);
        assert_relative_eq!(ScalarFamily::Logistic.d2(0.0), 0.25, epsilon = 1e-15);
        // Extreme arguments stay finite.
        assert_relative_eq!(ScalarFamily::Logistic.value(-800.0), 800.0, epsilon = 1e-12);
        assert_eq!(ScalarFamily::Logistic.value(800.0), 0.0);
        assert!(ScalarFamily::Logistic.d2(800.0) >= 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for fam in ScalarFamily::ALL {
            for &z in &[0.3, 0.9, 1.7, 4.0] {
                let h = 1e-5;
                let fd1 = (fam.value(z + h) - fam.value(z - h)) / (2.0 * h);
                let fd2 = (fam.d1(z + h) - fam.d1(z - h)) / (2.0 * h);
                assert_relative_eq!(fd1, fam.d1(z), max_relative = 1e-7);
                assert_relative_eq!(fd2, fam.d2(z), max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn barrier_domains() {
        assert!(!ScalarFamily::LogBarrier.in_domain(0.0));
        assert!(!ScalarFamily::EntropyBarrier.in_domain(-1.0));
        assert!(ScalarFamily::Exponential.in_domain(-3.0));
        assert!(!ScalarFamily::Square.in_domain(f64::NAN));
    }

    #[test]
    fn entropy_beta_is_smallest_admissible() {
        // β/(β-1)² ≤ 1 with equality at the golden-ratio root.
        let (b, _, _) = ScalarFamily::EntropyBarrier.a1_constants();
        assert_relative_eq!(b / ((b - 1.0) * (b - 1.0)), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for fam in ScalarFamily::ALL {
            assert_eq!(ScalarFamily::from_name(fam.name()), Some(fam));
        }
        assert_eq!(ScalarFamily::from_name("hinge"), None);
    }
}
