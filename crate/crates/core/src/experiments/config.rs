use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::data::Scenario;
use crate::error::{PathError, Result};
use crate::homotopy::StepRule;
use crate::trace::Method;

/// Which empirical loss is fitted to the generated data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Logistic,
    SquaredError,
}

impl LossKind {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "logistic" => Some(LossKind::Logistic),
            "squared-error" | "ridge" | "least-squares" => Some(LossKind::SquaredError),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Logistic => "logistic",
            LossKind::SquaredError => "squared-error",
        }
    }

    pub fn default_for(scenario: Scenario) -> Self {
        if scenario.is_classification() {
            LossKind::Logistic
        } else {
            LossKind::SquaredError
        }
    }
}

/// `t_max` as JSON: a number, or the string `"inf"`.
mod t_max_serde {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(s) => super::parse_t_max(&s).map_err(D::Error::custom),
        }
    }
}

/// Parses a horizon, accepting `inf`/`infinity`.
pub fn parse_t_max(s: &str) -> std::result::Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        other => other.parse::<f64>().map_err(|e| format!("bad t_max {s:?}: {e}")),
    }
}

/// One experiment matrix: scenario × settings × methods × seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub loss: Option<LossKind>,
    pub n: usize,
    pub p: usize,
    pub sigma2: f64,
    pub methods: Vec<Method>,
    pub epsilons: Vec<f64>,
    #[serde(with = "t_max_serde")]
    pub t_max: f64,
    /// First-step overrides for the homotopy methods; each value is its own setting.
    pub alpha1: Vec<f64>,
    pub alpha_max: Option<f64>,
    pub step_rule: StepRule,
    /// Constant step for Euler/RK2 when no budget matching is requested.
    pub ode_alpha: f64,
    /// Derive ODE and Rosset step counts from this method's run.
    pub match_budget: Option<Method>,
    pub seeds: Vec<u64>,
    /// Reference samples for the suboptimality estimate.
    pub samples: usize,
    pub ref_tol: f64,
    /// Horizon of the suboptimality samples when `t_max` is infinite.
    pub eval_t_max: f64,
    pub mc_samples: usize,
    pub dump_theta: bool,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Nonseparable,
            loss: None,
            n: 200,
            p: 20,
            sigma2: 1.0,
            methods: vec![Method::Newton],
            epsilons: vec![1e-3],
            t_max: 10.0,
            alpha1: Vec::new(),
            alpha_max: None,
            step_rule: StepRule::Certified,
            ode_alpha: 0.1,
            match_budget: None,
            seeds: vec![1],
            samples: 100,
            ref_tol: crate::path::DEFAULT_REF_TOL,
            eval_t_max: 10.0,
            mc_samples: 10_000,
            dump_theta: false,
            out: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss.unwrap_or_else(|| LossKind::default_for(self.scenario))
    }

    /// Horizon over which suboptimality is sampled.
    pub fn evaluation_horizon(&self) -> f64 {
        if self.t_max.is_finite() {
            self.t_max
        } else {
            self.eval_t_max
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PathError::Config(m));
        if self.n == 0 || self.p == 0 {
            return bad(format!("n and p must be at least 1, got n={}, p={}", self.n, self.p));
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return bad("epsilon values must be positive and finite".into());
        }
        if !(self.t_max > 0.0) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.alpha1.iter().any(|&a| !(a > 0.0 && a <= 0.1)) {
            return bad("alpha1 overrides must lie in (0, 0.1]".into());
        }
        if let Some(a) = self.alpha_max {
            if !(a > 0.0 && a <= 0.1) {
                return bad(format!("alpha_max must lie in (0, 0.1], got {a}"));
            }
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        let distinct: HashSet<u64> = self.seeds.iter().copied().collect();
        if distinct.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if self.samples == 0 || self.mc_samples == 0 {
            return bad("sample counts must be positive".into());
        }
        if !(self.ref_tol > 0.0) {
            return bad("ref_tol must be positive".into());
        }
        if !(self.eval_t_max > 0.0 && self.eval_t_max.is_finite()) {
            return bad("eval_t_max must be positive and finite".into());
        }
        let needs_finite = self.methods.iter().any(|m| matches!(m, Method::Euler | Method::Rk2 | Method::Rosset));
        if needs_finite && !self.t_max.is_finite() {
            return bad("ODE and Rosset methods need a finite t_max".into());
        }
        if needs_finite && self.match_budget.is_none() && !(self.ode_alpha > 0.0 && self.ode_alpha <= self.t_max) {
            return bad(format!("ode_alpha must lie in (0, t_max], got {}", self.ode_alpha));
        }
        if let Some(m) = self.match_budget {
            if m != Method::Newton {
                return bad(format!("budget matching is defined against newton, got {m}"));
            }
        }
        if self.scenario == Scenario::Regression && self.loss_kind() == LossKind::Logistic {
            return bad("logistic loss needs a classification scenario".into());
        }
        if self.scenario == Scenario::Regression && !(self.sigma2 >= 0.0) {
            return bad("sigma2 must be nonnegative".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_with_infinite_horizon() {
        let cfg = ExperimentConfig { t_max: f64::INFINITY, methods: vec![Method::Newton, Method::Gd], ..Default::default() };
        let text = cfg.to_json().unwrap();
        assert!(text.contains("\"inf\""));
        assert_eq!(ExperimentConfig::from_json_str(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg = ExperimentConfig::from_json_str(r#"{"n": 50, "methods": ["newton", "rk2"], "t_max": 5}"#).unwrap();
        assert_eq!(cfg.n, 50);
        assert_eq!(cfg.p, 20);
        assert_eq!(cfg.t_max, 5.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json_str(r#"{"nn": 5}"#).is_err());
    }

    #[test]
    fn validation_failures() {
        let base = ExperimentConfig::default();
        let cases = [
            ExperimentConfig { n: 0, ..base.clone() },
            ExperimentConfig { epsilons: vec![0.0], ..base.clone() },
            ExperimentConfig { seeds: vec![1, 1], ..base.clone() },
            ExperimentConfig { methods: vec![Method::Rk2], t_max: f64::INFINITY, ..base.clone() },
            ExperimentConfig { alpha1: vec![0.5], ..base.clone() },
            ExperimentConfig { scenario: Scenario::Regression, loss: Some(LossKind::Logistic), ..base.clone() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
        base.validate().unwrap();
    }

    #[test]
    fn t_max_parsing() {
        assert_eq!(parse_t_max("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_t_max("10").unwrap(), 10.0);
        assert!(parse_t_max("ten").is_err());
    }
}
