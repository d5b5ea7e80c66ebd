//! Solver output: grid points with their bookkeeping.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::Vector;

/// Which algorithm produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Newton,
    Gd,
    Euler,
    Rk2,
    Rosset,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Newton, Method::Gd, Method::Euler, Method::Rk2, Method::Rosset];

    pub fn name(self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::Gd => "gd",
            Method::Euler => "euler",
            Method::Rk2 => "rk2",
            Method::Rosset => "rosset",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|m| m.name() == s)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationReason {
    /// The last grid point passed `t_max`.
    TExceeded,
    /// The norm-based stopping rule fired before `t_max`.
    NormCriterion,
    /// A fixed grid (ODE or Rosset) was exhausted.
    GridEnd,
}

/// One grid point `(t_k, θ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathIterate {
    pub k: usize,
    pub t: f64,
    pub alpha: f64,
    pub theta: Vector,
    /// `‖∇f_{t_k}(θ_k)‖`.
    pub g_norm: f64,
    /// Gradient steps spent at this grid point (1 for second-order methods).
    pub inner_steps: u64,
}

#[derive(Debug, Clone)]
pub struct PathTrace {
    pub method: Method,
    pub iterates: Vec<PathIterate>,
    pub termination: TerminationReason,
    pub total_inner_steps: u64,
    pub linear_solves: u64,
    pub wall_time: f64,
    /// Step the schedule would have proposed after the last grid point.
    pub next_alpha: Option<f64>,
    /// Grid end the run was configured for.
    pub t_max: f64,
}

impl PathTrace {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn last_t(&self) -> f64 {
        self.iterates.last().map_or(0.0, |it| it.t)
    }

    /// Writes `k,t_k,alpha_k,g_norm,theta_norm,inner_steps`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k", "t_k", "alpha_k", "g_norm", "theta_norm", "inner_steps"])?;
        for it in &self.iterates {
            w.write_record([
                it.k.to_string(),
                format!("{:.16e}", it.t),
                format!("{:.16e}", it.alpha),
                format!("{:.16e}", it.g_norm),
                format!("{:.16e}", it.theta.norm()),
                it.inner_steps.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `k,theta_1,...,theta_p`, one row per grid point.
    pub fn write_theta_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let p = self.iterates.first().map_or(0, |it| it.theta.len());
        let mut header = vec!["k".to_string()];
        header.extend((1..=p).map(|j| format!("theta_{j}")));
        w.write_record(&header)?;
        for it in &self.iterates {
            let mut rec = vec![it.k.to_string()];
            rec.extend(it.theta.iter().map(|v| format!("{v:.16e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
