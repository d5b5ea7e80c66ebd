//! Interpolated paths, their measured suboptimality, and theoretical bounds.

mod bounds;
mod stats;

pub use bounds::{
    gd_bound_rhs, gd_inner_steps_required, grad_norm_bound_check, newton_bound_rhs, newton_comparability_violations,
    reference_norm_at, GradBoundReport,
};
pub use stats::{complexity_slope, ode_order_estimate, risk_kl};

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PathError, Result};
use crate::path::{ReferencePoint, RegularizedObjective};
use crate::trace::PathTrace;
use crate::Vector;

/// Piecewise-linear path through `(0, 0), (t_1, θ_1), ..., (t_N, θ_N)`,
/// held constant at `θ_N` beyond `t_N`.
#[derive(Debug, Clone)]
pub struct ApproxPath {
    ts: Vec<f64>,
    thetas: Vec<Vector>,
    t_max: f64,
}

impl ApproxPath {
    pub fn new(grid: Vec<(f64, Vector)>, dim: usize, t_max: f64) -> Result<Self> {
        let mut ts = vec![0.0];
        let mut thetas = vec![Vector::zeros(dim)];
        for (t, th) in grid {
            if !(t > *ts.last().unwrap()) {
                return Err(PathError::Argument("grid times must be positive and strictly increasing".into()));
            }
            if th.len() != dim {
                return Err(PathError::Argument("grid parameter has the wrong dimension".into()));
            }
            ts.push(t);
            thetas.push(th);
        }
        if !(t_max > 0.0) {
            return Err(PathError::Argument(format!("t_max must be positive, got {t_max}")));
        }
        Ok(Self { ts, thetas, t_max })
    }

    pub fn from_trace(trace: &PathTrace, dim: usize) -> Result<Self> {
        let grid = trace.iterates.iter().map(|it| (it.t, it.theta.clone())).collect();
        Self::new(grid, dim, trace.t_max)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn grid_times(&self) -> &[f64] {
        &self.ts
    }

    pub fn eval(&self, t: f64) -> Result<Vector> {
        if !(t >= 0.0 && t <= self.t_max) {
            return Err(PathError::Argument(format!("t = {t} is outside [0, {}]", self.t_max)));
        }
        let last = self.ts.len() - 1;
        if t >= self.ts[last] {
            return Ok(self.thetas[last].clone());
        }
        // First index with ts[i] > t; t lies in [ts[i-1], ts[i]).
        let i = self.ts.partition_point(|&s| s <= t);
        let (t0, t1) = (self.ts[i - 1], self.ts[i]);
        if t == t0 {
            return Ok(self.thetas[i - 1].clone());
        }
        let w = (t - t0) / (t1 - t0);
        Ok(&self.thetas[i - 1] * (1.0 - w) + &self.thetas[i] * w)
    }
}

/// Exact solutions at random times, reusable across every path compared on
/// the same problem.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    pub points: Vec<ReferencePoint>,
    /// `f_s(θ(s))` for each point.
    pub optimal_values: Vec<f64>,
    pub ref_tol: f64,
    pub seed: u64,
    pub t_max_eval: f64,
}

impl ReferenceSet {
    /// Draws `n_samples` times uniformly from `(0, t_max_eval)` and solves each.
    pub fn sample(
        obj: &RegularizedObjective<'_>,
        t_max_eval: f64,
        n_samples: usize,
        ref_tol: f64,
        seed: u64,
    ) -> Result<Self> {
        if n_samples == 0 {
            return Err(PathError::Argument("need at least one sample".into()));
        }
        if !(t_max_eval > 0.0 && t_max_eval.is_finite()) {
            return Err(PathError::Argument(format!("evaluation horizon must be finite, got {t_max_eval}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let times: Vec<f64> = (0..n_samples)
            .map(|_| loop {
                let s: f64 = rng.random_range(0.0..t_max_eval);
                if s > 0.0 {
                    break s;
                }
            })
            .collect();
        Self::at_times(obj, &times, ref_tol, seed, t_max_eval)
    }

    pub fn at_times(
        obj: &RegularizedObjective<'_>,
        times: &[f64],
        ref_tol: f64,
        seed: u64,
        t_max_eval: f64,
    ) -> Result<Self> {
        let solved: Vec<(ReferencePoint, f64)> = times
            .par_iter()
            .map(|&s| {
                let pt = obj.solve_exact(s, ref_tol, None)?;
                let f = obj.f_value(s, &pt.theta)?;
                Ok((pt, f))
            })
            .collect::<Result<_>>()?;
        let (points, optimal_values) = solved.into_iter().unzip();
        Ok(Self { points, optimal_values, ref_tol, seed, t_max_eval })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Suboptimality of one path against a [`ReferenceSet`].
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub method: String,
    pub epsilon: Option<f64>,
    pub alpha1: f64,
    pub n_grid: usize,
    pub total_inner_steps: u64,
    pub linear_solves: u64,
    pub sup_subopt: f64,
    /// Theoretical bound; `None` when the bound does not apply.
    pub bound_rhs: Option<f64>,
    pub wall_time_s: f64,
    pub seed: u64,
    #[serde(skip)]
    pub per_sample: Vec<(f64, f64)>,
}

impl EvalReport {
    pub fn min_gap(&self) -> f64 {
        self.per_sample.iter().map(|&(_, g)| g).fold(f64::INFINITY, f64::min)
    }

    pub fn bound_holds(&self) -> Option<bool> {
        self.bound_rhs.map(|b| self.sup_subopt <= b)
    }

    pub const CSV_HEADER: [&'static str; 9] =
        ["method", "epsilon", "alpha1", "N_grid", "total_inner_steps", "sup_subopt", "bound_rhs", "wall_time_s", "seed"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            self.epsilon.map_or_else(String::new, |e| format!("{e:e}")),
            format!("{:.16e}", self.alpha1),
            self.n_grid.to_string(),
            self.total_inner_steps.to_string(),
            format!("{:.16e}", self.sup_subopt),
            self.bound_rhs.map_or_else(|| "not certified".to_string(), |b| format!("{b:.16e}")),
            format!("{:.6}", self.wall_time_s),
            self.seed.to_string(),
        ]
    }

    /// Writes several reports with the standard header.
    pub fn write_csv<W: Write>(reports: &[EvalReport], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(Self::CSV_HEADER)?;
        for r in reports {
            w.write_record(r.csv_record())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `s_i,gap_i`.
    pub fn write_samples_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["s_i", "gap_i"])?;
        for &(s, g) in &self.per_sample {
            w.write_record([format!("{s:.16e}"), format!("{g:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Gaps `f_s(θ̃(s)) - f_s(θ(s))` at every reference time, with their maximum.
pub fn suboptimality_gaps(
    path: &ApproxPath,
    obj: &RegularizedObjective<'_>,
    refs: &ReferenceSet,
) -> Result<(f64, Vec<(f64, f64)>)> {
    let mut gaps = Vec::with_capacity(refs.len());
    for (pt, &fopt) in refs.points.iter().zip(&refs.optimal_values) {
        let s = pt.t;
        let approx = path.eval(s.min(path.t_max()))?;
        let f = obj.f_value(s, &approx)?;
        gaps.push((s, f - fopt));
    }
    let sup = gaps.iter().map(|&(_, g)| g).fold(f64::NEG_INFINITY, f64::max);
    Ok((sup, gaps))
}

/// Samples `n_samples` reference times and reports the largest gap of `path`.
pub fn sup_suboptimality(
    path: &ApproxPath,
    obj: &RegularizedObjective<'_>,
    t_max_eval: f64,
    n_samples: usize,
    ref_tol: f64,
    rng_seed: u64,
) -> Result<EvalReport> {
    let refs = ReferenceSet::sample(obj, t_max_eval, n_samples, ref_tol, rng_seed)?;
    let (sup, per_sample) = suboptimality_gaps(path, obj, &refs)?;
    Ok(EvalReport {
        method: "path".into(),
        epsilon: None,
        alpha1: path.ts.get(1).copied().unwrap_or(0.0),
        n_grid: path.ts.len() - 1,
        total_inner_steps: 0,
        linear_solves: 0,
        sup_subopt: sup,
        bound_rhs: None,
        wall_time_s: 0.0,
        seed: rng_seed,
        per_sample,
    })
}

/// Builds an [`EvalReport`] for a solver trace against shared references.
pub fn evaluate_trace(
    trace: &PathTrace,
    obj: &RegularizedObjective<'_>,
    refs: &ReferenceSet,
    epsilon: Option<f64>,
    bound_rhs: Option<f64>,
) -> Result<EvalReport> {
    let path = ApproxPath::from_trace(trace, obj.dim())?;
    let (sup, per_sample) = suboptimality_gaps(&path, obj, refs)?;
    Ok(EvalReport {
        method: trace.method.name().to_string(),
        epsilon,
        alpha1: trace.iterates.first().map_or(0.0, |it| it.alpha),
        n_grid: trace.len(),
        total_inner_steps: trace.total_inner_steps,
        linear_solves: trace.linear_solves,
        sup_subopt: sup,
        bound_rhs,
        wall_time_s: trace.wall_time,
        seed: refs.seed,
        per_sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::AffineLoss;
    use approx::assert_relative_eq;

    fn path() -> ApproxPath {
        let grid = vec![(1.0, Vector::from_vec(vec![1.0, 2.0])), (3.0, Vector::from_vec(vec![3.0, 2.0]))];
        ApproxPath::new(grid, 2, 5.0).unwrap()
    }

    #[test]
    fn eval_at_nodes_midpoints_and_tail() {
        let p = path();
        assert_eq!(p.eval(0.0).unwrap(), Vector::zeros(2));
        assert_eq!(p.eval(1.0).unwrap(), Vector::from_vec(vec![1.0, 2.0]));
        assert_eq!(p.eval(3.0).unwrap(), Vector::from_vec(vec![3.0, 2.0]));
        assert_relative_eq!(p.eval(2.0).unwrap(), Vector::from_vec(vec![2.0, 2.0]), epsilon = 1e-15);
        assert_relative_eq!(p.eval(0.5).unwrap(), Vector::from_vec(vec![0.5, 1.0]), epsilon = 1e-15);
        assert_eq!(p.eval(4.5).unwrap(), Vector::from_vec(vec![3.0, 2.0]));
        assert!(p.eval(5.1).is_err());
        assert!(p.eval(-0.1).is_err());
    }

    #[test]
    fn rejects_unsorted_grid() {
        let grid = vec![(1.0, Vector::zeros(1)), (1.0, Vector::zeros(1))];
        assert!(ApproxPath::new(grid, 1, 2.0).is_err());
    }

    #[test]
    fn exact_path_has_zero_gaps_at_nodes() {
        let loss = AffineLoss::shifted_square(1.0);
        let obj = RegularizedObjective::new(&loss);
        let times = [0.5, 1.0, 2.0];
        let grid: Vec<_> = times.iter().map(|&t| (t, obj.solve_exact(t, 1e-13, None).unwrap().theta)).collect();
        let p = ApproxPath::new(grid, 1, 2.0).unwrap();
        let refs = ReferenceSet::at_times(&obj, &times, 1e-13, 0, 2.0).unwrap();
        let (sup, gaps) = suboptimality_gaps(&p, &obj, &refs).unwrap();
        assert!(sup.abs() < 1e-14);
        assert_eq!(gaps.len(), 3);
    }

    #[test]
    fn report_csv_layout() {
        let r = EvalReport {
            method: "newton".into(),
            epsilon: Some(1e-3),
            alpha1: 0.01,
            n_grid: 10,
            total_inner_steps: 10,
            linear_solves: 10,
            sup_subopt: 1e-6,
            bound_rhs: None,
            wall_time_s: 0.5,
            seed: 3,
            per_sample: vec![(0.5, 1e-7)],
        };
        let mut buf = Vec::new();
        EvalReport::write_csv(std::slice::from_ref(&r), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("method,epsilon,alpha1,N_grid,total_inner_steps,sup_subopt,bound_rhs,wall_time_s,seed\n"));
        assert!(text.contains("not certified"));
        let mut buf = Vec::new();
        r.write_samples_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("s_i,gap_i\n"));
    }
}
