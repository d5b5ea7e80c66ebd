use std::io::Write;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use super::config::{ExperimentConfig, LossKind};
use super::data::{generate, Scenario};
use super::schema;
use crate::approx::{
    complexity_slope, evaluate_trace, gd_bound_rhs, newton_bound_rhs, ode_order_estimate, reference_norm_at,
    risk_kl, ApproxPath, EvalReport, ReferenceSet,
};
use crate::error::{PathError, Result};
use crate::homotopy::{newton_alpha1, run_gd_path, run_newton_path, GdSchedule, NewtonSchedule, StepRule};
use crate::loss::{check_assumption_a1, AffineLoss, Dataset, LossModel, ScalarFamily};
use crate::ode::{rosset_path, run_ode_path, OdeConfig, OdeMethod};
use crate::path::RegularizedObjective;
use crate::trace::{Method, PathTrace};
use crate::Vector;

/// `(method, seed or "all", fitted slope)`.
pub type SlopeRow = (Method, String, f64);
/// `(path label, seed, t, excess risk)`.
pub type RiskRow = (String, u64, f64, f64);
/// `(integrator, fitted order, sup errors per α)`.
pub type OrderRow = (OdeMethod, Option<f64>, Vec<f64>);
type NewtonKey = (u64, StepRule, u64);
type GroupKey = (Method, f64, Option<f64>);

/// A generated dataset with its fitted loss.
pub struct Problem {
    pub seed: u64,
    pub data: Dataset,
    pub truth: Vector,
    pub loss: AffineLoss,
}

pub fn build_problem(cfg: &ExperimentConfig, seed: u64) -> Result<Problem> {
    let gen = generate(cfg.scenario, cfg.n, cfg.p, cfg.sigma2, seed)?;
    let loss = match cfg.loss_kind() {
        LossKind::Logistic => AffineLoss::logistic(&gen.data)?,
        LossKind::SquaredError => AffineLoss::squared_error(&gen.data)?,
    };
    Ok(Problem { seed, data: gen.data, truth: gen.truth, loss })
}

/// Identifies one cell of the experiment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CellKey {
    pub method: Method,
    pub epsilon: f64,
    pub alpha1: Option<f64>,
    pub seed: u64,
}

impl CellKey {
    pub fn file_stem(&self) -> String {
        let a1 = self.alpha1.map_or_else(|| "auto".to_string(), |a| format!("{a:e}"));
        format!("{}_eps{:e}_a1{}_seed{}", self.method, self.epsilon, a1, self.seed)
    }
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub key: CellKey,
    pub result: std::result::Result<EvalReport, String>,
}

/// Everything written by [`run_matrix`].
#[derive(Debug, Clone)]
pub struct MatrixOutcome {
    pub cells: Vec<CellOutcome>,
    pub out_dir: PathBuf,
}

impl MatrixOutcome {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.result.is_err()).count()
    }
}

/// Worker pool capped by `PATHFOLLOW_THREADS` when set.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = std::env::var("PATHFOLLOW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| PathError::Config(format!("could not start worker pool: {e}")))
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut std::fs::File) -> Result<()>,
{
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        fill(&mut f)?;
        f.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn newton_schedule(cfg: &ExperimentConfig, obj: &RegularizedObjective<'_>, eps: f64, a1: Option<f64>) -> Result<NewtonSchedule> {
    let mut s = NewtonSchedule::new(obj, eps, cfg.t_max)?.with_rule(cfg.step_rule);
    if let Some(am) = cfg.alpha_max {
        s = s.with_alpha_max(am)?;
    }
    if let Some(a) = a1 {
        s = s.with_alpha1(a)?;
    }
    Ok(s)
}

fn gd_schedule(cfg: &ExperimentConfig, obj: &RegularizedObjective<'_>, eps: f64, a1: Option<f64>) -> Result<GdSchedule> {
    let s = GdSchedule::new(obj, eps, cfg.t_max)?;
    match a1 {
        Some(a) => s.with_alpha1(a),
        None => Ok(s),
    }
}

struct SeedContext<'a> {
    cfg: &'a ExperimentConfig,
    obj: RegularizedObjective<'a>,
    refs: ReferenceSet,
    /// `‖θ(t_max)‖`, or `None` when it is infinite or not yet computed.
    tail_norm: std::cell::OnceCell<Option<f64>>,
    /// Newton runs keyed by `(α₁, rule, α_max)`: the schedule depends on ε
    /// only through `α₁`, so ε values that resolve to the same first step
    /// share one run.
    newton_runs: std::cell::RefCell<Vec<(NewtonKey, PathTrace)>>,
}

impl SeedContext<'_> {
    fn tail_norm(&self) -> Result<Option<f64>> {
        if let Some(v) = self.tail_norm.get() {
            return Ok(*v);
        }
        let v = if !self.cfg.t_max.is_finite() && self.cfg.scenario == Scenario::Separable {
            None
        } else {
            Some(reference_norm_at(&self.obj, self.cfg.t_max, self.cfg.ref_tol)?)
        };
        let _ = self.tail_norm.set(v);
        Ok(v)
    }

    fn run_homotopy(&self, method: Method, eps: f64, a1: Option<f64>) -> Result<(PathTrace, Option<f64>)> {
        match method {
            Method::Newton => {
                let s = newton_schedule(self.cfg, &self.obj, eps, a1)?;
                let key = (newton_alpha1(&s).to_bits(), s.rule, s.alpha_max.to_bits());
                let cached = self.newton_runs.borrow().iter().find(|(k, _)| *k == key).map(|(_, t)| t.clone());
                let trace = match cached {
                    Some(t) => t,
                    None => {
                        let t = run_newton_path(&self.obj, &s)?;
                        self.newton_runs.borrow_mut().push((key, t.clone()));
                        t
                    }
                };
                let tail = if trace.last_t() > self.cfg.t_max { None } else { self.tail_norm()? };
                let bound = newton_bound_rhs(&trace, &s, tail);
                Ok((trace, bound))
            }
            Method::Gd => {
                let s = gd_schedule(self.cfg, &self.obj, eps, a1)?;
                let trace = run_gd_path(&self.obj, &s)?;
                let tail = if trace.last_t() >= self.cfg.t_max { None } else { self.tail_norm()? };
                let bound = gd_bound_rhs(&trace, &s, tail);
                Ok((trace, bound))
            }
            _ => Err(PathError::Argument(format!("{method} is not a homotopy method"))),
        }
    }

    fn run_fixed_grid(&self, method: Method, newton: Option<&PathTrace>) -> Result<PathTrace> {
        let t_max = self.cfg.t_max;
        match newton {
            Some(nt) => {
                let n = nt.len();
                if n == 0 {
                    return Err(PathError::Argument("newton run produced no grid points to match".into()));
                }
                let alpha = t_max / n as f64;
                let trace = match method {
                    Method::Euler => run_ode_path(&self.obj, &OdeConfig::new(OdeMethod::Euler, alpha, t_max)?)?,
                    Method::Rk2 => {
                        run_ode_path(&self.obj, &OdeConfig::new(OdeMethod::Rk2, (2.0 * alpha).min(t_max), t_max)?)?
                    }
                    Method::Rosset => {
                        let t_min = nt.iterates[0].t;
                        rosset_path(&self.obj, n.max(2), t_min.min(0.5 * t_max), t_max, self.cfg.ref_tol)?
                    }
                    _ => unreachable!("fixed-grid methods only"),
                };
                check_matched_budget(method, n as u64, &trace)?;
                Ok(trace)
            }
            None => {
                let a = self.cfg.ode_alpha;
                match method {
                    Method::Euler => run_ode_path(&self.obj, &OdeConfig::new(OdeMethod::Euler, a, t_max)?),
                    Method::Rk2 => run_ode_path(&self.obj, &OdeConfig::new(OdeMethod::Rk2, a, t_max)?),
                    Method::Rosset => {
                        let n = OdeConfig::new(OdeMethod::Euler, a, t_max)?.num_steps() + 1;
                        rosset_path(&self.obj, n, a.min(0.5 * t_max), t_max, self.cfg.ref_tol)
                    }
                    _ => unreachable!("fixed-grid methods only"),
                }
            }
        }
    }
}

/// Linear-solve counters under budget matching: Euler spends exactly the
/// Newton count, RK2 at most one more (its last step may be partial), and
/// Rosset one fewer (its first point is an exact solve).
pub fn check_matched_budget(method: Method, newton_solves: u64, trace: &PathTrace) -> Result<()> {
    let n = newton_solves;
    let ok = match method {
        Method::Euler => trace.linear_solves == n,
        Method::Rk2 => n == 1 && trace.linear_solves == 2 || trace.linear_solves == n || trace.linear_solves == n + 1,
        Method::Rosset => trace.linear_solves + 1 == n.max(2),
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(PathError::Numerical(format!(
            "{method} used {} linear solves against a newton budget of {n}",
            trace.linear_solves
        )))
    }
}

fn write_cell_files(dir: &Path, key: &CellKey, trace: &PathTrace, report: &EvalReport, theta: bool) -> Result<()> {
    let stem = key.file_stem();
    write_atomic(&dir.join(format!("{stem}.trace.csv")), |f| trace.write_csv(f))?;
    write_atomic(&dir.join(format!("{stem}.samples.csv")), |f| report.write_samples_csv(f))?;
    if theta {
        write_atomic(&dir.join(format!("{stem}.theta.csv")), |f| trace.write_theta_csv(f))?;
    }
    Ok(())
}

fn method_order(methods: &[Method]) -> Vec<Method> {
    let mut out: Vec<Method> = Method::ALL.iter().copied().filter(|m| methods.contains(m)).collect();
    out.dedup();
    out
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, cell_dir: &Path) -> Vec<CellOutcome> {
    let settings: Vec<(f64, Option<f64>)> = cfg
        .epsilons
        .iter()
        .flat_map(|&e| {
            if cfg.alpha1.is_empty() {
                vec![(e, None)]
            } else {
                cfg.alpha1.iter().map(|&a| (e, Some(a))).collect()
            }
        })
        .collect();
    let methods = method_order(&cfg.methods);
    let fail_all = |msg: String| -> Vec<CellOutcome> {
        settings
            .iter()
            .flat_map(|&(e, a)| {
                let msg = msg.clone();
                methods
                    .iter()
                    .map(move |&m| CellOutcome { key: CellKey { method: m, epsilon: e, alpha1: a, seed }, result: Err(msg.clone()) })
            })
            .collect()
    };
    let problem = match build_problem(cfg, seed) {
        Ok(p) => p,
        Err(e) => return fail_all(e.to_string()),
    };
    let obj = RegularizedObjective::new(&problem.loss);
    let refs = match ReferenceSet::sample(&obj, cfg.evaluation_horizon(), cfg.samples, cfg.ref_tol, seed) {
        Ok(r) => r,
        Err(e) => return fail_all(format!("reference solve failed: {e}")),
    };
    let ctx = SeedContext { cfg, obj, refs, tail_norm: std::cell::OnceCell::new(), newton_runs: Default::default() };

    let mut out = Vec::new();
    for &(eps, a1) in &settings {
        let need_newton = cfg.match_budget.is_some() || methods.contains(&Method::Newton);
        let newton_run: Option<std::result::Result<(PathTrace, Option<f64>), String>> =
            need_newton.then(|| ctx.run_homotopy(Method::Newton, eps, a1).map_err(|e| e.to_string()));
        let newton_trace = newton_run.as_ref().map(|r| r.as_ref().map(|(t, _)| t));
        for &method in &methods {
            let key = CellKey { method, epsilon: eps, alpha1: a1, seed };
            let result = (|| -> std::result::Result<EvalReport, String> {
                let (trace, bound, eps_field) = match method {
                    Method::Newton => {
                        let (trace, bound) = newton_run.clone().expect("newton run is computed when requested")?;
                        (trace, bound, Some(eps))
                    }
                    Method::Gd => {
                        let (trace, bound) = ctx.run_homotopy(method, eps, a1).map_err(|e| e.to_string())?;
                        (trace, bound, Some(eps))
                    }
                    _ => {
                        let matched = match (&cfg.match_budget, &newton_trace) {
                            (Some(_), Some(Ok(t))) => Some(*t),
                            (Some(_), Some(Err(e))) => return Err(format!("newton budget run failed: {e}")),
                            _ => None,
                        };
                        (ctx.run_fixed_grid(method, matched).map_err(|e| e.to_string())?, None, None)
                    }
                };
                let mut report = evaluate_trace(&trace, &ctx.obj, &ctx.refs, eps_field, bound).map_err(|e| e.to_string())?;
                // Cells of one setting share its α₁ so they can be grouped.
                if let Some(a) = a1 {
                    report.alpha1 = a;
                }
                write_cell_files(cell_dir, &key, &trace, &report, cfg.dump_theta).map_err(|e| e.to_string())?;
                Ok(report)
            })();
            if let Err(e) = &result {
                warn!("cell {} failed: {e}", key.file_stem());
            }
            out.push(CellOutcome { key, result });
        }
    }
    out
}

/// Runs every (seed, setting, method) cell and writes `eval.csv`,
/// `summary.csv`, `failures.csv`, `config.json`, and per-cell trace and
/// sample files under `cfg.out`.
pub fn run_matrix(cfg: &ExperimentConfig) -> Result<MatrixOutcome> {
    cfg.validate()?;
    let out_dir = cfg.out.clone();
    let cell_dir = out_dir.join("cells");
    std::fs::create_dir_all(&cell_dir)?;
    write_atomic(&out_dir.join("config.json"), |f| Ok(f.write_all(cfg.to_json()?.as_bytes())?))?;
    let pool = worker_pool()?;
    info!("running {} seeds on {} threads", cfg.seeds.len(), pool.current_num_threads());
    let per_seed: Vec<Vec<CellOutcome>> =
        pool.install(|| cfg.seeds.par_iter().map(|&seed| run_seed(cfg, seed, &cell_dir)).collect());
    let cells: Vec<CellOutcome> = per_seed.into_iter().flatten().collect();

    let reports: Vec<EvalReport> = cells.iter().filter_map(|c| c.result.as_ref().ok().cloned()).collect();
    write_atomic(&out_dir.join("eval.csv"), |f| EvalReport::write_csv(&reports, f))?;
    write_atomic(&out_dir.join("failures.csv"), |f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(schema::FAILURES)?;
        for c in &cells {
            if let Err(e) = &c.result {
                w.write_record([
                    c.key.method.name().to_string(),
                    format!("{:e}", c.key.epsilon),
                    c.key.alpha1.map_or_else(String::new, |a| format!("{a:e}")),
                    c.key.seed.to_string(),
                    e.clone(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    })?;
    write_atomic(&out_dir.join("summary.csv"), |f| write_summary(&cells, f))?;
    Ok(MatrixOutcome { cells, out_dir })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn write_summary<W: Write>(cells: &[CellOutcome], writer: W) -> Result<()> {
    let mut groups: Vec<(GroupKey, Vec<&CellOutcome>)> = Vec::new();
    for c in cells {
        let g = (c.key.method, c.key.epsilon, c.key.alpha1);
        match groups.iter_mut().find(|(k, _)| *k == g) {
            Some((_, v)) => v.push(c),
            None => groups.push((g, vec![c])),
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(schema::SUMMARY)?;
    for ((method, eps, a1), members) in groups {
        let ok: Vec<&EvalReport> = members.iter().filter_map(|c| c.result.as_ref().ok()).collect();
        let mut subs: Vec<f64> = ok.iter().map(|r| r.sup_subopt).collect();
        let max_sub = subs.iter().cloned().fold(f64::NAN, f64::max);
        let mean = |f: &dyn Fn(&EvalReport) -> f64| {
            if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
            }
        };
        let certified: Vec<bool> = ok.iter().filter_map(|r| r.bound_holds()).collect();
        let bound = if certified.is_empty() {
            "n/a".to_string()
        } else {
            format!("{}/{}", certified.iter().filter(|&&b| b).count(), certified.len())
        };
        w.write_record([
            method.name().to_string(),
            format!("{eps:e}"),
            a1.map_or_else(String::new, |a| format!("{a:e}")),
            members.len().to_string(),
            (members.len() - ok.len()).to_string(),
            format!("{:.6e}", median(&mut subs)),
            format!("{max_sub:.6e}"),
            format!("{:.3}", mean(&|r| r.n_grid as f64)),
            format!("{:.3}", mean(&|r| r.total_inner_steps as f64)),
            bound,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Step counts used for complexity fits: grid points for Newton, total
/// gradient steps for gradient descent.
pub fn complexity_steps(report: &EvalReport) -> f64 {
    if report.method == Method::Gd.name() {
        report.total_inner_steps as f64
    } else {
        report.n_grid as f64
    }
}

/// Runs the matrix and fits `ln(steps)` against `ln(1/ε)` per method and
/// seed, plus once on the per-ε medians (seed `all`).
pub fn run_complexity(cfg: &ExperimentConfig) -> Result<(MatrixOutcome, Vec<SlopeRow>)> {
    let outcome = run_matrix(cfg)?;
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for &method in &method_order(&cfg.methods) {
        if !matches!(method, Method::Newton | Method::Gd) {
            continue;
        }
        let mut by_eps: Vec<(f64, Vec<f64>)> = cfg.epsilons.iter().map(|&e| (e, Vec::new())).collect();
        for &seed in &cfg.seeds {
            let pts: Vec<(f64, f64)> = outcome
                .cells
                .iter()
                .filter(|c| c.key.method == method && c.key.seed == seed && c.key.alpha1.is_none())
                .filter_map(|c| c.result.as_ref().ok().map(|r| (c.key.epsilon, r)))
                .map(|(e, r)| {
                    rows.push([
                        method.name().to_string(),
                        format!("{e:e}"),
                        seed.to_string(),
                        format!("{}", complexity_steps(r)),
                        format!("{:.16e}", r.sup_subopt),
                        format!("{:.6}", r.wall_time_s),
                    ]);
                    (e, complexity_steps(r))
                })
                .collect();
            for &(e, s) in &pts {
                if let Some(slot) = by_eps.iter_mut().find(|(x, _)| *x == e) {
                    slot.1.push(s);
                }
            }
            if let Ok(s) = complexity_slope(&pts) {
                slopes.push((method, seed.to_string(), s));
            }
        }
        let pooled: Vec<(f64, f64)> =
            by_eps.into_iter().filter(|(_, v)| !v.is_empty()).map(|(e, mut v)| (e, median(&mut v))).collect();
        if let Ok(s) = complexity_slope(&pooled) {
            slopes.push((method, "all".to_string(), s));
        }
    }
    write_atomic(&outcome.out_dir.join("complexity.csv"), |f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(schema::COMPLEXITY)?;
        for r in &rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    })?;
    write_atomic(&outcome.out_dir.join("complexity_slopes.csv"), |f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(schema::COMPLEXITY_SLOPES)?;
        for (m, seed, s) in &slopes {
            w.write_record([m.name().to_string(), seed.clone(), format!("{s:.6}")])?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok((outcome, slopes))
}

/// Excess logistic risk along each method's path and along an exact path
/// (method `exact`), written to `risk.csv`.
pub fn run_risk(cfg: &ExperimentConfig, points: usize) -> Result<Vec<RiskRow>> {
    cfg.validate()?;
    if cfg.loss_kind() != LossKind::Logistic {
        return Err(PathError::Config("risk curves need the logistic loss".into()));
    }
    if !cfg.t_max.is_finite() {
        return Err(PathError::Config("risk curves need a finite t_max".into()));
    }
    std::fs::create_dir_all(&cfg.out)?;
    let horizon = cfg.t_max;
    let grid: Vec<f64> = (0..=points.max(1)).map(|i| horizon * i as f64 / points.max(1) as f64).collect();
    let pool = worker_pool()?;
    let per_seed: Vec<Result<Vec<RiskRow>>> = pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let problem = build_problem(cfg, seed)?;
                let obj = RegularizedObjective::new(&problem.loss);
                let mut paths: Vec<(String, ApproxPath)> = Vec::new();
                let exact_times: Vec<f64> = grid.iter().copied().filter(|&t| t > 0.0).collect();
                let exact: Vec<(f64, Vector)> = exact_times
                    .iter()
                    .map(|&t| Ok((t, obj.solve_exact(t, cfg.ref_tol, None)?.theta)))
                    .collect::<Result<_>>()?;
                paths.push(("exact".into(), ApproxPath::new(exact, obj.dim(), horizon)?));
                for &m in &method_order(&cfg.methods) {
                    let trace = match m {
                        Method::Newton => run_newton_path(&obj, &newton_schedule(cfg, &obj, cfg.epsilons[0], cfg.alpha1.first().copied())?)?,
                        Method::Gd => run_gd_path(&obj, &gd_schedule(cfg, &obj, cfg.epsilons[0], None)?)?,
                        Method::Euler => run_ode_path(&obj, &OdeConfig::new(OdeMethod::Euler, cfg.ode_alpha, horizon)?)?,
                        Method::Rk2 => run_ode_path(&obj, &OdeConfig::new(OdeMethod::Rk2, cfg.ode_alpha, horizon)?)?,
                        Method::Rosset => {
                            let n = OdeConfig::new(OdeMethod::Euler, cfg.ode_alpha, horizon)?.num_steps() + 1;
                            rosset_path(&obj, n, cfg.ode_alpha.min(0.5 * horizon), horizon, cfg.ref_tol)?
                        }
                    };
                    let mut path = ApproxPath::from_trace(&trace, obj.dim())?;
                    if !trace.t_max.is_finite() || trace.t_max < horizon {
                        let grid_pts = trace.iterates.iter().map(|it| (it.t, it.theta.clone())).collect();
                        path = ApproxPath::new(grid_pts, obj.dim(), f64::INFINITY)?;
                    }
                    paths.push((m.name().to_string(), path));
                }
                let mut rows = Vec::new();
                for (name, path) in &paths {
                    for (t, r) in risk_kl(path, &problem.truth, &grid, cfg.mc_samples, seed ^ 0x5eed)? {
                        rows.push((name.clone(), seed, t, r));
                    }
                }
                Ok(rows)
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    write_atomic(&cfg.out.join("risk.csv"), |f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(schema::RISK)?;
        for (m, s, t, r) in &rows {
            w.write_record([m.clone(), s.to_string(), format!("{t:.6}"), format!("{r:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(rows)
}

/// Measures Euler and RK2 orders on the first seed's problem over a step
/// ladder; writes `order.csv`.
pub fn run_order(cfg: &ExperimentConfig, alphas: &[f64]) -> Result<Vec<OrderRow>> {
    cfg.validate()?;
    if !cfg.t_max.is_finite() {
        return Err(PathError::Config("order estimates need a finite t_max".into()));
    }
    std::fs::create_dir_all(&cfg.out)?;
    let problem = build_problem(cfg, cfg.seeds[0])?;
    let obj = RegularizedObjective::new(&problem.loss);
    let mut results = Vec::new();
    for m in [OdeMethod::Euler, OdeMethod::Rk2] {
        let (order, errors) = ode_order_estimate(&obj, m, alphas, cfg.t_max, cfg.ref_tol)?;
        results.push((m, order, errors));
    }
    write_atomic(&cfg.out.join("order.csv"), |f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(schema::ORDER)?;
        for (m, order, errors) in &results {
            let name = if *m == OdeMethod::Euler { "euler" } else { "rk2" };
            for (a, e) in alphas.iter().zip(errors) {
                w.write_record([
                    name.to_string(),
                    format!("{a:e}"),
                    format!("{e:.16e}"),
                    order.map_or_else(|| "degenerate".to_string(), |o| format!("{o:.6}")),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(results)
}

/// Runs the A1 verifier for each named target: `logistic-regression` and
/// `squared-error` use generated data, any other name must be a scalar
/// family. β is multiplied by `beta_scale`.
pub fn run_verify_a1(
    cfg: &ExperimentConfig,
    targets: &[String],
    beta_scale: f64,
) -> Result<Vec<(String, crate::loss::SmoothnessProfile, crate::loss::A1Report)>> {
    if !(beta_scale > 0.0) {
        return Err(PathError::Config("beta scale must be positive".into()));
    }
    std::fs::create_dir_all(&cfg.out)?;
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    let mut rows = Vec::new();
    for name in targets {
        let loss = match name.as_str() {
            "logistic-regression" => {
                let gen = generate(
                    if cfg.scenario.is_classification() { cfg.scenario } else { Scenario::Nonseparable },
                    cfg.n,
                    cfg.p,
                    cfg.sigma2,
                    seed,
                )?;
                AffineLoss::logistic(&gen.data)?
            }
            "squared-error" | "ridge" => {
                let gen = generate(Scenario::Regression, cfg.n, cfg.p, cfg.sigma2, seed)?;
                AffineLoss::squared_error(&gen.data)?
            }
            other => AffineLoss::scalar(
                ScalarFamily::from_name(other).ok_or_else(|| PathError::Config(format!("unknown loss {other:?}")))?,
            ),
        };
        let prof = loss.profile()?;
        let prof = prof.with_beta(prof.beta * beta_scale);
        let rep = check_assumption_a1(&loss, &prof, cfg.samples, seed)?;
        rows.push((name.clone(), prof, rep));
    }
    write_atomic(&cfg.out.join("a1.csv"), |f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(schema::A1)?;
        for (name, prof, rep) in &rows {
            w.write_record([
                name.clone(),
                format!("{:.16e}", prof.beta),
                prof.gamma1.to_string(),
                prof.gamma2.to_string(),
                rep.samples.to_string(),
                rep.violations.to_string(),
                format!("{:.6e}", rep.worst_ratio),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(rows)
}

/// Writes the dataset (`data.csv`) and its generating parameter (`truth.csv`).
pub fn run_gen_data(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)?;
    let mut written = Vec::new();
    for &seed in &cfg.seeds {
        let gen = generate(cfg.scenario, cfg.n, cfg.p, cfg.sigma2, seed)?;
        let stem = format!("{}_n{}_p{}_seed{}", cfg.scenario.name(), cfg.n, cfg.p, seed);
        let data_path = cfg.out.join(format!("{stem}.data.csv"));
        write_atomic(&data_path, |f| gen.data.write_csv(f))?;
        let truth_path = cfg.out.join(format!("{stem}.truth.csv"));
        write_atomic(&truth_path, |f| {
            let mut w = csv::Writer::from_writer(f);
            w.write_record(["j", "theta"])?;
            for (j, v) in gen.truth.iter().enumerate() {
                w.write_record([(j + 1).to_string(), format!("{v:.16e}")])?;
            }
            w.flush()?;
            Ok(())
        })?;
        written.push(data_path);
        written.push(truth_path);
    }
    Ok(written)
}
