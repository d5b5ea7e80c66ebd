use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use pathfollow::experiments::{
    parse_t_max, run_complexity, run_gen_data, run_matrix, run_order, run_risk, run_verify_a1, ExperimentConfig,
    LossKind, MatrixOutcome, Scenario,
};
use pathfollow::homotopy::StepRule;
use pathfollow::loss::ScalarFamily;
use pathfollow::trace::Method;
use pathfollow::PathError;

#[derive(Parser, Debug)]
#[command(name = "pathfollow", version, about = "Approximate regularization paths: solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one or more methods and write trace and evaluation CSVs.
    SolvePath(Common),
    /// Compare methods, optionally at a matched linear-solve budget. Newton
    /// defaults to the practical step rule here.
    Compare(Common),
    /// Fit step-count slopes against 1/ε over an ε ladder.
    Complexity(Common),
    /// Excess logistic risk along each method's path.
    Risk {
        #[command(flatten)]
        common: Common,
        /// Number of intervals on the evaluation grid.
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Sample-check the local Lipschitz-Hessian condition.
    VerifyA1 {
        #[command(flatten)]
        common: Common,
        /// Losses to check: logistic-regression, squared-error, or a scalar family name.
        #[arg(long, value_delimiter = ',')]
        losses: Vec<String>,
        /// Multiplier applied to the stated β.
        #[arg(long, default_value_t = 1.0)]
        beta_scale: f64,
    },
    /// Write generated datasets and their true parameters.
    GenData(Common),
    /// Estimate Euler and RK2 convergence orders over a step ladder.
    Order {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
        alphas: Vec<f64>,
    },
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Args, Debug, Default)]
struct Common {
    /// JSON experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_loss)]
    loss: Option<LossKind>,
    #[arg(long, value_parser = parse_scenario)]
    scenario: Option<Scenario>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long = "method", visible_alias = "methods", value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<Method>>,
    #[arg(long = "epsilon", visible_alias = "epsilons", value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    alpha1: Option<Vec<f64>>,
    #[arg(long)]
    alpha_max: Option<f64>,
    /// Horizon; `inf` is accepted for the homotopy methods.
    #[arg(long, value_parser = parse_t_max)]
    t_max: Option<f64>,
    /// Seeds as a list, with `a-b` ranges allowed.
    #[arg(long = "seed", visible_alias = "seeds", value_delimiter = ',', value_parser = parse_seeds)]
    seeds: Option<Vec<Vec<u64>>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    ref_tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_step_rule)]
    step_rule: Option<StepRule>,
    /// Derive ODE and Rosset grids from this method's step count.
    #[arg(long, value_parser = parse_method)]
    match_budget: Option<Method>,
    /// Constant ODE step when no budget matching is requested.
    #[arg(long)]
    ode_alpha: Option<f64>,
    #[arg(long)]
    eval_t_max: Option<f64>,
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Also write the iterates themselves.
    #[arg(long)]
    dump_theta: bool,
}

fn parse_loss(s: &str) -> Result<LossKind, String> {
    LossKind::from_name(s).ok_or_else(|| format!("unknown loss {s:?} (expected logistic or squared-error)"))
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    Scenario::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Scenario::ALL.iter().map(|v| v.name()).collect();
        format!("unknown scenario {s:?} (expected one of {})", names.join(", "))
    })
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!("unknown method {s:?} (expected one of {})", names.join(", "))
    })
}

fn parse_step_rule(s: &str) -> Result<StepRule, String> {
    match s {
        "certified" => Ok(StepRule::Certified),
        "practical" => Ok(StepRule::Practical),
        _ => Err(format!("unknown step rule {s:?} (expected certified or practical)")),
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    match s.split_once('-') {
        Some((a, b)) => {
            let (a, b): (u64, u64) = (a.parse().map_err(|e| format!("{e}"))?, b.parse().map_err(|e| format!("{e}"))?);
            if a > b {
                return Err(format!("empty seed range {s:?}"));
            }
            Ok((a..=b).collect())
        }
        None => s.parse().map(|v| vec![v]).map_err(|e| format!("bad seed {s:?}: {e}")),
    }
}

impl Common {
    fn resolve(&self, base: ExperimentConfig) -> Result<ExperimentConfig, PathError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => base,
        };
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = &self.$field { cfg.$field = v.clone(); } )* };
        }
        set!(scenario, n, p, sigma2, methods, epsilons, alpha1, t_max, samples, ref_tol, out, step_rule, ode_alpha, eval_t_max, mc_samples);
        if self.loss.is_some() {
            cfg.loss = self.loss;
        }
        if self.alpha_max.is_some() {
            cfg.alpha_max = self.alpha_max;
        }
        if self.match_budget.is_some() {
            cfg.match_budget = self.match_budget;
        }
        if let Some(s) = &self.seeds {
            cfg.seeds = s.iter().flatten().copied().collect();
        }
        if self.dump_theta {
            cfg.dump_theta = true;
        }
        Ok(cfg)
    }
}

/// Failures before any cell runs are usage errors; everything else is a run
/// failure.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<PathError> for Failure {
    fn from(e: PathError) -> Self {
        match e {
            PathError::Config(_) | PathError::Json(_) | PathError::Argument(_) | PathError::Unsupported(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

fn report_matrix(outcome: &MatrixOutcome) -> Result<(), Failure> {
    let summary = outcome.out_dir.join("summary.csv");
    if let Ok(text) = std::fs::read_to_string(&summary) {
        print!("{text}");
    }
    println!("results written to {}", outcome.out_dir.display());
    match outcome.failures() {
        0 => Ok(()),
        n => Err(Failure::Run(format!("{n} of {} cells failed; see failures.csv", outcome.cells.len()))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::SolvePath(c) => {
            let cfg = c.resolve(ExperimentConfig::default())?;
            cfg.validate()?;
            report_matrix(&run_matrix(&cfg)?)
        }
        Command::Compare(c) => {
            let base = ExperimentConfig {
                methods: vec![Method::Newton, Method::Rk2, Method::Euler, Method::Rosset],
                step_rule: StepRule::Practical,
                ..Default::default()
            };
            let cfg = c.resolve(base)?;
            cfg.validate()?;
            report_matrix(&run_matrix(&cfg)?)
        }
        Command::Complexity(c) => {
            let base = ExperimentConfig {
                methods: vec![Method::Newton, Method::Gd],
                epsilons: vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
                ..Default::default()
            };
            let cfg = c.resolve(base)?;
            cfg.validate()?;
            let (outcome, slopes) = run_complexity(&cfg)?;
            for (m, seed, s) in &slopes {
                println!("{m}\tseed {seed}\tslope {s:.4}");
            }
            report_matrix(&outcome)
        }
        Command::Risk { common, points } => {
            let base = ExperimentConfig {
                scenario: Scenario::Generative,
                methods: vec![Method::Newton, Method::Gd],
                ..Default::default()
            };
            let cfg = common.resolve(base)?;
            let rows = run_risk(&cfg, points)?;
            println!("{} risk rows written to {}", rows.len(), cfg.out.join("risk.csv").display());
            Ok(())
        }
        Command::VerifyA1 { common, losses, beta_scale } => {
            let base = ExperimentConfig { samples: 1000, ..Default::default() };
            let cfg = common.resolve(base)?;
            let targets = if losses.is_empty() {
                std::iter::once("logistic-regression".to_string())
                    .chain(ScalarFamily::ALL.iter().map(|f| f.name().to_string()))
                    .collect()
            } else {
                losses
            };
            let rows = run_verify_a1(&cfg, &targets, beta_scale)?;
            for (name, prof, rep) in &rows {
                println!(
                    "{name}\tbeta {:.4e}\tgamma ({}, {})\t{} / {} violations\tworst ratio {:.3e}",
                    prof.beta, prof.gamma1, prof.gamma2, rep.violations, rep.samples, rep.worst_ratio
                );
            }
            Ok(())
        }
        Command::GenData(c) => {
            let cfg = c.resolve(ExperimentConfig::default())?;
            for path in run_gen_data(&cfg)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Order { common, alphas } => {
            let base = ExperimentConfig { n: 50, p: 5, t_max: 10.0, ..Default::default() };
            let cfg = common.resolve(base)?;
            for (m, order, errors) in run_order(&cfg, &alphas)? {
                let order = order.map_or_else(|| "degenerate".to_string(), |o| format!("{o:.4}"));
                let errors: Vec<String> = errors.iter().map(|e| format!("{e:.3e}")).collect();
                println!("{m:?}\torder {order}\terrors {}", errors.join(" "));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            error!("{msg}");
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
