//! Synthetic data, experiment configuration, and CSV result files.

mod config;
mod data;
mod runner;
pub mod schema;

pub use config::{parse_t_max, ExperimentConfig, LossKind};
pub use data::{gen_generative, gen_nonseparable, gen_regression, gen_separable, generate, Generated, Scenario, SEPARABLE_MAX_DRAWS};
pub use runner::{
    build_problem, check_matched_budget, complexity_steps, run_complexity, run_gen_data, run_matrix, run_order,
    run_risk, run_verify_a1, worker_pool, write_atomic, CellKey, CellOutcome, MatrixOutcome, OrderRow, Problem,
    RiskRow, SlopeRow,
};
