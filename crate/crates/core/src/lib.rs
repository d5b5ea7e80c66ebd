//! Approximate solution paths for ℓ₂-regularized smooth convex losses.
//!
//! The path is `θ(t) = argmin (e^t - 1) L(θ) + ½‖θ‖²` for `t ∈ [0, t_max]`.
//! Solvers produce a grid `(t_k, θ_k)` which [`approx::ApproxPath`] turns into
//! a piecewise-linear curve; the `approx` module measures its suboptimality and
//! evaluates the matching theoretical bounds.
//!
//! ```
//! use pathfollow::loss::{AffineLoss, LossModel};
//! use pathfollow::path::RegularizedObjective;
//! use pathfollow::homotopy::{run_newton_path, NewtonSchedule};
//!
//! let loss = AffineLoss::shifted_square(1.0);
//! let obj = RegularizedObjective::new(&loss);
//! let sched = NewtonSchedule::new(&obj, 1e-4, 5.0).unwrap();
//! let trace = run_newton_path(&obj, &sched).unwrap();
//! assert!(trace.iterates.last().unwrap().t > 5.0);
//! ```

// Negated comparisons below are NaN guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod error;
pub mod experiments;
pub mod homotopy;
pub mod linalg;
pub mod loss;
pub mod ode;
pub mod path;
pub mod trace;

pub use error::{PathError, Result};

/// Dense column vector used for parameters and gradients.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used for designs and Hessians.
pub type Matrix = nalgebra::DMatrix<f64>;
