//! Column layouts of every CSV file the experiments write.
//!
//! Downstream plotting reads these files by column name, so the headers are
//! part of the public interface.

use std::path::Path;

use crate::error::{PathError, Result};

pub const TRACE: &[&str] = &["k", "t_k", "alpha_k", "g_norm", "theta_norm", "inner_steps"];
pub const EVAL: &[&str] =
    &["method", "epsilon", "alpha1", "N_grid", "total_inner_steps", "sup_subopt", "bound_rhs", "wall_time_s", "seed"];
pub const SAMPLES: &[&str] = &["s_i", "gap_i"];
pub const SUMMARY: &[&str] = &[
    "method",
    "epsilon",
    "alpha1",
    "runs",
    "failures",
    "median_sup_subopt",
    "max_sup_subopt",
    "mean_N_grid",
    "mean_total_inner_steps",
    "bound_holds",
];
pub const COMPLEXITY: &[&str] = &["method", "epsilon", "seed", "steps", "sup_subopt", "wall_time_s"];
pub const COMPLEXITY_SLOPES: &[&str] = &["method", "seed", "slope"];
pub const RISK: &[&str] = &["method", "seed", "t", "risk"];
pub const ORDER: &[&str] = &["method", "alpha", "max_error", "order"];
pub const A1: &[&str] = &["loss", "beta", "gamma1", "gamma2", "samples", "violations", "worst_ratio"];
pub const FAILURES: &[&str] = &["method", "epsilon", "alpha1", "seed", "error"];

/// Checks that the header of the CSV at `path` is exactly `expected`.
pub fn check_header(path: &Path, expected: &[&str]) -> Result<()> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        let missing: Vec<&&str> = expected.iter().filter(|c| !got.contains(c)).collect();
        return Err(PathError::Config(format!(
            "{}: header {:?} does not match expected {:?} (missing {:?})",
            path.display(),
            got,
            expected,
            missing
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_check_reports_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "s_i,gap_i\n0.5,1e-3\n").unwrap();
        check_header(&path, SAMPLES).unwrap();
        let err = check_header(&path, TRACE).unwrap_err().to_string();
        assert!(err.contains("missing"));
    }
}
