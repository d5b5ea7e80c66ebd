//! Path following by warm-started Newton steps or gradient descent.

mod gd;
mod newton;

pub use gd::{gd_alpha1, gd_alpha_next, gd_inner, gd_should_stop, gradient_steps_fixed, run_gd_path, GdSchedule};
pub use newton::{
    newton_alpha1, newton_alpha_next, newton_should_stop, newton_step, newton_step_grad_form, run_newton_path,
    NewtonSchedule, StepRule, C2,
};

/// Hard cap on grid points for either homotopy.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// `ln(1 + e^x)`, used to evaluate `ln(1 + exp(log_term))` without overflow.
pub(crate) fn ln1p_exp(log_term: f64) -> f64 {
    crate::loss::softplus(log_term)
}

/// `ln(e^t - 1)` for `t > 0`, accurate at both ends.
pub(crate) fn ln_expm1(t: f64) -> f64 {
    if t > 30.0 {
        t + (-(-t).exp()).ln_1p()
    } else {
        t.exp_m1().ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_helpers() {
        assert_relative_eq!(ln1p_exp(0.0), 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(ln1p_exp(800.0), 800.0, epsilon = 1e-12);
        assert_relative_eq!(ln1p_exp(-50.0), (-50f64).exp(), max_relative = 1e-12);
        for &t in &[1e-8_f64, 0.5, 3.0, 29.0, 31.0, 200.0] {
            let direct = if t < 700.0 { t.exp_m1().ln() } else { t };
            assert_relative_eq!(ln_expm1(t), direct, max_relative = 1e-12);
        }
    }
}
