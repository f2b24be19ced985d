use serde::{Deserialize, Serialize};

use super::{grad_wrt_input, ScalarFunction};

/// Floor on the relative-error denominator.
pub const REL_ERROR_FLOOR: f64 = 1e-8;

/// Analytic vs. central-difference gradient comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_rel_error: f64,
    pub eps: f64,
}

impl GradientReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error < tol
    }
}

/// `|a - b| / max(|a|, |b|, 1e-8)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_ERROR_FLOOR)
}

/// Largest entry-wise difference, relative to the largest entry magnitude
/// of either vector (floored). Near-zero entries are thereby judged on the
/// gradient's own scale rather than against finite-difference round-off.
/// Any non-finite entry makes the result infinite.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "gradient length mismatch");
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let scale = a.iter().chain(b).fold(REL_ERROR_FLOOR, |m, v| m.max(v.abs()));
    let worst = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    worst / scale
}

/// Central differences `(f(x + eps e_i) - f(x - eps e_i)) / 2 eps` over the input.
pub fn central_difference<F: ScalarFunction>(f: &F, params: &[f64], point: &[f64], eps: f64) -> Vec<f64> {
    let mut x = point.to_vec();
    (0..point.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + eps;
            let hi = f.eval(params, &x);
            x[i] = orig - eps;
            let lo = f.eval(params, &x);
            x[i] = orig;
            (hi - lo) / (2.0 * eps)
        })
        .collect()
}

/// Compares the tape gradient of `f` w.r.t. its input at `point` with
/// central differences. Non-finite values end up inside the report.
pub fn check_gradient<F: ScalarFunction>(f: &F, params: &[f64], point: &[f64], eps: f64) -> GradientReport {
    assert!(eps > 0.0, "finite-difference step must be positive");
    let analytic = grad_wrt_input(f, params, point).1;
    let numeric = central_difference(f, params, point, eps);
    let max_rel_error = max_relative_error(&analytic, &numeric);
    GradientReport {
        analytic,
        numeric,
        max_rel_error,
        eps,
    }
}
