//! Shared oracles and helpers for the acceptance suite.

use ndarray::{Array1, Array2};

use ncpath_core::path::PathResult;
use ncpath_core::prox::StageResult;

/// Cyclic coordinate-descent lasso run to a tight update tolerance; the
/// independent optimum for the convex specialization checks.
pub fn lasso_cd(
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
    max_sweeps: usize,
    update_tol: f64,
) -> Array1<f64> {
    let (n, d) = x.dim();
    let nf = n as f64;
    let mut beta = Array1::<f64>::zeros(d);
    let mut resid = y.clone();
    let col_sq: Vec<f64> = (0..d).map(|j| x.column(j).dot(&x.column(j)) / nf).collect();
    for _ in 0..max_sweeps {
        let mut max_update = 0.0f64;
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let xj = x.column(j);
            let rho = xj.dot(&resid) / nf + col_sq[j] * beta[j];
            let new = if rho.abs() <= lambda { 0.0 } else { (rho - lambda * rho.signum()) / col_sq[j] };
            let delta = new - beta[j];
            if delta != 0.0 {
                resid.zip_mut_with(&xj, |r, &xij| *r -= delta * xij);
                beta[j] = new;
                max_update = max_update.max(delta.abs());
            }
        }
        if max_update < update_tol {
            break;
        }
    }
    beta
}

/// Counts violations of the per-iteration descent inequality
/// `φ(β^k) ≤ φ(β^{k−1}) − (L^k/2)‖Δ‖² + 1e−10` over a stage trace.
pub fn descent_violations(stage: &StageResult) -> usize {
    let mut violations = 0;
    let mut prev_phi = stage.phi_start;
    for rec in &stage.trace {
        if rec.phi > prev_phi - 0.5 * rec.l * rec.step_norm * rec.step_norm + 1e-10 {
            violations += 1;
        }
        prev_phi = rec.phi;
    }
    violations
}

/// Descent violations summed over every stage of a path.
pub fn path_descent_violations(path: &PathResult) -> usize {
    path.stages.iter().map(|s| descent_violations(&s.result)).sum()
}

/// Prints the per-criterion verdict line and panics on failure.
pub fn report(num: usize, name: &str, pass: bool, detail: &str) {
    println!("[{}] criterion {num:02} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {num:02} ({name}) failed: {detail}");
}
