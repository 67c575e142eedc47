//! Evaluation tooling: oracle estimator, support-recovery metrics,
//! sparse-eigenvalue probes, and objective-gap traces along a path.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::loss::{EllipticalCov, LossModel};
use crate::path::PathResult;
use crate::penalty::Penalty;
use crate::Result;

/// Default tolerance for deciding that a coefficient is nonzero. Prox output
/// carries hard zeros, so any tiny positive value works; it is configurable
/// for comparisons against dense baselines.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// True parameter vector with its support, for synthetic experiments.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// True coefficient vector `β*`.
    pub beta_star: Array1<f64>,
    /// Indices of the nonzero coordinates.
    pub support: Vec<usize>,
    /// `|support|`.
    pub s_star: usize,
}

impl GroundTruth {
    /// Derives the support from the nonzero pattern of `beta_star`.
    pub fn new(beta_star: Array1<f64>) -> Self {
        let support: Vec<usize> =
            beta_star.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(j, _)| j).collect();
        let s_star = support.len();
        GroundTruth { beta_star, support, s_star }
    }
}

/// Support-recovery counts and estimation error of one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryMetrics {
    /// True positives: on-support coordinates detected as nonzero.
    pub tps: usize,
    /// False positives: off-support coordinates detected as nonzero.
    pub fps: usize,
    /// `‖β̂ − β*‖₂`.
    pub l2_error: f64,
    /// `tps = s*` and `fps = 0`.
    pub exact_support: bool,
}

/// Computes recovery metrics with the given nonzero threshold.
pub fn recovery_metrics(
    beta_hat: ArrayView1<'_, f64>,
    truth: &GroundTruth,
    zero_tol: f64,
) -> RecoveryMetrics {
    let on: Vec<bool> = {
        let mut v = vec![false; beta_hat.len()];
        for &j in &truth.support {
            v[j] = true;
        }
        v
    };
    let mut tps = 0;
    let mut fps = 0;
    for (j, &b) in beta_hat.iter().enumerate() {
        if b.abs() > zero_tol {
            if on[j] {
                tps += 1;
            } else {
                fps += 1;
            }
        }
    }
    let diff = &beta_hat - &truth.beta_star;
    RecoveryMetrics {
        tps,
        fps,
        l2_error: diff.dot(&diff).sqrt(),
        exact_support: tps == truth.s_star && fps == 0,
    }
}

/// Unpenalized minimizer of the loss restricted to a support set; all
/// off-support coordinates are exactly zero.
///
/// Least squares solves the restricted normal equations in closed form;
/// logistic and elliptical losses run projected gradient descent on the
/// restricted coordinates until the restricted gradient norm (or the scaled
/// step residual, when the ball is active) falls below `1e-8`.
pub fn oracle_estimator(model: &LossModel, support: &[usize], radius: f64) -> Result<Array1<f64>> {
    if support.is_empty() {
        return Err(Error::InvalidConfig("oracle_estimator requires a nonempty support".into()));
    }
    let d = model.dim();
    if let Some(&j) = support.iter().find(|&&j| j >= d) {
        return Err(Error::DimensionMismatch(format!("support index {j} exceeds dimension {d}")));
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    match model {
        LossModel::LeastSquares(data) => {
            let gram = model.hessian_submatrix(Array1::zeros(d).view(), &sorted)?;
            let n = data.n() as f64;
            let rhs = Array1::from_shape_fn(sorted.len(), |a| {
                data.x().column(sorted[a]).dot(&data.y()) / n
            });
            let sol = solve_symmetric(&gram, &rhs, &sorted)?;
            let mut beta = Array1::zeros(d);
            for (a, &j) in sorted.iter().enumerate() {
                beta[j] = sol[a];
            }
            Ok(beta)
        }
        LossModel::Logistic(data) => {
            if !radius.is_finite() {
                return Err(Error::InvalidConfig(
                    "oracle_estimator needs a finite radius for logistic loss".into(),
                ));
            }
            let xs = data.x().select(Axis(1), &sorted);
            let restricted = LossModel::logistic(crate::loss::DesignData::new(
                xs,
                data.y().to_owned(),
            )?)?;
            let sol = restricted_descent(&restricted, radius)?;
            embed(d, &sorted, &sol)
        }
        LossModel::Elliptical(cov) => {
            let s = sorted.len();
            let mut k = Array2::zeros((s + 1, s + 1));
            k[[0, 0]] = cov.k_y();
            for (a, &j) in sorted.iter().enumerate() {
                k[[a + 1, 0]] = cov.k_xy()[j];
                k[[0, a + 1]] = cov.k_xy()[j];
                for (b, &l) in sorted.iter().enumerate() {
                    k[[a + 1, b + 1]] = cov.k_x()[[j, l]];
                }
            }
            let restricted = LossModel::elliptical(EllipticalCov::from_full(k)?);
            let sol = restricted_descent(&restricted, radius)?;
            embed(d, &sorted, &sol)
        }
    }
}

fn embed(d: usize, support: &[usize], values: &Array1<f64>) -> Result<Array1<f64>> {
    let mut beta = Array1::zeros(d);
    for (a, &j) in support.iter().enumerate() {
        beta[j] = values[a];
    }
    Ok(beta)
}

/// Projected gradient descent with doubling line search on a smooth loss.
fn restricted_descent(model: &LossModel, radius: f64) -> Result<Array1<f64>> {
    const GRAD_TOL: f64 = 1e-8;
    let s = model.dim();
    let mut beta = Array1::zeros(s);
    let mut value = model.value(beta.view())?;
    let mut l = 1.0_f64;
    for _ in 0..100_000 {
        let grad = model.grad(beta.view())?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient);
        }
        let gnorm = grad.dot(&grad).sqrt();
        let interior = !radius.is_finite() || beta.dot(&beta).sqrt() < radius * (1.0 - 1e-10);
        if interior && gnorm <= GRAD_TOL {
            return Ok(beta);
        }
        l = (l / 2.0).max(1e-12);
        loop {
            let mut cand = &beta - &(&grad / l);
            if radius.is_finite() {
                let norm = cand.dot(&cand).sqrt();
                if norm > radius {
                    cand.mapv_inplace(|x| x * radius / norm);
                }
            }
            let cand_value = model.value(cand.view())?;
            let step = &cand - &beta;
            let quad = value + grad.dot(&step) + 0.5 * l * step.dot(&step);
            if cand_value <= quad + 1e-15 * (1.0 + value.abs()) {
                let residual = l * step.dot(&step).sqrt();
                beta = cand;
                value = cand_value;
                if residual <= GRAD_TOL {
                    return Ok(beta);
                }
                break;
            }
            l *= 2.0;
            if l > 1e18 {
                return Err(Error::NoConvergence(
                    "restricted descent line search exceeded curvature bound".into(),
                ));
            }
        }
        if !value.is_finite() || value < -1e100 {
            return Err(Error::NoConvergence(
                "restricted problem appears unbounded below (indefinite restricted block)".into(),
            ));
        }
    }
    Err(Error::NoConvergence("restricted descent hit its iteration cap".into()))
}

/// Gaussian elimination with partial pivoting; `labels` names the original
/// column indices in failure messages.
fn solve_symmetric(a: &Array2<f64>, rhs: &Array1<f64>, labels: &[usize]) -> Result<Array1<f64>> {
    let s = a.nrows();
    let mut m = a.clone();
    let mut b = rhs.clone();
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    let mut perm: Vec<usize> = (0..s).collect();
    for k in 0..s {
        let mut pivot_row = k;
        for r in (k + 1)..s {
            if m[[r, k]].abs() > m[[pivot_row, k]].abs() {
                pivot_row = r;
            }
        }
        if m[[pivot_row, k]].abs() <= 1e-12 * scale {
            return Err(Error::SingularRestrictedSystem(format!(
                "pivot {k} vanished; column {} is linearly dependent on the preceding support columns",
                labels[perm[k]]
            )));
        }
        if pivot_row != k {
            for c in 0..s {
                m.swap((k, c), (pivot_row, c));
            }
            b.swap(k, pivot_row);
            perm.swap(k, pivot_row);
        }
        for r in (k + 1)..s {
            let f = m[[r, k]] / m[[k, k]];
            if f == 0.0 {
                continue;
            }
            for c in k..s {
                m[[r, c]] -= f * m[[k, c]];
            }
            b[r] -= f * b[k];
        }
    }
    let mut x = Array1::zeros(s);
    for k in (0..s).rev() {
        let mut acc = b[k];
        for c in (k + 1)..s {
            acc -= m[[k, c]] * x[c];
        }
        x[k] = acc / m[[k, k]];
    }
    Ok(x)
}

/// How a sparse-eigenvalue report was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMethod {
    /// Every size-`s` support was evaluated; bounds are exact at the probed
    /// β values.
    Exhaustive,
    /// A random subset of supports was evaluated; `rho_plus_lb` lower-bounds
    /// the true `ρ₊` and `rho_minus_ub` upper-bounds the true `ρ₋`.
    Sampled,
}

/// Extreme `s`-sparse Rayleigh quotients of the loss Hessian over a probe
/// set of β values.
#[derive(Debug, Clone, Copy)]
pub struct SparseEigReport {
    /// Sparsity level probed.
    pub s: usize,
    /// Largest observed sparse eigenvalue (a lower bound when sampled).
    pub rho_plus_lb: f64,
    /// Smallest observed sparse eigenvalue (an upper bound when sampled).
    pub rho_minus_ub: f64,
    /// `(ρ₊ − ζ₊)/(ρ₋ − ζ₋)` when a penalty was supplied and `ρ̂₋ > ζ₋`.
    pub kappa_estimate: Option<f64>,
    /// Enumeration strategy used.
    pub method: ProbeMethod,
    /// Support budget the probe ran under.
    pub budget: usize,
    /// Number of distinct supports evaluated.
    pub supports_probed: usize,
}

/// Probes the `s`-sparse eigenvalue range of `∇²L` at the given β probes.
///
/// All `C(d,s)` supports are enumerated when they fit the budget; otherwise
/// `budget` random supports are drawn (seeded), always including
/// `include_support` when provided. Least squares and elliptical Hessians do
/// not depend on β, so a single probe is evaluated for them.
pub fn sparse_eig_probe(
    model: &LossModel,
    beta_probes: &[Array1<f64>],
    s: usize,
    budget: usize,
    include_support: Option<&[usize]>,
    penalty: Option<&Penalty>,
    seed: u64,
) -> Result<SparseEigReport> {
    let d = model.dim();
    if s == 0 || s > d {
        return Err(Error::InvalidConfig(format!("probe sparsity {s} outside 1..={d}")));
    }
    let beta_free = matches!(model, LossModel::LeastSquares(_) | LossModel::Elliptical(_));
    let default_probe = [Array1::zeros(d)];
    let probes: &[Array1<f64>] = if beta_probes.is_empty() || beta_free {
        if beta_free || beta_probes.is_empty() {
            &default_probe
        } else {
            beta_probes
        }
    } else {
        beta_probes
    };

    let mut rho_plus = f64::NEG_INFINITY;
    let mut rho_minus = f64::INFINITY;
    let mut probed = 0usize;
    let mut eval = |support: &[usize]| -> Result<()> {
        probed += 1;
        for probe in probes {
            let h = model.hessian_submatrix(probe.view(), support)?;
            let (lo, hi) = sym_eig_extremes(&h);
            rho_plus = rho_plus.max(hi);
            rho_minus = rho_minus.min(lo);
        }
        Ok(())
    };

    let total = binomial_capped(d, s, budget as u128 + 1);
    let method = if total <= budget as u128 {
        for_each_support(d, s, &mut eval)?;
        ProbeMethod::Exhaustive
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut remaining = budget;
        if let Some(inc) = include_support {
            let forced = normalize_support(inc, s, d);
            eval(&forced)?;
            remaining = remaining.saturating_sub(1);
        }
        for _ in 0..remaining {
            let mut support: Vec<usize> = sample(&mut rng, d, s).into_vec();
            support.sort_unstable();
            eval(&support)?;
        }
        ProbeMethod::Sampled
    };

    let kappa_estimate = penalty.and_then(|pen| {
        let (zeta_minus, zeta_plus) = pen.concavity_params();
        if rho_minus > zeta_minus {
            Some((rho_plus - zeta_plus) / (rho_minus - zeta_minus))
        } else {
            None
        }
    });

    Ok(SparseEigReport {
        s,
        rho_plus_lb: rho_plus,
        rho_minus_ub: rho_minus,
        kappa_estimate,
        method,
        budget,
        supports_probed: probed,
    })
}

/// Pads or truncates a forced support to size `s` inside `0..d`.
fn normalize_support(include: &[usize], s: usize, d: usize) -> Vec<usize> {
    let mut out: Vec<usize> = include.iter().copied().filter(|&j| j < d).collect();
    out.sort_unstable();
    out.dedup();
    out.truncate(s);
    let mut next = 0usize;
    while out.len() < s {
        if !out.contains(&next) {
            out.push(next);
        }
        next += 1;
    }
    out.sort_unstable();
    out
}

fn binomial_capped(d: usize, s: usize, cap: u128) -> u128 {
    let s = s.min(d - s);
    let mut acc: u128 = 1;
    for i in 0..s {
        acc = acc.saturating_mul((d - i) as u128) / (i as u128 + 1);
        if acc >= cap {
            return cap;
        }
    }
    acc
}

fn for_each_support(
    d: usize,
    s: usize,
    f: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let mut idx: Vec<usize> = (0..s).collect();
    loop {
        f(&idx)?;
        // Advance to the next lexicographic combination.
        let mut i = s;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] != i + d - s {
                break;
            }
        }
        if idx[i] == i + d - s {
            return Ok(());
        }
        idx[i] += 1;
        for j in (i + 1)..s {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Extreme eigenvalues of a small dense symmetric matrix via cyclic Jacobi
/// rotations.
fn sym_eig_extremes(a: &Array2<f64>) -> (f64, f64) {
    let n = a.nrows();
    if n == 1 {
        return (a[[0, 0]], a[[0, 0]]);
    }
    let mut m = a.clone();
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    for _ in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q] ] * m[[p, q]];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = m[[i, p]];
                        let aiq = m[[i, q]];
                        m[[i, p]] = c * aip - sn * aiq;
                        m[[p, i]] = m[[i, p]];
                        m[[i, q]] = sn * aip + c * aiq;
                        m[[q, i]] = m[[i, q]];
                    }
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                m[[p, p]] = c * c * app - 2.0 * sn * c * apq + sn * sn * aqq;
                m[[q, q]] = sn * sn * app + 2.0 * sn * c * apq + c * c * aqq;
                m[[p, q]] = 0.0;
                m[[q, p]] = 0.0;
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        lo = lo.min(m[[i, i]]);
        hi = hi.max(m[[i, i]]);
    }
    (lo, hi)
}

/// Straight-line least squares fit summary.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    /// Fitted slope.
    pub slope: f64,
    /// Fitted intercept.
    pub intercept: f64,
    /// Coefficient of determination.
    pub r_squared: f64,
}

/// Ordinary least squares line through `(xs, ys)`; `None` when fewer than
/// two distinct abscissae exist.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 =
        xs.iter().zip(ys.iter()).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(LineFit { slope, intercept, r_squared })
}

/// Per-stage objective gaps `g_t = φ_{λ_tgt}(β̃_t) − φ_{λ_tgt}(β̃_N)` for
/// `t = 0…N−1`, with a log-linear fit over the strictly positive gaps.
#[derive(Debug, Clone)]
pub struct GapTrace {
    /// Gaps indexed by stage `t = 0…N−1` (`t = 0` is the all-zero start).
    pub gaps: Vec<f64>,
    /// Least squares fit of `log g_t` against `t`; `None` when fewer than
    /// two positive gaps exist.
    pub fit: Option<LineFit>,
}

/// Builds the objective-gap trace of a completed path, using the final-stage
/// solution as the reference point.
pub fn objective_gap_trace(
    path: &PathResult,
    model: &LossModel,
    penalty: &Penalty,
    lambda_tgt: f64,
) -> Result<GapTrace> {
    let n = path.stages.len();
    if n < 2 {
        return Ok(GapTrace { gaps: Vec::new(), fit: None });
    }
    let phi_ref = model.objective(penalty, lambda_tgt, path.final_beta().view())?;
    let mut gaps = Vec::with_capacity(n);
    let zero = Array1::zeros(model.dim());
    gaps.push(model.objective(penalty, lambda_tgt, zero.view())? - phi_ref);
    for stage in path.stages.iter().take(n - 1) {
        gaps.push(model.objective(penalty, lambda_tgt, stage.result.beta.view())? - phi_ref);
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, &g) in gaps.iter().enumerate() {
        if g > 1e-15 * (1.0 + phi_ref.abs()) {
            xs.push(t as f64);
            ys.push(g.ln());
        }
    }
    Ok(GapTrace { gaps, fit: least_squares_line(&xs, &ys) })
}
