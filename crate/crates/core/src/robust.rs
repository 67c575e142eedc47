//! Rank-based elliptical covariance pipeline.
//!
//! Two steps: a Kendall's-tau correlation matrix with the `sin(πτ/2)`
//! transform, and Catoni M-estimates of the marginal standard deviations.
//! The assembled covariance estimate is symmetric by construction but not
//! necessarily positive semidefinite; downstream consumers rely on the
//! indefiniteness being preserved, so nothing here projects the matrix.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::error::Error;
use crate::loss::EllipticalCov;
use crate::Result;

/// Kendall's tau of two equal-length vectors, in `[-1, 1]`.
///
/// The pair sum is `(2/(n(n−1)))·Σ_{i<i′} sign(u_i−u_{i′})·sign(w_i−w_{i′})`.
/// Tie-free inputs take an O(n log n) inversion-count route that reproduces
/// the pair sum exactly; ties fall back to the O(n²) sum with `sign(0) = 0`
/// and no tie correction.
pub fn kendall_tau(u: ArrayView1<'_, f64>, w: ArrayView1<'_, f64>) -> Result<f64> {
    let n = u.len();
    if w.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "kendall_tau arguments have lengths {n} and {}",
            w.len()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidData("kendall_tau requires at least 2 samples".into()));
    }
    let pairs = (n * (n - 1) / 2) as f64;
    if has_ties(u) || has_ties(w) {
        return Ok(pair_sum(u, w) as f64 / pairs);
    }
    // Sort by u, then count inversions of w in that order: each inversion is
    // one discordant pair, and concordant − discordant = total − 2·inversions.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| u[a].partial_cmp(&u[b]).expect("non-finite input"));
    let mut wv: Vec<f64> = order.iter().map(|&i| w[i]).collect();
    let discordant = count_inversions(&mut wv);
    let signed = (n * (n - 1) / 2) as i64 - 2 * discordant as i64;
    Ok(signed as f64 / pairs)
}

fn has_ties(v: ArrayView1<'_, f64>) -> bool {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite input"));
    sorted.windows(2).any(|p| p[0] == p[1])
}

fn pair_sum(u: ArrayView1<'_, f64>, w: ArrayView1<'_, f64>) -> i64 {
    let n = u.len();
    let mut acc: i64 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let su = (u[i] - u[j]).signum_or_zero();
            let sw = (w[i] - w[j]).signum_or_zero();
            acc += (su * sw) as i64;
        }
    }
    acc
}

trait SignumOrZero {
    fn signum_or_zero(self) -> i8;
}

impl SignumOrZero for f64 {
    fn signum_or_zero(self) -> i8 {
        if self > 0.0 {
            1
        } else if self < 0.0 {
            -1
        } else {
            0
        }
    }
}

fn count_inversions(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mut buf = v.to_vec();
    merge_count(v, &mut buf)
}

fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left_buf, right_buf) = buf.split_at_mut(mid);
    let mut inv = {
        let (left, right) = v.split_at_mut(mid);
        merge_count(left, left_buf) + merge_count(right, right_buf)
    };
    let (mut i, mut j, mut k) = (0usize, mid, 0usize);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            inv += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    while i < mid {
        buf[k] = v[i];
        i += 1;
        k += 1;
    }
    while j < n {
        buf[k] = v[j];
        j += 1;
        k += 1;
    }
    v.copy_from_slice(&buf[..n]);
    inv
}

/// Kendall correlation matrix `R̂` with `R̂_{jk} = sin(π τ̂_{jk}/2)` and unit
/// diagonal. Columns of `z` are variables, rows are samples.
///
/// Per-column sort orders and tie status are computed once and shared across
/// pairs; each pair then reduces to one inversion count, bit-identical to
/// [`kendall_tau`] on the same columns.
pub fn kendall_corr_matrix(z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (n, p) = z.dim();
    if n < 2 {
        return Err(Error::InvalidData("kendall_corr_matrix requires at least 2 rows".into()));
    }
    if p == 0 {
        return Err(Error::InvalidData("kendall_corr_matrix requires at least 1 column".into()));
    }
    let tied: Vec<bool> = (0..p).map(|j| has_ties(z.column(j))).collect();
    let orders: Vec<Vec<usize>> = (0..p)
        .into_par_iter()
        .map(|j| {
            let col = z.column(j);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| col[a].partial_cmp(&col[b]).expect("non-finite input"));
            order
        })
        .collect();

    let mut pairs = Vec::with_capacity(p * (p - 1) / 2);
    for j in 0..p {
        for k in (j + 1)..p {
            pairs.push((j, k));
        }
    }
    let total_pairs = (n * (n - 1) / 2) as f64;
    let entries: Vec<((usize, usize), f64)> = pairs
        .into_par_iter()
        .map(|(j, k)| {
            let tau = if tied[j] || tied[k] {
                kendall_tau(z.column(j), z.column(k))?
            } else {
                let col_k = z.column(k);
                let mut wv: Vec<f64> = orders[j].iter().map(|&i| col_k[i]).collect();
                let discordant = count_inversions(&mut wv);
                let signed = (n * (n - 1) / 2) as i64 - 2 * discordant as i64;
                signed as f64 / total_pairs
            };
            Ok(((j, k), (std::f64::consts::FRAC_PI_2 * tau).sin()))
        })
        .collect::<Result<_>>()?;
    let mut r = Array2::eye(p);
    for ((j, k), v) in entries {
        r[[j, k]] = v;
        r[[k, j]] = v;
    }
    Ok(r)
}

/// Parameters for the Catoni location/scale estimating equations.
#[derive(Debug, Clone)]
pub struct CatoniConfig {
    /// Deviation level `δ ∈ (0, 1)`.
    pub delta: f64,
    /// Upper bound on the variance of the raw samples.
    pub v: f64,
    /// Upper bound on the variance of the squared samples; when `None`, a
    /// data-driven bound (2× their sample variance) is used.
    pub v_squares: Option<f64>,
    /// Newton iteration budget before the bisection fallback.
    pub max_newton_iters: usize,
    /// Absolute tolerance on the estimating-equation sum.
    pub newton_tol: f64,
}

impl CatoniConfig {
    /// Explicit configuration; validates `δ ∈ (0,1)` and `v > 0`.
    pub fn new(delta: f64, v: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidConfig(format!("Catoni δ must lie in (0,1), got {delta}")));
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidConfig(format!("Catoni v must be positive, got {v}")));
        }
        Ok(CatoniConfig { delta, v, v_squares: None, max_newton_iters: 50, newton_tol: 1e-10 })
    }

    /// Default policy for an `n×p` data matrix: `δ = p^{-3}` clamped so that
    /// `2·log(1/δ) ≤ n/2` (i.e. `δ ≥ e^{-n/4}`), and variance bounds set to
    /// twice the median per-column sample variance of the raw and squared
    /// columns respectively.
    pub fn default_for(z: ArrayView2<'_, f64>) -> Result<Self> {
        let (n, p) = z.dim();
        if n < 2 {
            return Err(Error::InvalidData("Catoni defaults require at least 2 rows".into()));
        }
        // p = 1 would give δ = 1, a degenerate level; cap at 0.5 before the
        // feasibility clamp.
        let delta = ((p as f64).powi(-3)).min(0.5).max((-(n as f64) / 4.0).exp());
        let mut raw_vars = Vec::with_capacity(p);
        let mut sq_vars = Vec::with_capacity(p);
        for j in 0..p {
            let col = z.column(j);
            raw_vars.push(sample_variance(col.iter().copied()));
            sq_vars.push(sample_variance(col.iter().map(|x| x * x)));
        }
        let v = (2.0 * median(&mut raw_vars)).max(1e-12);
        let v_sq = (2.0 * median(&mut sq_vars)).max(1e-12);
        let mut cfg = CatoniConfig::new(delta, v)?;
        cfg.v_squares = Some(v_sq);
        Ok(cfg)
    }

    fn for_squares(&self, squares: &[f64]) -> Result<CatoniConfig> {
        let v = match self.v_squares {
            Some(v) => v,
            None => (2.0 * sample_variance(squares.iter().copied())).max(1e-12),
        };
        let mut cfg = CatoniConfig::new(self.delta, v)?;
        cfg.max_newton_iters = self.max_newton_iters;
        cfg.newton_tol = self.newton_tol;
        Ok(cfg)
    }
}

fn sample_variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count();
    if n < 2 {
        return 0.0;
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    values.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("non-finite variance"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Scaling constant `a_δ` of the Catoni estimating equation.
pub fn catoni_alpha(cfg: &CatoniConfig, n: usize) -> Result<f64> {
    let log_inv = (1.0 / cfg.delta).ln();
    let nf = n as f64;
    if nf <= 2.0 * log_inv {
        return Err(Error::CatoniInfeasible { n, required: 2.0 * log_inv });
    }
    let denom = nf * cfg.v + 2.0 * nf * cfg.v * log_inv / (nf - 2.0 * log_inv);
    Ok((2.0 * log_inv / denom).sqrt())
}

/// Influence function: odd, strictly increasing, with `h(0) = 0`.
fn influence(x: f64) -> f64 {
    if x >= 0.0 {
        (1.0 + x + 0.5 * x * x).ln()
    } else {
        -(1.0 - x + 0.5 * x * x).ln()
    }
}

fn influence_deriv(x: f64) -> f64 {
    if x >= 0.0 {
        (1.0 + x) / (1.0 + x + 0.5 * x * x)
    } else {
        (1.0 - x) / (1.0 - x + 0.5 * x * x)
    }
}

/// How the estimating-equation root was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    /// Newton iterations converged within budget.
    Newton,
    /// Newton stalled; bisection on the bracketing interval finished the job.
    Bisection,
}

/// Catoni location estimate with the method that produced it.
#[derive(Debug, Clone, Copy)]
pub struct CatoniLocation {
    /// Root `μ̂` of the estimating equation.
    pub value: f64,
    /// Solver branch used.
    pub method: RootMethod,
}

/// Solves `Σ_i h(a_δ(z_i − μ̂)) = 0` for `μ̂`.
///
/// The sum is strictly decreasing in `μ̂` (h strictly increasing), so the
/// root is unique; Newton from the sample mean converges in a handful of
/// steps, with bisection on `[min z, max z]` as fallback.
pub fn catoni_location(samples: ArrayView1<'_, f64>, cfg: &CatoniConfig) -> Result<CatoniLocation> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidData("catoni_location requires samples".into()));
    }
    let alpha = catoni_alpha(cfg, n)?;
    let sum = |mu: f64| -> f64 { samples.iter().map(|&z| influence(alpha * (z - mu))).sum() };
    let dsum =
        |mu: f64| -> f64 { -alpha * samples.iter().map(|&z| influence_deriv(alpha * (z - mu))).sum::<f64>() };

    let mut mu = samples.sum() / n as f64;
    for _ in 0..cfg.max_newton_iters {
        let s = sum(mu);
        if s.abs() <= cfg.newton_tol {
            return Ok(CatoniLocation { value: mu, method: RootMethod::Newton });
        }
        let ds = dsum(mu);
        if ds == 0.0 || !ds.is_finite() {
            break;
        }
        let next = mu - s / ds;
        if !next.is_finite() {
            break;
        }
        mu = next;
    }
    if sum(mu).abs() <= cfg.newton_tol {
        return Ok(CatoniLocation { value: mu, method: RootMethod::Newton });
    }

    // Bisection: the sum is ≥ 0 at min(z) and ≤ 0 at max(z).
    let mut lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = sum(mid);
        if s.abs() <= cfg.newton_tol || hi - lo <= f64::EPSILON * (1.0 + mid.abs()) {
            return Ok(CatoniLocation { value: mid, method: RootMethod::Bisection });
        }
        if s > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence("Catoni location bisection exhausted its budget".into()))
}

/// Catoni scale estimate `σ̂ = √max(m̂ − μ̂², 0)`.
#[derive(Debug, Clone, Copy)]
pub struct CatoniScale {
    /// Estimated standard deviation.
    pub sigma: f64,
    /// True when `m̂ < μ̂²` forced clipping at zero.
    pub clipped: bool,
}

/// Standard-deviation estimate from the two location solves (raw samples for
/// `μ̂`, squared samples for `m̂`).
pub fn catoni_scale(column: ArrayView1<'_, f64>, cfg: &CatoniConfig) -> Result<CatoniScale> {
    let mu = catoni_location(column, cfg)?.value;
    let squares: Vec<f64> = column.iter().map(|&z| z * z).collect();
    let cfg_sq = cfg.for_squares(&squares)?;
    let m = catoni_location(Array1::from(squares).view(), &cfg_sq)?.value;
    let variance = m - mu * mu;
    Ok(CatoniScale { sigma: variance.max(0.0).sqrt(), clipped: variance < 0.0 })
}

/// Assembles the rank-based covariance estimate `K̂` of an `n×(d+1)` sample
/// matrix whose first column is the response.
///
/// `K̂_{jk} = R̂_{jk}·σ̂_j σ̂_k` with `R̂` the Kendall matrix and `σ̂` the
/// per-column Catoni scales.
pub fn elliptical_cov(z: ArrayView2<'_, f64>, cfg: &CatoniConfig) -> Result<EllipticalCov> {
    let (n, p) = z.dim();
    if n < 2 || p < 2 {
        return Err(Error::InvalidData(format!(
            "elliptical_cov requires an n×(d+1) matrix with n ≥ 2 and d ≥ 1, got {n}×{p}"
        )));
    }
    let r = kendall_corr_matrix(z)?;
    let sigmas: Vec<f64> = (0..p)
        .into_par_iter()
        .map(|j| catoni_scale(z.column(j), cfg).map(|s| s.sigma))
        .collect::<Result<_>>()?;
    let mut k = Array2::zeros((p, p));
    for j in 0..p {
        for l in j..p {
            let v = r[[j, l]] * sigmas[j] * sigmas[l];
            k[[j, l]] = v;
            k[[l, j]] = v;
        }
    }
    EllipticalCov::from_full(k)
}
