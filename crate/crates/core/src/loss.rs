//! Loss models: least squares, logistic, and semiparametric elliptical design.
//!
//! All three expose value, gradient, Hessian quadratic form, and the
//! surrogate-loss gradient `∇L̃_λ = ∇L + ∇Q_λ` used by the prox solver. The
//! elliptical loss is covariance-form and may be nonconvex: its `K̂` block is
//! not required positive semidefinite, and nothing here projects it.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};

use crate::error::Error;
use crate::penalty::Penalty;
use crate::Result;

/// Design matrix plus response for sample-based losses.
#[derive(Debug, Clone)]
pub struct DesignData {
    x: Array2<f64>,
    y: Array1<f64>,
}

impl DesignData {
    /// Validates shapes and finiteness. Rows of `x` are samples.
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let (n, d) = x.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidData(format!("empty design matrix ({n}×{d})")));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "design has {n} rows but response has {} entries",
                y.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("design or response contains non-finite entries".into()));
        }
        Ok(DesignData { x, y })
    }

    /// Number of samples.
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Number of predictors.
    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    /// Design matrix view.
    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    /// Response view.
    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }
}

/// Assembled `(d+1)×(d+1)` covariance estimate with the response variable in
/// the first coordinate. Possibly indefinite.
#[derive(Debug, Clone)]
pub struct EllipticalCov {
    k: Array2<f64>,
}

impl EllipticalCov {
    /// Wraps a full covariance estimate; requires a square symmetric matrix
    /// with nonnegative diagonal and at least one predictor block.
    pub fn from_full(k: Array2<f64>) -> Result<Self> {
        let (r, c) = k.dim();
        if r != c {
            return Err(Error::InvalidData(format!("covariance must be square, got {r}×{c}")));
        }
        if r < 2 {
            return Err(Error::InvalidData("covariance needs at least one predictor block".into()));
        }
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("covariance contains non-finite entries".into()));
        }
        let scale = k.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..r {
            if k[[i, i]] < 0.0 {
                return Err(Error::InvalidData(format!("negative diagonal entry at {i}")));
            }
            for j in 0..i {
                if (k[[i, j]] - k[[j, i]]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidData(format!("covariance not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(EllipticalCov { k })
    }

    /// Dimension `d` of the predictor block.
    pub fn d(&self) -> usize {
        self.k.nrows() - 1
    }

    /// Full `(d+1)×(d+1)` matrix.
    pub fn full(&self) -> ArrayView2<'_, f64> {
        self.k.view()
    }

    /// Scalar `K̂_Y` block.
    pub fn k_y(&self) -> f64 {
        self.k[[0, 0]]
    }

    /// `K̂_{X,Y}` cross block of length `d`.
    pub fn k_xy(&self) -> ArrayView1<'_, f64> {
        self.k.slice(s![1.., 0])
    }

    /// `K̂_X` predictor block.
    pub fn k_x(&self) -> ArrayView2<'_, f64> {
        self.k.slice(s![1.., 1..])
    }
}

/// One of the three loss instantiations, carrying its data.
#[derive(Debug, Clone)]
pub enum LossModel {
    /// `‖Xβ − y‖²/(2n)`.
    LeastSquares(DesignData),
    /// Mean negative log-likelihood of a Bernoulli model with logit link.
    Logistic(DesignData),
    /// `½(1, −βᵀ) K̂ (1, −βᵀ)ᵀ` on an assembled covariance estimate.
    Elliptical(EllipticalCov),
}

/// Numerically stable logistic function.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `log(1 + exp(t))`.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

impl LossModel {
    /// Least squares loss over the given data.
    pub fn least_squares(data: DesignData) -> Self {
        LossModel::LeastSquares(data)
    }

    /// Logistic loss; labels must be 0/1.
    pub fn logistic(data: DesignData) -> Result<Self> {
        if data.y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidData("logistic loss requires labels in {0, 1}".into()));
        }
        Ok(LossModel::Logistic(data))
    }

    /// Elliptical design loss over an assembled covariance estimate.
    pub fn elliptical(cov: EllipticalCov) -> Self {
        LossModel::Elliptical(cov)
    }

    /// Parameter dimension.
    pub fn dim(&self) -> usize {
        match self {
            LossModel::LeastSquares(d) | LossModel::Logistic(d) => d.d(),
            LossModel::Elliptical(c) => c.d(),
        }
    }

    fn check_dim(&self, beta: ArrayView1<'_, f64>) -> Result<()> {
        if beta.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "β has length {} but the model dimension is {}",
                beta.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Loss value `L(β)`.
    pub fn value(&self, beta: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_dim(beta)?;
        Ok(match self {
            LossModel::LeastSquares(data) => {
                let r = data.x.dot(&beta) - &data.y;
                r.dot(&r) / (2.0 * data.n() as f64)
            }
            LossModel::Logistic(data) => {
                let z = data.x.dot(&beta);
                let total: f64 =
                    z.iter().zip(data.y.iter()).map(|(&t, &y)| softplus(t) - y * t).sum();
                total / data.n() as f64
            }
            LossModel::Elliptical(cov) => {
                // Block expansion of the (1, −βᵀ) quadratic form.
                let kxb = cov.k_x().dot(&beta);
                0.5 * cov.k_y() - beta.dot(&cov.k_xy()) + 0.5 * beta.dot(&kxb)
            }
        })
    }

    /// Gradient `∇L(β)`.
    pub fn grad(&self, beta: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        self.check_dim(beta)?;
        Ok(match self {
            LossModel::LeastSquares(data) => {
                let r = data.x.dot(&beta) - &data.y;
                data.x.t().dot(&r) / data.n() as f64
            }
            LossModel::Logistic(data) => {
                let z = data.x.dot(&beta);
                let probs = z.mapv(sigmoid) - &data.y;
                data.x.t().dot(&probs) / data.n() as f64
            }
            LossModel::Elliptical(cov) => cov.k_x().dot(&beta) - cov.k_xy(),
        })
    }

    /// Surrogate-loss gradient `∇L̃_λ(β) = ∇L(β) + ∇Q_λ(β)`.
    pub fn surrogate_grad(
        &self,
        penalty: &Penalty,
        lambda: f64,
        beta: ArrayView1<'_, f64>,
    ) -> Result<Array1<f64>> {
        let mut g = self.grad(beta)?;
        if !matches!(penalty, Penalty::L1) {
            g.zip_mut_with(&beta, |gj, &bj| *gj += penalty.concave_grad(lambda, bj));
        }
        Ok(g)
    }

    /// Objective `φ_λ(β) = L(β) + Q_λ(β) + λ‖β‖₁`.
    pub fn objective(
        &self,
        penalty: &Penalty,
        lambda: f64,
        beta: ArrayView1<'_, f64>,
    ) -> Result<f64> {
        let l1: f64 = beta.iter().map(|v| v.abs()).sum();
        Ok(self.value(beta)? + penalty.concave_total(lambda, beta) + lambda * l1)
    }

    /// `λ₀ = ‖∇L(0)‖_∞`, the smallest λ whose exact local solution is all
    /// zero. Errors when the gradient at zero vanishes.
    pub fn lambda_zero(&self) -> Result<f64> {
        let zero = Array1::zeros(self.dim());
        let g = self.grad(zero.view())?;
        let max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 {
            return Err(Error::DegenerateLambdaZero);
        }
        Ok(max)
    }

    /// Hessian quadratic form `vᵀ∇²L(β)v`; may be negative for the
    /// elliptical loss.
    pub fn hessian_quadform(
        &self,
        beta: ArrayView1<'_, f64>,
        v: ArrayView1<'_, f64>,
    ) -> Result<f64> {
        self.check_dim(beta)?;
        self.check_dim(v)?;
        Ok(match self {
            LossModel::LeastSquares(data) => {
                let xv = data.x.dot(&v);
                xv.dot(&xv) / data.n() as f64
            }
            LossModel::Logistic(data) => {
                let xv = data.x.dot(&v);
                let z = data.x.dot(&beta);
                let total: f64 = xv
                    .iter()
                    .zip(z.iter())
                    .map(|(&a, &t)| {
                        let p = sigmoid(t);
                        a * a * p * (1.0 - p)
                    })
                    .sum();
                total / data.n() as f64
            }
            LossModel::Elliptical(cov) => v.dot(&cov.k_x().dot(&v)),
        })
    }

    /// Dense `|support|×|support|` Hessian block at `beta`.
    pub fn hessian_submatrix(
        &self,
        beta: ArrayView1<'_, f64>,
        support: &[usize],
    ) -> Result<Array2<f64>> {
        self.check_dim(beta)?;
        let d = self.dim();
        if let Some(&j) = support.iter().find(|&&j| j >= d) {
            return Err(Error::DimensionMismatch(format!(
                "support index {j} out of range for dimension {d}"
            )));
        }
        let s = support.len();
        let mut h = Array2::zeros((s, s));
        match self {
            LossModel::LeastSquares(data) => {
                let n = data.n() as f64;
                for (ai, &i) in support.iter().enumerate() {
                    let ci = data.x.column(i);
                    for (aj, &j) in support.iter().enumerate().take(ai + 1) {
                        let v = ci.dot(&data.x.column(j)) / n;
                        h[[ai, aj]] = v;
                        h[[aj, ai]] = v;
                    }
                }
            }
            LossModel::Logistic(data) => {
                let n = data.n() as f64;
                let w = data.x.dot(&beta).mapv(|t| {
                    let p = sigmoid(t);
                    p * (1.0 - p)
                });
                for (ai, &i) in support.iter().enumerate() {
                    let ci = data.x.column(i);
                    for (aj, &j) in support.iter().enumerate().take(ai + 1) {
                        let cj = data.x.column(j);
                        let v: f64 = ci
                            .iter()
                            .zip(cj.iter())
                            .zip(w.iter())
                            .map(|((&a, &b), &wi)| a * b * wi)
                            .sum::<f64>()
                            / n;
                        h[[ai, aj]] = v;
                        h[[aj, ai]] = v;
                    }
                }
            }
            LossModel::Elliptical(cov) => {
                let kx = cov.k_x();
                for (ai, &i) in support.iter().enumerate() {
                    for (aj, &j) in support.iter().enumerate() {
                        h[[ai, aj]] = kx[[i, j]];
                    }
                }
            }
        }
        Ok(h)
    }
}

/// `λ_tgt` selection rule `c·√(log d / n)` for sample-based losses.
pub fn target_lambda(c: f64, n: usize, d: usize) -> f64 {
    c * ((d as f64).ln() / n as f64).sqrt()
}

/// `λ_tgt` selection rule `c·ℓ₁·√(log d / n)` for the elliptical loss, where
/// `ℓ₁` is a plug-in scale for `‖β‖₁`.
pub fn target_lambda_scaled(c: f64, n: usize, d: usize, l1_scale: f64) -> f64 {
    c * l1_scale * ((d as f64).ln() / n as f64).sqrt()
}
