//! Decomposable penalty family `p_λ(x) = λ|x| + q_λ(x)`.
//!
//! The concave component `q_λ` carries the folded-concave behaviour of SCAD
//! and MCP; for the plain ℓ₁ penalty it is identically zero. All closed forms
//! are exact, so the regularity checker uses a tiny absolute tolerance that
//! only absorbs rounding.

use ndarray::{Array1, ArrayView1};

use crate::error::Error;
use crate::Result;

/// Absolute tolerance used by [`Penalty::check_regularity`].
pub const REGULARITY_TOL: f64 = 1e-9;

/// Penalty selection with its concavity parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    /// Smoothly clipped absolute deviation with shape parameter `a > 2`.
    Scad { a: f64 },
    /// Minimax concave penalty with shape parameter `b > 0`.
    Mcp { b: f64 },
    /// Plain ℓ₁ penalty (no concave part).
    L1,
}

impl Penalty {
    /// SCAD penalty; requires `a > 2`.
    pub fn scad(a: f64) -> Result<Self> {
        if !(a > 2.0) || !a.is_finite() {
            return Err(Error::InvalidPenalty(format!("SCAD requires a > 2, got a = {a}")));
        }
        Ok(Penalty::Scad { a })
    }

    /// MCP penalty; requires `b > 0`.
    pub fn mcp(b: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidPenalty(format!("MCP requires b > 0, got b = {b}")));
        }
        Ok(Penalty::Mcp { b })
    }

    /// Plain ℓ₁ penalty.
    pub fn l1() -> Self {
        Penalty::L1
    }

    /// Concavity parameters `(ζ₋, ζ₊)` of the concave component, with
    /// `0 ≤ ζ₊ ≤ ζ₋`.
    pub fn concavity_params(&self) -> (f64, f64) {
        match *self {
            Penalty::Scad { a } => (1.0 / (a - 1.0), 0.0),
            Penalty::Mcp { b } => (1.0 / b, 0.0),
            Penalty::L1 => (0.0, 0.0),
        }
    }

    /// Scalar penalty value `p_λ(x)`; symmetric and nondecreasing in `|x|`.
    pub fn scalar(&self, lambda: f64, x: f64) -> f64 {
        let t = x.abs();
        match *self {
            Penalty::Scad { a } => {
                if t <= lambda {
                    lambda * t
                } else if t <= a * lambda {
                    -(t * t - 2.0 * a * lambda * t + lambda * lambda) / (2.0 * (a - 1.0))
                } else {
                    (a + 1.0) * lambda * lambda / 2.0
                }
            }
            Penalty::Mcp { b } => {
                if t <= b * lambda {
                    lambda * t - t * t / (2.0 * b)
                } else {
                    b * lambda * lambda / 2.0
                }
            }
            Penalty::L1 => lambda * t,
        }
    }

    /// Concave component `q_λ(x) = p_λ(x) − λ|x|`; nonpositive, zero at zero.
    pub fn concave_value(&self, lambda: f64, x: f64) -> f64 {
        let t = x.abs();
        match *self {
            Penalty::Scad { a } => {
                if t <= lambda {
                    0.0
                } else if t <= a * lambda {
                    (2.0 * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0))
                } else {
                    (a + 1.0) * lambda * lambda / 2.0 - lambda * t
                }
            }
            Penalty::Mcp { b } => {
                if t <= b * lambda {
                    -t * t / (2.0 * b)
                } else {
                    b * lambda * lambda / 2.0 - lambda * t
                }
            }
            Penalty::L1 => 0.0,
        }
    }

    /// Derivative `q′_λ(x)` of the concave component.
    ///
    /// Kink points take the closed-form piece whose interval is closed on the
    /// left at `|x|`; `q′` is continuous there for SCAD and MCP so the choice
    /// only fixes which branch evaluates.
    pub fn concave_grad(&self, lambda: f64, x: f64) -> f64 {
        let t = x.abs();
        let s = sign(x);
        match *self {
            Penalty::Scad { a } => {
                if t <= lambda {
                    0.0
                } else if t <= a * lambda {
                    (lambda * s - x) / (a - 1.0)
                } else {
                    -lambda * s
                }
            }
            Penalty::Mcp { b } => {
                if t <= b * lambda {
                    -x / b
                } else {
                    -lambda * s
                }
            }
            Penalty::L1 => 0.0,
        }
    }

    /// Componentwise [`Penalty::concave_grad`].
    pub fn concave_grad_vector(&self, lambda: f64, beta: ArrayView1<'_, f64>) -> Array1<f64> {
        beta.mapv(|x| self.concave_grad(lambda, x))
    }

    /// Sum of `q_λ` over the coordinates of `beta`.
    pub fn concave_total(&self, lambda: f64, beta: ArrayView1<'_, f64>) -> f64 {
        match self {
            Penalty::L1 => 0.0,
            _ => beta.iter().map(|&x| self.concave_value(lambda, x)).sum(),
        }
    }

    /// Sum of `p_λ` over the coordinates of `beta`.
    pub fn total(&self, lambda: f64, beta: ArrayView1<'_, f64>) -> f64 {
        beta.iter().map(|&x| self.scalar(lambda, x)).sum()
    }

    /// Smallest `ν` with `p′_λ ≡ 0` for `|x| ≥ ν`; `None` for ℓ₁, whose
    /// derivative never vanishes.
    pub fn flat_threshold(&self, lambda: f64) -> Option<f64> {
        match *self {
            Penalty::Scad { a } => Some(a * lambda),
            Penalty::Mcp { b } => Some(b * lambda),
            Penalty::L1 => None,
        }
    }

    /// Numerically verify the five regularity conditions of the concave
    /// component on the supplied grids.
    ///
    /// Condition (a) is checked on consecutive grid pairs; difference
    /// quotients over wider gaps are convex combinations of consecutive ones,
    /// so the consecutive bounds imply the general ones.
    pub fn check_regularity(
        &self,
        lambda_grid: &[f64],
        beta_grid: &[f64],
    ) -> Result<RegularityReport> {
        if lambda_grid.is_empty() || beta_grid.is_empty() {
            return Err(Error::InvalidConfig(
                "check_regularity requires nonempty λ and β grids".into(),
            ));
        }
        if lambda_grid.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidConfig("λ grid entries must be positive".into()));
        }
        let mut betas: Vec<f64> = beta_grid.to_vec();
        betas.sort_by(|a, b| a.partial_cmp(b).expect("non-finite β grid entry"));

        let (zeta_minus, zeta_plus) = self.concavity_params();
        let tol = REGULARITY_TOL;

        let mut monotone = ConditionCheck::new();
        let mut symmetric = ConditionCheck::new();
        let mut origin = ConditionCheck::new();
        let mut bounded = ConditionCheck::new();
        let mut lambda_lip = ConditionCheck::new();

        for &lam in lambda_grid {
            // (c) both q and q′ vanish at the origin.
            origin.observe(self.concave_value(lam, 0.0).abs(), lam, 0.0, 0.0);
            origin.observe(self.concave_grad(lam, 0.0).abs(), lam, 0.0, 0.0);

            let mut prev: Option<(f64, f64)> = None;
            for &x in &betas {
                let g = self.concave_grad(lam, x);
                // (b) symmetry of q.
                let sym = (self.concave_value(lam, x) - self.concave_value(lam, -x)).abs();
                symmetric.observe(sym, lam, 0.0, x);
                // (d) gradient bound.
                bounded.observe(g.abs() - lam, lam, 0.0, x);
                // (a) difference quotients in [−ζ₋, −ζ₊].
                if let Some((px, pg)) = prev {
                    if x > px {
                        let quot = (g - pg) / (x - px);
                        monotone.observe(-zeta_minus - quot, lam, 0.0, x);
                        monotone.observe(quot - (-zeta_plus), lam, 0.0, x);
                    }
                }
                prev = Some((x, g));
                // (e) λ-Lipschitz continuity of q′.
                for &lam2 in lambda_grid {
                    let diff = (g - self.concave_grad(lam2, x)).abs();
                    lambda_lip.observe(diff - (lam - lam2).abs(), lam, lam2, x);
                }
            }
        }

        Ok(RegularityReport {
            monotone_lipschitz: monotone.finish(tol),
            symmetric: symmetric.finish(tol),
            zero_at_origin: origin.finish(tol),
            gradient_bounded: bounded.finish(tol),
            lambda_lipschitz: lambda_lip.finish(tol),
        })
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Outcome of a single regularity condition with its worst-case witness.
#[derive(Debug, Clone, Copy)]
pub struct RegularityCheck {
    /// Condition satisfied up to [`REGULARITY_TOL`].
    pub pass: bool,
    /// Largest observed violation; negative means satisfied with slack.
    pub max_violation: f64,
    /// `(λ, λ′, β)` grid location attaining `max_violation`.
    pub witness: (f64, f64, f64),
}

/// Pass/fail per regularity condition (a)–(e).
#[derive(Debug, Clone)]
pub struct RegularityReport {
    /// (a) `q′` monotone with difference quotients in `[−ζ₋, −ζ₊]`.
    pub monotone_lipschitz: RegularityCheck,
    /// (b) `q_λ(−x) = q_λ(x)`.
    pub symmetric: RegularityCheck,
    /// (c) `q_λ(0) = q′_λ(0) = 0`.
    pub zero_at_origin: RegularityCheck,
    /// (d) `|q′_λ| ≤ λ`.
    pub gradient_bounded: RegularityCheck,
    /// (e) `|q′_{λ₁} − q′_{λ₂}| ≤ |λ₁ − λ₂|`.
    pub lambda_lipschitz: RegularityCheck,
}

impl RegularityReport {
    /// True when all five conditions pass.
    pub fn all_pass(&self) -> bool {
        self.monotone_lipschitz.pass
            && self.symmetric.pass
            && self.zero_at_origin.pass
            && self.gradient_bounded.pass
            && self.lambda_lipschitz.pass
    }
}

struct ConditionCheck {
    max_violation: f64,
    witness: (f64, f64, f64),
}

impl ConditionCheck {
    fn new() -> Self {
        ConditionCheck { max_violation: f64::NEG_INFINITY, witness: (0.0, 0.0, 0.0) }
    }

    fn observe(&mut self, violation: f64, lambda: f64, lambda_alt: f64, beta: f64) {
        if violation > self.max_violation {
            self.max_violation = violation;
            self.witness = (lambda, lambda_alt, beta);
        }
    }

    fn finish(self, tol: f64) -> RegularityCheck {
        RegularityCheck {
            pass: self.max_violation <= tol,
            max_violation: self.max_violation,
            witness: self.witness,
        }
    }
}
