//! Path driver: geometric λ schedule with a pinned target value, per-stage
//! precision schedule, and warm starts of both the iterate and the quadratic
//! coefficient across stages.

use ndarray::{Array1, ArrayView1};

use crate::error::Error;
use crate::loss::LossModel;
use crate::penalty::Penalty;
use crate::prox::{proximal_gradient, IterCaps, StageResult};
use crate::Result;

/// Driver configuration.
#[derive(Debug, Clone)]
pub struct PathConfig {
    /// Geometric decay factor, restricted to `[0.9, 1)`.
    pub eta: f64,
    /// Target regularization parameter (the final stage value).
    pub lambda_tgt: f64,
    /// Optimization precision of the final stage.
    pub eps_opt: f64,
    /// Floor for the line-search quadratic coefficient.
    pub l_min: f64,
    /// ℓ₂-ball radius; finite values are required for logistic loss and
    /// allowed elsewhere.
    pub radius: f64,
    /// Per-stage iteration budgets.
    pub caps: IterCaps,
}

impl PathConfig {
    /// Configuration with the conventional defaults `ε_opt = L_min = 1e-6`
    /// and an unconstrained ball.
    pub fn new(eta: f64, lambda_tgt: f64) -> Result<Self> {
        let cfg = PathConfig {
            eta,
            lambda_tgt,
            eps_opt: 1e-6,
            l_min: 1e-6,
            radius: f64::INFINITY,
            caps: IterCaps::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the hard parameter constraints.
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.9 && self.eta < 1.0) {
            return Err(Error::InvalidConfig(format!("η must lie in [0.9, 1), got {}", self.eta)));
        }
        if !(self.lambda_tgt > 0.0) || !self.lambda_tgt.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "λ_tgt must be positive, got {}",
                self.lambda_tgt
            )));
        }
        if !(self.eps_opt > 0.0) {
            return Err(Error::InvalidConfig(format!("ε_opt must be positive, got {}", self.eps_opt)));
        }
        if !(self.l_min > 0.0) {
            return Err(Error::InvalidConfig(format!("L_min must be positive, got {}", self.l_min)));
        }
        if !(self.radius > 0.0) {
            return Err(Error::InvalidConfig(format!("radius must be positive, got {}", self.radius)));
        }
        Ok(())
    }

    /// Soft sanity warnings: the final-stage precision is supposed to sit
    /// well below `λ_tgt/4`.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.eps_opt > self.lambda_tgt / 40.0 {
            out.push(format!(
                "ε_opt = {} is not ≪ λ_tgt/4 = {}; final-stage precision may be too loose",
                self.eps_opt,
                self.lambda_tgt / 4.0
            ));
        }
        out
    }
}

/// Geometric λ schedule with its per-stage precision targets.
#[derive(Debug, Clone)]
pub struct PathSchedule {
    /// `λ₀ = ‖∇L(0)‖_∞`.
    pub lambda0: f64,
    /// Stage parameters `λ_1 > … > λ_N` with `λ_N = λ_tgt` pinned exactly.
    pub lambdas: Vec<f64>,
    /// Stage precisions: `ε_t = λ_t/4` for `t < N`, `ε_N = ε_opt`.
    pub eps: Vec<f64>,
}

impl PathSchedule {
    /// Builds the schedule for a known `λ₀`.
    ///
    /// The stage count is `N = ⌈log(λ₀/λ_tgt)/log(1/η)⌉`, realized as the
    /// number of geometric values strictly above `λ_tgt` plus the pinned
    /// final stage; pinning keeps the `ε_N = ε_opt` semantics when the
    /// user-supplied `(η, λ_tgt)` do not align on an integer stage count.
    pub fn build(lambda0: f64, cfg: &PathConfig) -> Result<Self> {
        cfg.validate()?;
        if !(lambda0 > 0.0) || !lambda0.is_finite() {
            return Err(Error::InvalidConfig(format!("λ₀ must be positive, got {lambda0}")));
        }
        if cfg.lambda_tgt >= lambda0 {
            return Err(Error::TargetAboveLambdaZero {
                lambda_tgt: cfg.lambda_tgt,
                lambda_zero: lambda0,
            });
        }
        let mut lambdas = Vec::new();
        let mut t = 1i32;
        loop {
            let lt = lambda0 * cfg.eta.powi(t);
            if lt > cfg.lambda_tgt {
                lambdas.push(lt);
                t += 1;
            } else {
                break;
            }
        }
        lambdas.push(cfg.lambda_tgt);
        let n = lambdas.len();
        let mut eps: Vec<f64> = lambdas.iter().take(n - 1).map(|l| l / 4.0).collect();
        eps.push(cfg.eps_opt);
        Ok(PathSchedule { lambda0, lambdas, eps })
    }

    /// Number of stages `N`.
    pub fn n_stages(&self) -> usize {
        self.lambdas.len()
    }
}

/// Builds the schedule from the model's own `λ₀`.
pub fn build_schedule(model: &LossModel, cfg: &PathConfig) -> Result<PathSchedule> {
    PathSchedule::build(model.lambda_zero()?, cfg)
}

/// One completed stage.
#[derive(Debug, Clone)]
pub struct StageSolution {
    /// Stage index `t` (1-based).
    pub stage: usize,
    /// Stage regularization parameter.
    pub lambda: f64,
    /// Stage precision target.
    pub eps: f64,
    /// Solver output for the stage.
    pub result: StageResult,
}

/// Full-path output.
#[derive(Debug, Clone)]
pub struct PathResult {
    /// Schedule the run followed.
    pub schedule: PathSchedule,
    /// Per-stage solutions in order `t = 1…N`.
    pub stages: Vec<StageSolution>,
}

impl PathResult {
    /// Final-stage iterate.
    pub fn final_beta(&self) -> &Array1<f64> {
        &self.stages.last().expect("path has at least one stage").result.beta
    }

    /// True when every stage certified its precision target.
    pub fn all_certified(&self) -> bool {
        self.stages.iter().all(|s| s.result.converged)
    }
}

/// Runs the full path: `β̃₀ = 0`, `L₀ = L_min`, then each stage warm-starts
/// from the previous one. Non-converged stages are flagged and the run
/// continues, since the warm start stays usable.
///
/// `ground_truth` only annotates traces with ℓ₂ errors; it never enters the
/// optimization.
pub fn run_path(
    model: &LossModel,
    penalty: &Penalty,
    cfg: &PathConfig,
    ground_truth: Option<ArrayView1<'_, f64>>,
) -> Result<PathResult> {
    cfg.validate()?;
    if matches!(model, LossModel::Logistic(_)) && !cfg.radius.is_finite() {
        return Err(Error::InvalidConfig(
            "logistic loss requires a finite ℓ₂-ball radius".into(),
        ));
    }
    let schedule = build_schedule(model, cfg)?;
    let mut beta = Array1::zeros(model.dim());
    let mut l_warm = cfg.l_min;
    let mut stages = Vec::with_capacity(schedule.n_stages());
    for (idx, (&lambda, &eps)) in schedule.lambdas.iter().zip(schedule.eps.iter()).enumerate() {
        let result = proximal_gradient(
            model,
            penalty,
            lambda,
            eps,
            beta.view(),
            l_warm,
            cfg.l_min,
            cfg.radius,
            &cfg.caps,
            ground_truth,
        )?;
        beta = result.beta.clone();
        l_warm = result.l_out;
        stages.push(StageSolution { stage: idx + 1, lambda, eps, result });
    }
    Ok(PathResult { schedule, stages })
}
