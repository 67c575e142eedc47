use thiserror::Error;

/// Errors produced by solver construction and execution.
#[derive(Debug, Error)]
pub enum Error {
    /// Penalty parameters outside their admissible range.
    #[error("invalid penalty parameters: {0}")]
    InvalidPenalty(String),

    /// Data fails a structural invariant (shape, finiteness, label range).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// Vector/matrix dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Configuration value outside its admissible range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// `‖∇L(0)‖_∞ = 0`: every coordinate is already stationary at zero.
    #[error("degenerate problem: gradient at zero vanishes, no nontrivial path exists")]
    DegenerateLambdaZero,

    /// Requested `λ_tgt` is not below `λ₀`.
    #[error("target exceeds λ₀: solution path is identically zero (λ_tgt = {lambda_tgt}, λ₀ = {lambda_zero})")]
    TargetAboveLambdaZero { lambda_tgt: f64, lambda_zero: f64 },

    /// The Catoni estimating equation is infeasible at this sample size.
    #[error("Catoni infeasible: n too small for δ (n = {n}, need n > 2·log(1/δ) = {required:.3})")]
    CatoniInfeasible { n: usize, required: f64 },

    /// The line search kept doubling without the model majorizing the
    /// objective; signals non-finite data or a broken gradient.
    #[error("line search diverged after {doublings} doublings")]
    LineSearchDiverged { doublings: usize },

    /// A gradient evaluation returned NaN or infinity.
    #[error("non-finite gradient encountered")]
    NonFiniteGradient,

    /// Restricted normal equations are singular.
    #[error("restricted Gram matrix is singular: {0}")]
    SingularRestrictedSystem(String),

    /// An iterative routine failed to reach its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// I/O failure while reading or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file contents.
    #[error("parse error: {0}")]
    Parse(String),
}
