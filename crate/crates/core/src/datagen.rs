//! Seeded synthetic problem generators.
//!
//! Rows are drawn from Gaussian or multivariate-t laws with AR(1) or
//! equicorrelated correlation structure, scaled to unit marginal variance.
//! All draws come from a counter-based ChaCha stream: replication `r` uses
//! stream `r` of the base seed, so any replication is reproducible in
//! isolation and across platforms at the algorithmic level.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal, StudentT};

use crate::diagnostics::GroundTruth;
use crate::error::Error;
use crate::loss::DesignData;
use crate::Result;

/// Row distribution of the design matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignKind {
    /// Gaussian rows with correlation `ρ^{|i−j|}`.
    ArGaussian { rho: f64 },
    /// Multivariate-t rows (Gaussian over √(χ²_ν/ν)), correlation `ρ^{|i−j|}`,
    /// rescaled to unit marginal variance.
    ArT { rho: f64, dof: f64 },
    /// Gaussian rows with constant off-diagonal correlation `ρ`.
    EquiGaussian { rho: f64 },
}

/// Distribution of the nonzero coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalKind {
    /// Independent standard Gaussian draws.
    GaussianCoeffs,
    /// `±magnitude` with equal probability.
    PlusMinus { magnitude: f64 },
}

/// Additive response noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    /// Gaussian with the given standard deviation.
    Gaussian { sd: f64 },
    /// Student t with the given degrees of freedom, scaled to the given
    /// variance (requires `dof > 2`).
    T { dof: f64, variance: f64 },
}

/// Complete description of a synthetic regression problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentDesign {
    /// Number of samples.
    pub n: usize,
    /// Number of predictors.
    pub d: usize,
    /// Number of nonzero coefficients, placed on the first coordinates.
    pub s_star: usize,
    /// Design-row law.
    pub design: DesignKind,
    /// Coefficient law.
    pub signal: SignalKind,
    /// Noise law.
    pub noise: NoiseKind,
    /// Base seed; replications use independent streams of it.
    pub seed: u64,
}

impl ExperimentDesign {
    /// Validates parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidConfig("generator requires n ≥ 1 and d ≥ 1".into()));
        }
        if self.s_star > self.d {
            return Err(Error::InvalidConfig(format!(
                "s* = {} exceeds dimension {}",
                self.s_star, self.d
            )));
        }
        let rho = match self.design {
            DesignKind::ArGaussian { rho } | DesignKind::EquiGaussian { rho } => rho,
            DesignKind::ArT { rho, dof } => {
                if !(dof > 2.0) {
                    return Err(Error::InvalidConfig(format!(
                        "t design requires dof > 2 for unit-variance scaling, got {dof}"
                    )));
                }
                rho
            }
        };
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidConfig(format!("correlation must lie in [0, 1), got {rho}")));
        }
        match self.noise {
            NoiseKind::Gaussian { sd } => {
                if sd < 0.0 {
                    return Err(Error::InvalidConfig("noise sd must be nonnegative".into()));
                }
            }
            NoiseKind::T { dof, variance } => {
                if !(dof > 2.0) || variance < 0.0 {
                    return Err(Error::InvalidConfig(
                        "t noise requires dof > 2 and nonnegative variance".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Independent, reproducible RNG stream for replication `rep`.
    fn rng(&self, rep: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(rep);
        rng
    }
}

fn draw_row(design: &DesignKind, d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match *design {
        DesignKind::ArGaussian { rho } => ar_gaussian_row(rho, d, rng),
        DesignKind::ArT { rho, dof } => {
            let mut row = ar_gaussian_row(rho, d, rng);
            let chi = ChiSquared::new(dof).expect("validated dof");
            let u: f64 = chi.sample(rng) / dof;
            // Division by √u makes the row t-distributed with correlation
            // ρ^{|i−j|}; the final factor restores unit marginal variance.
            let scale = ((dof - 2.0) / dof).sqrt() / u.sqrt();
            for x in &mut row {
                *x *= scale;
            }
            row
        }
        DesignKind::EquiGaussian { rho } => {
            let shared: f64 = StandardNormal.sample(rng);
            (0..d)
                .map(|_| {
                    let g: f64 = StandardNormal.sample(rng);
                    rho.sqrt() * shared + (1.0 - rho).sqrt() * g
                })
                .collect()
        }
    }
}

fn ar_gaussian_row(rho: f64, d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut row = Vec::with_capacity(d);
    let innov = (1.0 - rho * rho).sqrt();
    let mut prev: f64 = StandardNormal.sample(rng);
    row.push(prev);
    for _ in 1..d {
        let g: f64 = StandardNormal.sample(rng);
        prev = rho * prev + innov * g;
        row.push(prev);
    }
    row
}

fn draw_signal(design: &ExperimentDesign, rng: &mut ChaCha8Rng) -> Array1<f64> {
    let mut beta = Array1::zeros(design.d);
    for j in 0..design.s_star {
        beta[j] = match design.signal {
            SignalKind::GaussianCoeffs => StandardNormal.sample(rng),
            SignalKind::PlusMinus { magnitude } => {
                if rng.random_bool(0.5) {
                    magnitude
                } else {
                    -magnitude
                }
            }
        };
    }
    beta
}

fn draw_noise(noise: &NoiseKind, n: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    match *noise {
        NoiseKind::Gaussian { sd } => {
            Array1::from_shape_fn(n, |_| sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        }
        NoiseKind::T { dof, variance } => {
            let t = StudentT::new(dof).expect("validated dof");
            // A standard t(ν) has variance ν/(ν−2); rescale to the target.
            let scale = (variance * (dof - 2.0) / dof).sqrt();
            Array1::from_shape_fn(n, |_| scale * t.sample(rng))
        }
    }
}

/// Generates one problem instance from replication stream `rep`.
pub fn gen_problem_rep(design: &ExperimentDesign, rep: u64) -> Result<(DesignData, GroundTruth)> {
    design.validate()?;
    let mut rng = design.rng(rep);
    let beta_star = draw_signal(design, &mut rng);
    let mut x = Array2::zeros((design.n, design.d));
    for i in 0..design.n {
        let row = draw_row(&design.design, design.d, &mut rng);
        for (j, v) in row.into_iter().enumerate() {
            x[[i, j]] = v;
        }
    }
    let noise = draw_noise(&design.noise, design.n, &mut rng);
    let y = x.dot(&beta_star) + &noise;
    Ok((DesignData::new(x, y)?, GroundTruth::new(beta_star)))
}

/// Generates one problem instance from the base stream.
pub fn gen_problem(design: &ExperimentDesign) -> Result<(DesignData, GroundTruth)> {
    gen_problem_rep(design, 0)
}

/// Stacks `(y_i, x_iᵀ)` rows into the `n×(d+1)` matrix consumed by the
/// rank-based covariance pipeline; column 0 is the response.
pub fn gen_elliptical_samples_rep(
    design: &ExperimentDesign,
    rep: u64,
) -> Result<(Array2<f64>, GroundTruth)> {
    let (data, truth) = gen_problem_rep(design, rep)?;
    let n = data.n();
    let d = data.d();
    let mut z = Array2::zeros((n, d + 1));
    for i in 0..n {
        z[[i, 0]] = data.y()[i];
        for j in 0..d {
            z[[i, j + 1]] = data.x()[[i, j]];
        }
    }
    Ok((z, truth))
}

/// [`gen_elliptical_samples_rep`] on the base stream.
pub fn gen_elliptical_samples(design: &ExperimentDesign) -> Result<(Array2<f64>, GroundTruth)> {
    gen_elliptical_samples_rep(design, 0)
}
