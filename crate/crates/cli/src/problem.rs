//! Builds a loss model (and optional ground truth) from a run configuration.

use ndarray::Array2;

use ncpath_core::datagen::{gen_elliptical_samples_rep, gen_problem_rep};
use ncpath_core::diagnostics::GroundTruth;
use ncpath_core::loss::{DesignData, LossModel};
use ncpath_core::robust::{elliptical_cov, CatoniConfig};
use ncpath_core::trace::design_from_csv;

use crate::config::{LossKind, RunConfig};
use crate::CliError;

/// Model plus provenance needed by the commands.
pub struct Problem {
    pub model: LossModel,
    pub truth: Option<GroundTruth>,
    /// Sample count backing the model (rows of the data or generator `n`).
    pub n: usize,
    pub d: usize,
}

fn load_csv(cfg: &RunConfig) -> Result<DesignData, CliError> {
    let path = cfg.data.as_ref().expect("caller checked data presence");
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read data file {}: {e}", path.display())))?;
    design_from_csv(&text, cfg.response.as_deref()).map_err(|e| CliError::Config(e.to_string()))
}

/// Builds the problem for replication stream `rep`.
pub fn build_problem(cfg: &RunConfig, rep: u64) -> Result<Problem, CliError> {
    match cfg.loss {
        LossKind::LeastSquares | LossKind::Logistic => {
            let (data, truth) = match (&cfg.data, &cfg.generator) {
                (Some(_), _) => (load_csv(cfg)?, None),
                (None, Some(design)) => {
                    let (data, truth) =
                        gen_problem_rep(design, rep).map_err(|e| CliError::Config(e.to_string()))?;
                    (data, Some(truth))
                }
                (None, None) => unreachable!("validated by RunConfig"),
            };
            let (n, d) = (data.n(), data.d());
            let model = if cfg.loss == LossKind::LeastSquares {
                LossModel::least_squares(data)
            } else {
                LossModel::logistic(data).map_err(|e| CliError::Config(e.to_string()))?
            };
            Ok(Problem { model, truth, n, d })
        }
        LossKind::Elliptical => {
            let (z, truth): (Array2<f64>, Option<GroundTruth>) = match (&cfg.data, &cfg.generator)
            {
                (Some(_), _) => {
                    let data = load_csv(cfg)?;
                    let (n, d) = (data.n(), data.d());
                    let mut z = Array2::zeros((n, d + 1));
                    for i in 0..n {
                        z[[i, 0]] = data.y()[i];
                        for j in 0..d {
                            z[[i, j + 1]] = data.x()[[i, j]];
                        }
                    }
                    (z, None)
                }
                (None, Some(design)) => {
                    let (z, truth) = gen_elliptical_samples_rep(design, rep)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                    (z, Some(truth))
                }
                (None, None) => unreachable!("validated by RunConfig"),
            };
            let n = z.nrows();
            let d = z.ncols() - 1;
            let catoni = CatoniConfig::default_for(z.view())
                .map_err(|e| CliError::Config(e.to_string()))?;
            let cov =
                elliptical_cov(z.view(), &catoni).map_err(|e| CliError::Solver(e.to_string()))?;
            Ok(Problem { model: LossModel::elliptical(cov), truth, n, d })
        }
    }
}

/// Resolves the target regularization parameter from the config.
pub fn resolve_lambda_tgt(cfg: &RunConfig, n: usize, d: usize) -> Result<f64, CliError> {
    if let Some(v) = cfg.lambda_tgt {
        return Ok(v);
    }
    if let Some(c) = cfg.lambda_tgt_c {
        return Ok(ncpath_core::loss::target_lambda(c, n, d));
    }
    Err(CliError::Config("set path.lambda_tgt or path.lambda_tgt_c".into()))
}
