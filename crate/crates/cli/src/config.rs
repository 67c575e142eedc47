//! Flat key-value run configuration.
//!
//! The format is one `key = value` pair per line; `#` starts a comment.
//! Unknown keys are rejected so typos surface as configuration errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ncpath_core::datagen::{DesignKind, ExperimentDesign, NoiseKind, SignalKind};
use ncpath_core::penalty::Penalty;
use ncpath_core::prox::IterCaps;

use crate::CliError;

const KNOWN_KEYS: &[&str] = &[
    "loss",
    "data",
    "response",
    "radius",
    "seed",
    "gen.n",
    "gen.d",
    "gen.s_star",
    "gen.design",
    "gen.rho",
    "gen.dof",
    "gen.signal",
    "gen.magnitude",
    "gen.noise",
    "gen.noise_sd",
    "gen.noise_dof",
    "gen.noise_variance",
    "penalty.kind",
    "penalty.a",
    "penalty.b",
    "path.eta",
    "path.lambda_tgt",
    "path.lambda_tgt_c",
    "path.eps_opt",
    "path.l_min",
    "caps.max_iters",
    "solve.lambda",
    "reps",
    "methods",
    "out",
    "parallel",
];

/// Loss selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    LeastSquares,
    Logistic,
    Elliptical,
}

/// Comparison methods of the experiment command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Full nonconvex path with the configured penalty.
    Ncpath,
    /// Same path with the ℓ₁ penalty.
    LassoBaseline,
    /// Oracle estimator on the true support.
    Oracle,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Ncpath => "ncpath",
            Method::LassoBaseline => "lasso_baseline",
            Method::Oracle => "oracle",
        }
    }
}

/// Parsed and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub loss: LossKind,
    pub data: Option<PathBuf>,
    pub response: Option<String>,
    pub radius: f64,
    pub generator: Option<ExperimentDesign>,
    pub seed: u64,
    pub penalty: Penalty,
    pub eta: f64,
    pub lambda_tgt: Option<f64>,
    pub lambda_tgt_c: Option<f64>,
    pub eps_opt: f64,
    pub l_min: f64,
    pub max_iters: usize,
    pub solve_lambda: Option<f64>,
    pub reps: usize,
    pub methods: Vec<Method>,
    pub out: PathBuf,
    pub parallel: usize,
}

impl RunConfig {
    /// Parses the flat key-value text.
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("line {}: unknown key '{key}'", lineno + 1)));
            }
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("duplicate key '{key}'")));
            }
        }
        RunConfig::from_map(&map)
    }

    fn from_map(map: &BTreeMap<String, String>) -> Result<RunConfig, CliError> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let parse_f64 = |k: &str| -> Result<Option<f64>, CliError> {
            match get(k) {
                None => Ok(None),
                Some("inf") | Some("infinity") if k == "radius" => Ok(Some(f64::INFINITY)),
                Some(v) => v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| CliError::Config(format!("{k}: bad number '{v}'"))),
            }
        };
        let parse_usize = |k: &str| -> Result<Option<usize>, CliError> {
            match get(k) {
                None => Ok(None),
                Some(v) => v
                    .parse::<usize>()
                    .map(Some)
                    .map_err(|_| CliError::Config(format!("{k}: bad integer '{v}'"))),
            }
        };

        let loss = match get("loss").unwrap_or("ls") {
            "ls" | "least_squares" => LossKind::LeastSquares,
            "logistic" => LossKind::Logistic,
            "elliptical" => LossKind::Elliptical,
            other => return Err(CliError::Config(format!("loss: unknown kind '{other}'"))),
        };

        let seed = match get("seed") {
            None => 0,
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| CliError::Config(format!("seed: bad integer '{v}'")))?,
        };

        let generator = if map.keys().any(|k| k.starts_with("gen.")) {
            let n = parse_usize("gen.n")?
                .ok_or_else(|| CliError::Config("gen.n is required with a generator".into()))?;
            let d = parse_usize("gen.d")?
                .ok_or_else(|| CliError::Config("gen.d is required with a generator".into()))?;
            let s_star = parse_usize("gen.s_star")?.unwrap_or(0);
            let rho = parse_f64("gen.rho")?.unwrap_or(0.0);
            let design = match get("gen.design").unwrap_or("ar_gauss") {
                "ar_gauss" => DesignKind::ArGaussian { rho },
                "ar_t" => DesignKind::ArT {
                    rho,
                    dof: parse_f64("gen.dof")?.ok_or_else(|| {
                        CliError::Config("gen.dof is required for the ar_t design".into())
                    })?,
                },
                "equi_gauss" => DesignKind::EquiGaussian { rho },
                other => {
                    return Err(CliError::Config(format!("gen.design: unknown kind '{other}'")))
                }
            };
            let signal = match get("gen.signal").unwrap_or("gauss") {
                "gauss" => SignalKind::GaussianCoeffs,
                "pm" | "plus_minus" => SignalKind::PlusMinus {
                    magnitude: parse_f64("gen.magnitude")?.unwrap_or(1.0),
                },
                other => {
                    return Err(CliError::Config(format!("gen.signal: unknown kind '{other}'")))
                }
            };
            let noise = match get("gen.noise").unwrap_or("gauss") {
                "gauss" => NoiseKind::Gaussian { sd: parse_f64("gen.noise_sd")?.unwrap_or(1.0) },
                "t" => NoiseKind::T {
                    dof: parse_f64("gen.noise_dof")?.unwrap_or(5.0),
                    variance: parse_f64("gen.noise_variance")?.unwrap_or(1.0),
                },
                other => {
                    return Err(CliError::Config(format!("gen.noise: unknown kind '{other}'")))
                }
            };
            let design = ExperimentDesign { n, d, s_star, design, signal, noise, seed };
            design.validate().map_err(|e| CliError::Config(e.to_string()))?;
            Some(design)
        } else {
            None
        };

        let data = get("data").map(PathBuf::from);
        if data.is_none() && generator.is_none() {
            return Err(CliError::Config(
                "either 'data' or a 'gen.*' generator block is required".into(),
            ));
        }
        if data.is_some() && generator.is_some() {
            return Err(CliError::Config("'data' and 'gen.*' are mutually exclusive".into()));
        }

        let penalty = match get("penalty.kind").unwrap_or("l1") {
            "l1" => Penalty::l1(),
            "scad" => {
                let a = parse_f64("penalty.a")?.unwrap_or(2.1);
                Penalty::scad(a).map_err(|e| CliError::Config(e.to_string()))?
            }
            "mcp" => {
                let b = parse_f64("penalty.b")?.unwrap_or(2.0);
                Penalty::mcp(b).map_err(|e| CliError::Config(e.to_string()))?
            }
            other => return Err(CliError::Config(format!("penalty.kind: unknown '{other}'"))),
        };

        let methods = match get("methods") {
            None => vec![Method::Ncpath],
            Some(list) => {
                let mut out = Vec::new();
                for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    out.push(match item {
                        "ncpath" => Method::Ncpath,
                        "lasso_baseline" => Method::LassoBaseline,
                        "oracle" => Method::Oracle,
                        other => {
                            return Err(CliError::Config(format!("methods: unknown '{other}'")))
                        }
                    });
                }
                if out.is_empty() {
                    return Err(CliError::Config("methods: empty list".into()));
                }
                out
            }
        };

        let reps = parse_usize("reps")?.unwrap_or(1);
        if reps == 0 {
            return Err(CliError::Config("reps must be at least 1".into()));
        }

        Ok(RunConfig {
            loss,
            data,
            response: get("response").map(str::to_string),
            radius: parse_f64("radius")?.unwrap_or(f64::INFINITY),
            generator,
            seed,
            penalty,
            eta: parse_f64("path.eta")?.unwrap_or(0.9),
            lambda_tgt: parse_f64("path.lambda_tgt")?,
            lambda_tgt_c: parse_f64("path.lambda_tgt_c")?,
            eps_opt: parse_f64("path.eps_opt")?.unwrap_or(1e-6),
            l_min: parse_f64("path.l_min")?.unwrap_or(1e-6),
            max_iters: parse_usize("caps.max_iters")?.unwrap_or(10_000),
            solve_lambda: parse_f64("solve.lambda")?,
            reps,
            methods,
            out: PathBuf::from(get("out").unwrap_or("out")),
            parallel: parse_usize("parallel")?.unwrap_or(1),
        })
    }

    /// Iteration caps for the solver.
    pub fn caps(&self) -> IterCaps {
        IterCaps { max_iters: self.max_iters, ..IterCaps::default() }
    }
}
