//! Artifact serialization: solver trace CSV, path summary JSON, and problem
//! CSV dump/ingest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! emitted value parses back bit-exactly.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::Error;
use crate::loss::DesignData;
use crate::path::PathResult;
use crate::prox::{IterRecord, StageResult};
use crate::Result;

/// Column header of the per-iteration trace CSV.
pub const TRACE_HEADER: &str = "stage,iter,lambda,L,phi,omega,nnz,l2_err";

fn push_record(out: &mut String, stage: usize, rec: &IterRecord) {
    let l2 = rec.l2_err.map(|v| v.to_string()).unwrap_or_default();
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{}\n",
        stage, rec.k, rec.lambda, rec.l, rec.phi, rec.omega, rec.nnz, l2
    ));
}

/// Trace CSV for a single stage solve.
pub fn stage_trace_csv(stage: usize, result: &StageResult) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for rec in &result.trace {
        push_record(&mut out, stage, rec);
    }
    out
}

/// Trace CSV over every stage of a path run.
pub fn path_trace_csv(path: &PathResult) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for stage in &path.stages {
        for rec in &stage.result.trace {
            push_record(&mut out, stage.stage, rec);
        }
    }
    out
}

/// Per-stage summary entry.
#[derive(Debug, Clone, Serialize)]
pub struct StageSummary {
    /// Stage index `t`.
    pub stage: usize,
    /// Stage regularization parameter.
    pub lambda: f64,
    /// Stage precision target.
    pub eps: f64,
    /// Iterations spent.
    pub iters: usize,
    /// Final certificate.
    pub omega: f64,
    /// Final objective.
    pub phi: f64,
    /// Nonzero count of the stage solution.
    pub nnz: usize,
    /// Whether the stage certified within its cap.
    pub converged: bool,
    /// Whether the ball boundary was touched.
    pub boundary_hit: bool,
}

/// Path summary for JSON export.
#[derive(Debug, Clone, Serialize)]
pub struct PathSummary {
    /// `λ₀ = ‖∇L(0)‖_∞` of the solved model.
    pub lambda0: f64,
    /// Number of stages.
    pub n_stages: usize,
    /// Per-stage entries.
    pub stages: Vec<StageSummary>,
}

impl PathSummary {
    /// Collects the summary of a completed path run.
    pub fn from_path(path: &PathResult) -> Self {
        PathSummary {
            lambda0: path.schedule.lambda0,
            n_stages: path.schedule.n_stages(),
            stages: path
                .stages
                .iter()
                .map(|s| StageSummary {
                    stage: s.stage,
                    lambda: s.lambda,
                    eps: s.eps,
                    iters: s.result.iters,
                    omega: s.result.omega_final,
                    phi: s.result.phi_final,
                    nnz: s.result.nnz(),
                    converged: s.result.converged,
                    boundary_hit: s.result.boundary_hit,
                })
                .collect(),
        }
    }
}

/// Problem CSV with header `y,x0,…,x{d−1}` and one row per sample.
pub fn design_to_csv(data: &DesignData) -> String {
    let d = data.d();
    let mut out = String::from("y");
    for j in 0..d {
        out.push_str(&format!(",x{j}"));
    }
    out.push('\n');
    for i in 0..data.n() {
        out.push_str(&data.y()[i].to_string());
        for j in 0..d {
            out.push(',');
            out.push_str(&data.x()[[i, j]].to_string());
        }
        out.push('\n');
    }
    out
}

/// Parses a problem CSV. With `response` set, the named header column is the
/// response; otherwise the first column is. Remaining columns become
/// predictors in file order.
pub fn design_from_csv(text: &str, response: Option<&str>) -> Result<DesignData> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let first_fields: Vec<&str> = first.split(',').map(str::trim).collect();
    let has_header = first_fields.iter().any(|f| f.parse::<f64>().is_err());

    let (resp_idx, data_lines): (usize, Vec<&str>) = if has_header {
        let idx = match response {
            Some(name) => first_fields
                .iter()
                .position(|f| *f == name)
                .ok_or_else(|| Error::Parse(format!("response column '{name}' not in header")))?,
            None => 0,
        };
        (idx, lines.collect())
    } else {
        if response.is_some() {
            return Err(Error::Parse("named response column requires a header row".into()));
        }
        (0, std::iter::once(first).chain(lines).collect())
    };

    if data_lines.is_empty() {
        return Err(Error::Parse("CSV has no data rows".into()));
    }
    let cols = data_lines[0].split(',').count();
    if cols < 2 {
        return Err(Error::Parse("CSV needs a response and at least one predictor".into()));
    }
    let n = data_lines.len();
    let d = cols - 1;
    let mut x = Array2::zeros((n, d));
    let mut y = Array1::zeros(n);
    for (i, line) in data_lines.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {cols}",
                i + 1,
                fields.len()
            )));
        }
        let mut col = 0usize;
        for (c, field) in fields.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad number '{field}'", i + 1)))?;
            if c == resp_idx {
                y[i] = v;
            } else {
                x[[i, col]] = v;
                col += 1;
            }
        }
    }
    DesignData::new(x, y)
}
