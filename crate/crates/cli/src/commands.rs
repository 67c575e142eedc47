//! The five subcommands: solve, path, experiment, gen, check.

use std::fs;
use std::path::Path;

use ndarray::Array1;
use rayon::prelude::*;
use serde::Serialize;

use ncpath_core::diagnostics::{recovery_metrics, RecoveryMetrics, DEFAULT_ZERO_TOL};
use ncpath_core::loss::LossModel;
use ncpath_core::path::{build_schedule, run_path, PathConfig, PathResult};
use ncpath_core::penalty::Penalty;
use ncpath_core::prox::{proximal_gradient, suboptimality, StageResult};
use ncpath_core::trace::{design_to_csv, path_trace_csv, stage_trace_csv, PathSummary};

use crate::config::{Method, RunConfig};
use crate::problem::{build_problem, resolve_lambda_tgt, Problem};
use crate::CliError;

fn ensure_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create output dir {}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn path_config(cfg: &RunConfig, lambda_tgt: f64) -> Result<PathConfig, CliError> {
    let mut pc =
        PathConfig::new(cfg.eta, lambda_tgt).map_err(|e| CliError::Config(e.to_string()))?;
    pc.eps_opt = cfg.eps_opt;
    pc.l_min = cfg.l_min;
    pc.radius = cfg.radius;
    pc.caps = cfg.caps();
    pc.validate().map_err(|e| CliError::Config(e.to_string()))?;
    for w in pc.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(pc)
}

/// Recomputes the certificate at a solution and checks it against the value
/// the solver reported.
fn revalidate_omega(
    model: &LossModel,
    penalty: &Penalty,
    lambda: f64,
    radius: f64,
    beta: &Array1<f64>,
    reported: f64,
) -> Result<f64, CliError> {
    let sub = suboptimality(model, penalty, lambda, beta.view(), radius)
        .map_err(|e| CliError::Solver(e.to_string()))?;
    if (sub.omega - reported).abs() > 1e-9 * (1.0 + reported.abs()) {
        return Err(CliError::Solver(format!(
            "certificate mismatch: reported ω = {reported}, recomputed ω = {}",
            sub.omega
        )));
    }
    Ok(sub.omega)
}

#[derive(Serialize)]
struct SolveArtifact {
    lambda: f64,
    omega: f64,
    converged: bool,
    boundary_hit: bool,
    iters: usize,
    phi: f64,
    nnz: usize,
    beta: Vec<f64>,
}

/// One proximal-gradient solve at a fixed λ.
pub fn cmd_solve(cfg: &RunConfig) -> Result<i32, CliError> {
    let lambda = cfg
        .solve_lambda
        .ok_or_else(|| CliError::Config("solve requires solve.lambda".into()))?;
    let problem = build_problem(cfg, 0)?;
    let zero = Array1::zeros(problem.d);
    let stage: StageResult = proximal_gradient(
        &problem.model,
        &cfg.penalty,
        lambda,
        cfg.eps_opt,
        zero.view(),
        cfg.l_min,
        cfg.l_min,
        cfg.radius,
        &cfg.caps(),
        problem.truth.as_ref().map(|t| t.beta_star.view()),
    )
    .map_err(|e| CliError::Solver(e.to_string()))?;

    ensure_out(&cfg.out)?;
    write_file(&cfg.out.join("solve_trace.csv"), &stage_trace_csv(1, &stage))?;
    let omega =
        revalidate_omega(&problem.model, &cfg.penalty, lambda, cfg.radius, &stage.beta, stage.omega_final)?;
    let artifact = SolveArtifact {
        lambda,
        omega,
        converged: stage.converged,
        boundary_hit: stage.boundary_hit,
        iters: stage.iters,
        phi: stage.phi_final,
        nnz: stage.nnz(),
        beta: stage.beta.to_vec(),
    };
    write_file(
        &cfg.out.join("solution.json"),
        &serde_json::to_string_pretty(&artifact).expect("serializable"),
    )?;
    println!(
        "solve: λ = {lambda}, ω = {omega}, converged = {}, nnz = {}",
        stage.converged,
        stage.nnz()
    );
    Ok(if stage.converged { 0 } else { 1 })
}

/// Full path run with trace and summary artifacts.
pub fn cmd_path(cfg: &RunConfig) -> Result<i32, CliError> {
    let problem = build_problem(cfg, 0)?;
    let lambda_tgt = resolve_lambda_tgt(cfg, problem.n, problem.d)?;
    let pc = path_config(cfg, lambda_tgt)?;
    let schedule =
        build_schedule(&problem.model, &pc).map_err(|e| CliError::Config(e.to_string()))?;
    println!("path: λ₀ = {}, N = {} stages, λ_tgt = {lambda_tgt}", schedule.lambda0, schedule.n_stages());

    let path = run_path(
        &problem.model,
        &cfg.penalty,
        &pc,
        problem.truth.as_ref().map(|t| t.beta_star.view()),
    )
    .map_err(|e| CliError::Solver(e.to_string()))?;

    for stage in &path.stages {
        revalidate_omega(
            &problem.model,
            &cfg.penalty,
            stage.lambda,
            cfg.radius,
            &stage.result.beta,
            stage.result.omega_final,
        )?;
    }

    ensure_out(&cfg.out)?;
    write_file(&cfg.out.join("path_trace.csv"), &path_trace_csv(&path))?;
    let summary = PathSummary::from_path(&path);
    write_file(
        &cfg.out.join("path_summary.json"),
        &serde_json::to_string_pretty(&summary).expect("serializable"),
    )?;
    let final_nnz = path.final_beta().iter().filter(|&&v| v != 0.0).count();
    println!("path: finished, final nnz = {final_nnz}, all certified = {}", path.all_certified());
    Ok(if path.all_certified() { 0 } else { 1 })
}

#[derive(Serialize, Clone)]
struct RepMetrics {
    rep: u64,
    method: &'static str,
    tps: usize,
    fps: usize,
    l2_error: f64,
    exact_support: bool,
    certified: bool,
    nnz: usize,
}

struct RepOutcome {
    rep: u64,
    metrics: Vec<RepMetrics>,
    ncpath_run: Option<PathResult>,
}

fn run_method(
    method: Method,
    problem: &Problem,
    cfg: &RunConfig,
    pc: &PathConfig,
) -> Result<(Array1<f64>, bool, Option<PathResult>), CliError> {
    match method {
        Method::Ncpath | Method::LassoBaseline => {
            let penalty =
                if method == Method::Ncpath { cfg.penalty } else { Penalty::l1() };
            let path = run_path(
                &problem.model,
                &penalty,
                pc,
                problem.truth.as_ref().map(|t| t.beta_star.view()),
            )
            .map_err(|e| CliError::Solver(e.to_string()))?;
            for stage in &path.stages {
                revalidate_omega(
                    &problem.model,
                    &penalty,
                    stage.lambda,
                    cfg.radius,
                    &stage.result.beta,
                    stage.result.omega_final,
                )?;
            }
            let beta = path.final_beta().clone();
            let certified = path.all_certified();
            let keep = if method == Method::Ncpath { Some(path) } else { None };
            Ok((beta, certified, keep))
        }
        Method::Oracle => {
            let truth = problem.truth.as_ref().expect("checked by cmd_experiment");
            let beta =
                ncpath_core::diagnostics::oracle_estimator(&problem.model, &truth.support, cfg.radius)
                    .map_err(|e| CliError::Solver(e.to_string()))?;
            Ok((beta, true, None))
        }
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo experiment over seeded replications.
pub fn cmd_experiment(cfg: &RunConfig) -> Result<i32, CliError> {
    if cfg.generator.is_none() {
        return Err(CliError::Config("experiment requires a gen.* generator block".into()));
    }
    if cfg.methods.contains(&Method::Oracle) && cfg.generator.is_none() {
        return Err(CliError::Config("the oracle method needs generated ground truth".into()));
    }
    ensure_out(&cfg.out)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallel.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;

    let results: Vec<Result<RepOutcome, (u64, String)>> = pool.install(|| {
        (0..cfg.reps as u64)
            .into_par_iter()
            .map(|rep| {
                let run = || -> Result<RepOutcome, CliError> {
                    let problem = build_problem(cfg, rep)?;
                    let truth = problem
                        .truth
                        .as_ref()
                        .ok_or_else(|| CliError::Config("experiment needs ground truth".into()))?
                        .clone();
                    let lambda_tgt = resolve_lambda_tgt(cfg, problem.n, problem.d)?;
                    let pc = path_config(cfg, lambda_tgt)?;
                    let mut metrics = Vec::new();
                    let mut ncpath_run = None;
                    for &method in &cfg.methods {
                        let (beta, certified, path) = run_method(method, &problem, cfg, &pc)?;
                        let m: RecoveryMetrics =
                            recovery_metrics(beta.view(), &truth, DEFAULT_ZERO_TOL);
                        metrics.push(RepMetrics {
                            rep,
                            method: method.name(),
                            tps: m.tps,
                            fps: m.fps,
                            l2_error: m.l2_error,
                            exact_support: m.exact_support,
                            certified,
                            nnz: beta.iter().filter(|&&v| v != 0.0).count(),
                        });
                        if path.is_some() {
                            ncpath_run = path;
                        }
                    }
                    Ok(RepOutcome { rep, metrics, ncpath_run })
                };
                run().map_err(|e| (rep, e.to_string()))
            })
            .collect()
    });

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err((rep, msg)) => failures.push((rep, msg)),
        }
    }
    outcomes.sort_by_key(|o| o.rep);

    // Per-replication metrics (JSON array + CSV).
    let all_metrics: Vec<RepMetrics> =
        outcomes.iter().flat_map(|o| o.metrics.iter().cloned()).collect();
    write_file(
        &cfg.out.join("replications.json"),
        &serde_json::to_string_pretty(&all_metrics).expect("serializable"),
    )?;
    let mut csv = String::from("rep,method,tps,fps,l2_error,exact_support,certified,nnz\n");
    for m in &all_metrics {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            m.rep, m.method, m.tps, m.fps, m.l2_error, m.exact_support, m.certified, m.nnz
        ));
    }
    write_file(&cfg.out.join("replications.csv"), &csv)?;

    // Aggregate table: mean and standard error per method.
    let mut agg = String::from("method,tps_mean,tps_se,fps_mean,fps_se,l2_mean,l2_se\n");
    println!("method           tps (se)          fps (se)          l2 (se)");
    for &method in &cfg.methods {
        let rows: Vec<&RepMetrics> =
            all_metrics.iter().filter(|m| m.method == method.name()).collect();
        if rows.is_empty() {
            continue;
        }
        let tps: Vec<f64> = rows.iter().map(|m| m.tps as f64).collect();
        let fps: Vec<f64> = rows.iter().map(|m| m.fps as f64).collect();
        let l2: Vec<f64> = rows.iter().map(|m| m.l2_error).collect();
        let (tm, ts) = mean_and_se(&tps);
        let (fm, fs) = mean_and_se(&fps);
        let (lm, ls) = mean_and_se(&l2);
        agg.push_str(&format!("{},{tm},{ts},{fm},{fs},{lm},{ls}\n", method.name()));
        println!("{:<16} {tm:.3} ({ts:.3})    {fm:.3} ({fs:.3})    {lm:.4} ({ls:.4})", method.name());
    }
    write_file(&cfg.out.join("aggregate.csv"), &agg)?;

    // Stage traces of replication 0 for the nonconvex path.
    if let Some(first) = outcomes.iter().find(|o| o.rep == 0) {
        if let Some(path) = &first.ncpath_run {
            write_file(&cfg.out.join("trace_rep0.csv"), &path_trace_csv(path))?;
        }
    }

    if !failures.is_empty() {
        let mut log = String::new();
        for (rep, msg) in &failures {
            log.push_str(&format!("replication {rep}: {msg}\n"));
        }
        write_file(&cfg.out.join("failures.log"), &log)?;
        eprintln!("{} of {} replications failed", failures.len(), cfg.reps);
    }
    let failed_frac = failures.len() as f64 / cfg.reps as f64;
    Ok(if failed_frac > 0.10 { 1 } else { 0 })
}

#[derive(Serialize)]
struct TruthArtifact {
    beta_star: Vec<f64>,
    support: Vec<usize>,
    s_star: usize,
}

/// Dumps a generated problem to CSV (plus ground truth JSON).
pub fn cmd_gen(cfg: &RunConfig) -> Result<i32, CliError> {
    if cfg.generator.is_none() {
        return Err(CliError::Config("gen requires a gen.* generator block".into()));
    }
    let design = cfg.generator.as_ref().unwrap();
    let (data, truth) = ncpath_core::datagen::gen_problem(design)
        .map_err(|e| CliError::Config(e.to_string()))?;
    ensure_out(&cfg.out)?;
    write_file(&cfg.out.join("problem.csv"), &design_to_csv(&data))?;
    let artifact = TruthArtifact {
        beta_star: truth.beta_star.to_vec(),
        support: truth.support.clone(),
        s_star: truth.s_star,
    };
    write_file(
        &cfg.out.join("truth.json"),
        &serde_json::to_string_pretty(&artifact).expect("serializable"),
    )?;
    println!("gen: wrote {} samples × {} predictors", data.n(), data.d());
    Ok(0)
}

/// Penalty regularity and gradient-consistency self-tests on the configured
/// problem.
pub fn cmd_check(cfg: &RunConfig) -> Result<i32, CliError> {
    let problem = build_problem(cfg, 0)?;
    let mut ok = true;

    // Penalty regularity over a default grid (plus λ_tgt when resolvable).
    let mut lambdas = vec![0.05, 0.5, 1.0, 2.0];
    if let Ok(lt) = resolve_lambda_tgt(cfg, problem.n, problem.d) {
        lambdas.push(lt);
    }
    let betas: Vec<f64> = (0..4001).map(|i| -10.0 + 20.0 * i as f64 / 4000.0).collect();
    let rep = cfg
        .penalty
        .check_regularity(&lambdas, &betas)
        .map_err(|e| CliError::Config(e.to_string()))?;
    println!("check: penalty regularity (a)-(e): {}", if rep.all_pass() { "pass" } else { "FAIL" });
    ok &= rep.all_pass();

    // Gradient consistency against central finite differences at seeded
    // probe points.
    let mut worst = 0.0f64;
    let d = problem.d;
    let lambda = cfg.solve_lambda.unwrap_or(0.5);
    for probe in 0..5 {
        let beta = Array1::from_shape_fn(d, |j| {
            let t = (probe * d + j) as f64 * 0.618;
            (t.sin() * 1.3) % 1.0
        });
        let grad = problem
            .model
            .surrogate_grad(&cfg.penalty, lambda, beta.view())
            .map_err(|e| CliError::Solver(e.to_string()))?;
        let h = 1e-6;
        for j in (0..d).step_by((d / 8).max(1)) {
            let mut hi = beta.clone();
            let mut lo = beta.clone();
            hi[j] += h;
            lo[j] -= h;
            let f = |b: &Array1<f64>| -> Result<f64, CliError> {
                Ok(problem.model.value(b.view()).map_err(|e| CliError::Solver(e.to_string()))?
                    + cfg.penalty.concave_total(lambda, b.view()))
            };
            let fd = (f(&hi)? - f(&lo)?) / (2.0 * h);
            let tol = 1e-6f64.max(1e-4 * grad[j].abs());
            worst = worst.max((grad[j] - fd).abs() / tol);
        }
    }
    let grad_ok = worst <= 1.0;
    println!("check: gradient consistency (worst ratio {worst:.3}): {}", if grad_ok { "pass" } else { "FAIL" });
    ok &= grad_ok;

    Ok(if ok { 0 } else { 1 })
}
