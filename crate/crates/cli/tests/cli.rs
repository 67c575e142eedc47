//! End-to-end tests driving the ncpath binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ncpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncpath")).args(args).output().expect("binary runs")
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

const SMALL_GEN: &str = "\
loss = ls
gen.n = 60
gen.d = 20
gen.s_star = 4
gen.design = ar_gauss
gen.rho = 0.5
gen.signal = pm
gen.magnitude = 2
gen.noise = gauss
gen.noise_sd = 0.5
seed = 11
penalty.kind = mcp
penalty.b = 2.0
path.eta = 0.9
path.lambda_tgt_c = 1.0
";

#[test]
fn solve_near_lambda0_emits_zero_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    // λ₀ for this instance is well below 50, so the solution stays zero.
    write(&cfg, &format!("{SMALL_GEN}solve.lambda = 50\nout = {}\n", dir.path().display()));
    let out = ncpath(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let solution: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("solution.json")).unwrap())
            .unwrap();
    assert_eq!(solution["nnz"], 0);
    assert_eq!(solution["omega"], 0.0);
    assert!(solution["converged"].as_bool().unwrap());
    assert!(dir.path().join("solve_trace.csv").exists());
}

#[test]
fn solve_below_lambda0_finds_support_with_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    write(&cfg, &format!("{SMALL_GEN}solve.lambda = 0.2\nout = {}\n", dir.path().display()));
    let out = ncpath(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let solution: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("solution.json")).unwrap())
            .unwrap();
    assert!(solution["nnz"].as_u64().unwrap() > 0);
    let omega = solution["omega"].as_f64().unwrap();
    assert!(omega <= 1e-6, "ω = {omega}");
}

#[test]
fn missing_data_file_exits_2_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    write(&cfg, "loss = ls\ndata = /nonexistent/stuff.csv\nsolve.lambda = 1\n");
    let out = ncpath(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/nonexistent/stuff.csv"), "stderr: {stderr}");
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    write(&cfg, "loss = ls\ngen.n = 10\ngen.d = 2\nbanana = 7\n");
    let out = ncpath(&["path", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("banana"));
}

#[test]
fn path_reports_schedule_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    write(&cfg, &format!("{SMALL_GEN}out = {}\n", dir.path().display()));
    let out = ncpath(&["path", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("λ₀"), "stdout: {stdout}");
    assert!(stdout.contains("stages"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("path_summary.json")).unwrap())
            .unwrap();
    assert!(summary["n_stages"].as_u64().unwrap() >= 1);
    let trace = fs::read_to_string(dir.path().join("path_trace.csv")).unwrap();
    assert!(trace.starts_with("stage,iter,lambda,L,phi,omega,nnz,l2_err"));
}

#[test]
fn path_rejects_target_above_lambda0() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    write(
        &cfg,
        &format!(
            "{}path.lambda_tgt = 1000\nout = {}\n",
            SMALL_GEN.replace("path.lambda_tgt_c = 1.0\n", ""),
            dir.path().display()
        ),
    );
    let out = ncpath(&["path", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("identically zero"));
}

#[test]
fn experiment_writes_tables_and_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    write(
        &cfg,
        &format!(
            "{SMALL_GEN}reps = 3\nmethods = ncpath, lasso_baseline, oracle\nout = {}\n",
            dir.path().join("a").display()
        ),
    );
    let out = ncpath(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let agg = fs::read_to_string(dir.path().join("a/aggregate.csv")).unwrap();
    assert!(agg.starts_with("method,tps_mean,tps_se,fps_mean,fps_se,l2_mean,l2_se"));
    for name in ["ncpath", "lasso_baseline", "oracle"] {
        assert!(agg.contains(name), "missing {name} in aggregate");
    }
    let reps = fs::read_to_string(dir.path().join("a/replications.csv")).unwrap();
    assert_eq!(reps.lines().count(), 1 + 3 * 3);
    // The oracle never selects off-support coordinates.
    for line in reps.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[1] == "oracle" {
            assert_eq!(fields[3], "0", "oracle fps must be 0: {line}");
        }
    }
    assert!(dir.path().join("a/trace_rep0.csv").exists());
    assert!(dir.path().join("a/replications.json").exists());

    // Byte-identical artifacts under the same seed, regardless of threads.
    let out2 = ncpath(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("b").to_str().unwrap(),
        "--parallel",
        "2",
    ]);
    assert!(out2.status.success());
    for f in ["aggregate.csv", "replications.csv", "trace_rep0.csv"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "artifact {f} differs between runs");
    }

    // A different seed produces different numbers.
    let out3 = ncpath(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("c").to_str().unwrap(),
        "--seed",
        "999",
    ]);
    assert!(out3.status.success());
    let a = fs::read(dir.path().join("a/replications.csv")).unwrap();
    let c = fs::read(dir.path().join("c/replications.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn experiment_single_replication_reports_zero_se() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    write(
        &cfg,
        &format!("{SMALL_GEN}reps = 1\nmethods = ncpath\nout = {}\n", dir.path().display()),
    );
    let out = ncpath(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let agg = fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    let data_line = agg.lines().nth(1).unwrap();
    let fields: Vec<&str> = data_line.split(',').collect();
    assert_eq!(fields[2], "0"); // tps_se
    assert_eq!(fields[4], "0"); // fps_se
    assert_eq!(fields[6], "0"); // l2_se
}

#[test]
fn gen_dumps_problem_that_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    write(&cfg, &format!("{SMALL_GEN}out = {}\n", dir.path().display()));
    let out = ncpath(&["gen", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let problem = fs::read_to_string(dir.path().join("problem.csv")).unwrap();
    assert!(problem.starts_with("y,x0,"));
    assert_eq!(problem.lines().count(), 61);
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("truth.json")).unwrap())
            .unwrap();
    assert_eq!(truth["s_star"], 4);

    // Feed the dump back through a solve run on the data path.
    let cfg2 = dir.path().join("run2.conf");
    write(
        &cfg2,
        &format!(
            "loss = ls\ndata = {}\nresponse = y\npenalty.kind = l1\nsolve.lambda = 0.3\nout = {}\n",
            dir.path().join("problem.csv").display(),
            dir.path().join("again").display()
        ),
    );
    let out2 = ncpath(&["solve", "--config", cfg2.to_str().unwrap()]);
    assert!(out2.status.success(), "{}", String::from_utf8_lossy(&out2.stderr));
}

#[test]
fn check_passes_on_sane_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    write(&cfg, &format!("{SMALL_GEN}out = {}\n", dir.path().display()));
    let out = ncpath(&["check", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("penalty regularity"));
    assert!(stdout.contains("gradient consistency"));
}
