use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn nevpick(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nevpick"));
    cmd.args(args).env_remove("NEVPICK_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run(command: &str, config: &str) -> Output {
    let path = configs().join(config);
    nevpick(&[command, path.to_str().unwrap()], &[])
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let path = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn constant_data_is_feasible() {
    let out = run("feasibility", "constant.toml");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["feasible"], true);
    assert_eq!(report["verdict"], "boundary-feasible");
}

#[test]
fn infeasible_data_exits_1() {
    let out = run("feasibility", "infeasible.toml");
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["verdict"], "infeasible");
    let out = run("norm", "infeasible.toml");
    assert_eq!(code(&out), 1);
    let norm = json(&out)["quotient_norm"].as_f64().unwrap();
    assert!((norm - 2.0).abs() < 1e-10, "{norm}");
}

#[test]
fn two_zero_envelope_is_full() {
    let out = run("envelope", "two_zeros.toml");
    assert_eq!(code(&out), 0);
    let line = "algebra_dim=16, commutant_dim=1, full=true, prediction=true, agreement=true";
    assert_eq!(json(&out)["summary"], line);
    assert_eq!(stderr(&out).trim(), line);
}

#[test]
fn envelope_grid_agrees() {
    let out = nevpick(&["envelope", "--grid"], &[]);
    assert_eq!(code(&out), 0);
    let cases = json(&out)["cases"].as_array().unwrap().clone();
    assert_eq!(cases.len(), 9);
    for case in cases {
        assert_eq!(case["agreement"], true);
        let full = case["m"].as_u64() <= case["n_minus_r"].as_u64();
        assert_eq!(case["full"], full);
    }
}

#[test]
fn malformed_config_exits_3_with_field() {
    let out = run("feasibility", "malformed.toml");
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert!(err.contains("malformed.toml:3: zeros[1]"), "{err}");
    assert!(out.stdout.is_empty());

    let bad = scratch("syntax.toml", "zeros = [{ re = 0.0, mult = 2 }]\nnodes = [0.0\n");
    let out = nevpick(&["norm", bad.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("syntax"));

    let short = scratch("short.toml", "zeros = [{ re = 0.0, mult = 2 }]\nnodes = [0.0, 0.5]\ntargets = [0.1]\n");
    let out = nevpick(&["construct", short.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("targets"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(code(&nevpick(&["feasibility"], &[])), 3);
    assert_eq!(code(&nevpick(&["frobnicate"], &[])), 3);
    assert_eq!(code(&nevpick(&["--help"], &[])), 0);
    let missing = configs().join("does-not-exist.toml");
    assert_eq!(code(&nevpick(&["norm", missing.to_str().unwrap()], &[])), 3);
}

#[test]
fn norm_needs_a_zero_node() {
    let cfg = scratch("r0.toml", "zeros = [{ re = 0.0, mult = 2 }]\nnodes = [0.5]\ntargets = [0.1]\n");
    let out = nevpick(&["norm", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("unsupported"));
}

#[test]
fn unequal_zero_node_targets_are_infeasible() {
    let cfg = scratch(
        "split.toml",
        "zeros = [{ re = 0.0 }, { re = 0.5 }]\nnodes = [0.0, 0.5, -0.3]\ntargets = [0.1, 0.2, 0.0]\n",
    );
    assert_eq!(code(&nevpick(&["construct", cfg.to_str().unwrap()], &[])), 1);
    assert_eq!(code(&nevpick(&["norm", cfg.to_str().unwrap()], &[])), 1);
    assert_eq!(code(&nevpick(&["feasibility", cfg.to_str().unwrap()], &[])), 1);
}

#[test]
fn reports_are_deterministic() {
    let path = configs().join("constant.toml");
    let p = path.to_str().unwrap();
    for cmd in ["feasibility", "construct", "norm"] {
        let a = nevpick(&[cmd, p], &[]);
        let b = nevpick(&[cmd, p], &[]);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn seed_comes_from_flag_then_config_then_environment() {
    let cfg = scratch("noseed.toml", "zeros = [{ re = 0.0, mult = 2 }]\nnodes = [0.0, 0.5]\ntargets = [0.0, 0.2]\n");
    let p = cfg.to_str().unwrap();
    let a = nevpick(&["feasibility", p], &[("NEVPICK_SEED", "11")]);
    let b = nevpick(&["feasibility", p], &[("NEVPICK_SEED", "11")]);
    assert_eq!(json(&a)["seed"], 11);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&nevpick(&["feasibility", p], &[]))["seed"], 0);
    let flagged = nevpick(&["--seed", "4", "feasibility", p], &[("NEVPICK_SEED", "11")]);
    assert_eq!(json(&flagged)["seed"], 4);
    let with_config = configs().join("constant.toml");
    let c = nevpick(&["feasibility", with_config.to_str().unwrap()], &[("NEVPICK_SEED", "11")]);
    assert_eq!(json(&c)["seed"], 1);
    assert_eq!(code(&nevpick(&["feasibility", p], &[("NEVPICK_SEED", "x")])), 3);
}

#[test]
fn construct_reports_small_residuals() {
    for cfg in ["constant.toml", "matrix.toml"] {
        let out = run("construct", cfg);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let report = json(&out);
        assert!(report["residual"].as_f64().unwrap() <= 1e-9);
        assert!(report["quotient_norm"].as_f64().unwrap() < 1.0);
    }
}

#[test]
fn matrix_data_reports_necessary_only() {
    let out = run("feasibility", "matrix.toml");
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["necessary_only"], true);
    assert_eq!(report["classical_pick_min_eigenvalue"], serde_json::Value::Null);
}

#[test]
fn grid_csv_export() {
    let csv = Path::new(env!("CARGO_TARGET_TMPDIR")).join("grid.csv");
    let cfg = configs().join("infeasible.toml");
    let out = nevpick(
        &["feasibility", cfg.to_str().unwrap(), "--csv", csv.to_str().unwrap(), "--grid", "8"],
        &[],
    );
    assert_eq!(code(&out), 1);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta1,theta2,phase,lambda_min"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 64);
    let min = rows
        .iter()
        .map(|r| r.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(min < 0.0);
}

#[test]
fn grammian_csv_is_hermitian() {
    let out = run("grammian", "two_zeros.toml");
    assert_eq!(code(&out), 0);
    let rows: Vec<Vec<f64>> = stdout(&out)
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 8);
        for j in 0..4 {
            assert_eq!(row[2 * j], rows[j][2 * i]);
            assert_eq!(row[2 * j + 1], -rows[j][2 * i + 1]);
        }
    }
    assert_eq!(rows[0][0], 1.0);
}

#[test]
fn lattice_report() {
    let out = run("lattice", "lattice.toml");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["meet"]["bounds_hold"], true);
    assert_eq!(report["join"]["law_holds"], true);
    let phi = report["meet"]["canonical"]["phi"].as_array().unwrap();
    assert!(phi.iter().any(|z| z["re"] == 0.0 && z["im"] == 0.0 && z["mult"].as_u64().unwrap() >= 3));

    let cfg = scratch(
        "lattice_bad.toml",
        "[lattice]\nn = 2\n[[lattice.subspaces]]\npsi = [{ re = 0.5 }]\nv = [[1.0]]\n[[lattice.subspaces]]\nv = [[1.0]]\n",
    );
    assert_eq!(code(&nevpick(&["lattice", cfg.to_str().unwrap()], &[])), 3);
}

#[test]
fn gap_search_writes_a_fixture() {
    let fixture = Path::new(env!("CARGO_TARGET_TMPDIR")).join("gap_fixture.json");
    let cfg = configs().join("gap.toml");
    let out = nevpick(
        &["gap-search", cfg.to_str().unwrap(), "--seeds", "1", "--budget", "1", "--fixture", fixture.to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["found"], true);
    let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&fixture).unwrap()).unwrap();
    assert!(saved.is_object());
}
