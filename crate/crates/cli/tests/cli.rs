use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn afem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut all = args.to_vec();
    all.extend(["--out", out]);
    afem(&all)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const GOLDEN_HEADER: &str = "k,Nv,Ndof,Ne,eta,term1,term2,osc,err,rec_err,effectivity,min_angle,seconds";

#[test]
fn history_header_is_frozen() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["run", "--problem", "lshape", "--max-dofs", "200", "--tol", "1e-6"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), GOLDEN_HEADER);
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 13));
}

#[test]
fn runs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run_in(
            d.path(),
            &["run", "--problem", "peaks", "--max-dofs", "3000", "--tol", "1e-6"],
        );
        assert!(out.status.success());
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("history.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn summary_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["run", "--problem", "lshape", "--tol", "1e-2"]);
    assert!(out.status.success());
    let s = summary(dir.path());
    assert_eq!(s["problem"], "lshape");
    assert_eq!(s["estimator"], "improved");
    assert_eq!(s["stop_reason"], "tolerance");
    assert!(s["iterations"].as_u64().unwrap() > 1);
    for key in [
        "ndof",
        "elements",
        "eta",
        "osc",
        "error",
        "recovered_error",
        "effectivity",
    ] {
        assert!(s["final"][key].is_number(), "final.{key}");
    }
    for key in ["error", "eta", "recovered_error"] {
        for field in ["slope", "intercept", "r_squared", "points"] {
            assert!(s["rates"][key][field].is_number(), "rates.{key}.{field}");
        }
    }
    assert!(s["final"]["eta"].as_f64().unwrap() <= 1e-2);
    let err = s["rates"]["error"]["slope"].as_f64().unwrap();
    let rec = s["rates"]["recovered_error"]["slope"].as_f64().unwrap();
    assert!((-0.6..=-0.4).contains(&err), "error slope {err}");
    assert!(rec < err - 0.1, "recovered slope {rec} vs {err}");
    assert!(dir.path().join("indicators.csv").exists());
}

#[test]
fn interface_problem_stops_without_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "--problem",
            "interface4",
            "--estimator",
            "improved",
            "--tol",
            "1e-2",
        ],
    );
    assert!(out.status.success());
    let s = summary(dir.path());
    assert_eq!(s["iterations"], 1);
    assert!(s["final"]["eta"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["run", "--problem", "nope"][..],
        &["run", "--problem", "lshape", "--depth", "2"],
        &["run", "--problem", "lshape", "--estimator", "fancy"],
        &["compare", "--problem", "lshape", "--estimator", "zz"],
        &["compare", "--problem", "lshape", "--estimator", "zz,zz"],
        &["frobnicate"],
    ] {
        let out = run_in(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn non_convergence_and_io_failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["run", "--problem", "lshape", "--max-iter", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 iterations"));
    // History is still written for the failed run.
    assert_eq!(csv_rows(&dir.path().join("history.csv")).len(), 3);

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = run_in(
        &blocker.join("sub"),
        &["run", "--problem", "lshape", "--max-iter", "1", "--tol", "10"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"theta_e": 0.7, "max_iterations": 2, "tolerance": 1e-9}"#).unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "--problem",
            "lshape",
            "--config",
            config.to_str().unwrap(),
            "--max-iter",
            "4",
            "--max-dofs",
            "6",
        ],
    );
    let s = summary(dir.path());
    assert_eq!(s["config"]["theta_e"], 0.7);
    assert_eq!(s["config"]["max_iterations"], 4);
    assert_eq!(s["config"]["tolerance"], 1e-9);
    assert_eq!(s["stop_reason"], "max_dofs");
    assert!(out.status.success());

    fs::write(&config, r#"{"theta_e": 0.7, "bogus": 1}"#).unwrap();
    let out = run_in(
        dir.path(),
        &["run", "--problem", "lshape", "--config", config.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn vtk_frames_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["run", "--problem", "lshape", "--max-iter", "3", "--tol", "10", "--vtk"],
    );
    assert!(out.status.success());
    let frame = fs::read_to_string(dir.path().join("mesh_0000.vtk")).unwrap();
    assert!(frame.starts_with("# vtk DataFile Version"));
    assert!(frame.contains("u_h") && frame.contains("eta_K"));
}

#[test]
fn compare_checkerboard_first_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "compare",
            "--problem",
            "checkerboard",
            "--estimator",
            "zz",
            "--estimator",
            "improved",
            "--tol",
            "1",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("compare.csv"));
    assert_eq!(rows[0][0], "estimator");
    let eta = |name: &str| -> f64 { rows.iter().find(|r| r[0] == name).unwrap()[4].parse().unwrap() };
    assert!(eta("zz") <= 1e-12);
    assert!(eta("improved") > 0.1);
    assert!(dir.path().join("history_zz.csv").exists() && dir.path().join("history_improved.csv").exists());
}

#[test]
fn compare_residual_and_improved_on_lshape() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "compare",
            "--problem",
            "lshape",
            "--estimator",
            "residual,improved",
            "--tol",
            "1e-2",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("compare.csv"));
    let col = |name: &str| rows[0].iter().position(|c| c == name).unwrap();
    let row = |est: &str| rows.iter().find(|r| r[0] == est).unwrap().clone();
    let num = |r: &[String], c: &str| -> f64 { r[col(c)].parse().unwrap() };
    let residual = row("residual");
    let improved = row("improved");
    assert!((4.0..=6.0).contains(&num(&residual, "final_effectivity")));
    assert!((0.85..=1.25).contains(&num(&improved, "final_effectivity")));
    // The residual run keeps refining long after its true error reached the tolerance.
    assert!(num(&residual, "ndof_eta_below_tol") > num(&residual, "ndof_error_below_tol"));
}

#[test]
fn validate_and_export() {
    let out = afem(&["validate-problem", "--problem", "kellogg", "--samples", "50"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("pde"));

    let dir = tempfile::tempdir().unwrap();
    let vtk = dir.path().join("m.vtk");
    let out = afem(&[
        "export-mesh",
        "--problem",
        "lshape",
        "--out",
        vtk.to_str().unwrap(),
        "--uniform",
        "1",
    ]);
    assert!(out.status.success());
    assert!(fs::read_to_string(&vtk).unwrap().contains("CELLS 48 "));
    let text = dir.path().join("m.mesh");
    let out = afem(&["export-mesh", "--problem", "lshape", "--out", text.to_str().unwrap()]);
    assert!(out.status.success());
    let parsed = afem::mesh::parse_mesh_text::<f64>(&fs::read_to_string(&text).unwrap()).unwrap();
    assert_eq!(parsed.n_elements(), 24);
}
