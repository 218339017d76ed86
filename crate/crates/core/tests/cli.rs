//! CLI contract tests: exit codes, error locators, report structure.

use serde_json::Value;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_korbit")
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn tmpdir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("korbit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run_with(args: &[&str]) -> (Option<i32>, String, String) {
    let out = Command::new(bin()).args(args).output().unwrap();
    (
        out.status.code(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn missing_model_file_exits_1() {
    let (code, _, err) = run_with(&["validate", "--model", "/nonexistent/model.json"]);
    assert_eq!(code, Some(1));
    assert!(err.contains("cannot read"), "{err}");
}

#[test]
fn missing_dim_reports_locator() {
    let dir = tmpdir();
    let path = dir.join("nodim.json");
    std::fs::write(&path, r#"{"structure_constants": []}"#).unwrap();
    let (code, _, err) = run_with(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(code, Some(1));
    assert!(err.contains("`dim`"), "{err}");
}

#[test]
fn zero_denominator_reports_locator() {
    let dir = tmpdir();
    let path = dir.join("zeroden.json");
    std::fs::write(
        &path,
        r#"{"dim": 3, "structure_constants": [{"i":3,"j":1,"k":2,"c":"1/0"}]}"#,
    )
    .unwrap();
    let (code, _, err) = run_with(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(code, Some(1));
    assert!(err.contains("structure_constants[0].c"), "{err}");
}

#[test]
fn broken_jacobi_exits_2_with_report() {
    let dir = tmpdir();
    let out = dir.join("bad.json");
    let model = fixtures().join("su2_bad_jacobi.json");
    let (code, _, _) = run_with(&[
        "validate",
        "--model",
        model.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, Some(2));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["status"], "validation_failed");
    assert_eq!(report["results"]["valid"], false);
    assert!(!report["results"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn geometry_report_contains_expected_keys() {
    let (code, stdout, _) =
        run_with(&["geometry", "--model", fixtures().join("su2.json").to_str().unwrap()]);
    assert_eq!(code, Some(0));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    let results = &report["results"];
    for key in ["christoffel", "riemann", "ricci", "scalar_curvature", "scalar_curvature_abs"] {
        assert!(results.get(key).is_some(), "missing {key}");
    }
    assert_eq!(results["scalar_curvature"], "-3/2");
    assert_eq!(results["scalar_curvature_abs"], "3/2");
    // conventions and tolerances are echoed
    assert!(report["conventions"]["ricci_contraction"].is_string());
    assert!(report["parameters"]["tol"].is_number());
    assert!(report["parameters"]["seed"].is_number());
}

#[test]
fn geometry_invariance_failure_exits_2() {
    let dir = tmpdir();
    let path = dir.join("badmetric.json");
    std::fs::write(
        &path,
        r#"{
            "name": "su2-h1-bad",
            "dim": 3,
            "structure_constants": [
                {"i":3,"j":1,"k":2,"c":1},
                {"i":1,"j":2,"k":3,"c":1},
                {"i":2,"j":1,"k":3,"c":-1}
            ],
            "subalgebra": [1],
            "metric": [[1,0,0],[0,1,0],[0,0,2]]
        }"#,
    )
    .unwrap();
    let (code, stdout, _) = run_with(&["geometry", "--model", path.to_str().unwrap()]);
    assert_eq!(code, Some(2));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["results"]["invariance_holds"], false);
    assert!(!report["results"]["invariance_witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn geometry_without_metric_exits_1() {
    let (code, _, err) =
        run_with(&["geometry", "--model", fixtures().join("h3_h2.json").to_str().unwrap()]);
    assert_eq!(code, Some(1));
    assert!(err.contains("metric"), "{err}");
}

#[test]
fn orbits_report_h3() {
    let (code, stdout, _) =
        run_with(&["orbits", "--model", fixtures().join("h3.json").to_str().unwrap()]);
    assert_eq!(code, Some(0));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["results"]["index"], 1);
    let strata = report["results"]["strata"].as_array().unwrap();
    assert_eq!(strata.len(), 2);
    assert_eq!(strata[0]["orbit_dim"], 2);
    assert_eq!(strata[1]["orbit_dim"], 0);
}

#[test]
fn casimirs_report_su2() {
    let (code, stdout, _) =
        run_with(&["casimirs", "--model", fixtures().join("su2.json").to_str().unwrap()]);
    assert_eq!(code, Some(0));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    let cs = report["results"]["casimirs"].as_array().unwrap();
    assert!(cs.iter().any(|c| c["polynomial"] == "f1^2 + f2^2 + f3^2"));
    assert_eq!(report["results"]["reverified_exactly"], true);
}

#[test]
fn casimirs_hyperplane_stratum() {
    let dir = tmpdir();
    let config = dir.join("stratum.json");
    std::fs::write(&config, r#"{"hyperplane_zeros": [3]}"#).unwrap();
    let (code, stdout, _) = run_with(&[
        "casimirs",
        "--model",
        fixtures().join("h3.json").to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--max-degree",
        "1",
    ]);
    assert_eq!(code, Some(0));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    // on the f3 = 0 stratum everything commutes: f1, f2 become Casimirs
    let hp = &report["results"]["hyperplane_casimirs"];
    assert_eq!(hp["zeros"], serde_json::json!([3]));
    assert_eq!(hp["casimirs"], serde_json::json!(["f1", "f2"]));
}

#[test]
fn lrep_report_h3() {
    let (code, stdout, _) =
        run_with(&["lrep", "--model", fixtures().join("h3.json").to_str().unwrap()]);
    assert_eq!(code, Some(0));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    let r = &report["results"];
    assert_eq!(r["transition"]["pass"], true);
    assert_eq!(r["transition"]["structurally_zero"], true);
    assert_eq!(r["commutators"]["pass"], true);
    assert_eq!(r["commutators"]["closure_sign"], 1);
    assert_eq!(r["polarization"]["pass"], true);
    assert_eq!(r["beta"], serde_json::json!(["0", "0", "0"]));
    // K = f3 maps to multiplication by i*lambda3 = i at lambda0 (the basis
    // up to the default degree cap is {f3, f3^2, f3^3, f3^4})
    let rows = r["casimirs_in_representation"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let f3 = rows.iter().find(|row| row["casimir"] == "f3").unwrap();
    assert_eq!(f3["is_constant"], true);
    let c = f3["constant"].as_array().unwrap();
    assert!((c[0].as_f64().unwrap()).abs() <= 1e-12);
    assert!((c[1].as_f64().unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn lrep_sign_flip_exits_2() {
    let dir = tmpdir();
    let path = dir.join("h3_flipped.json");
    let mut doc: Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("h3.json")).unwrap())
            .unwrap();
    doc["transition"]["2"]["chi"] = Value::String("-l3*q1".into());
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let (code, stdout, _) = run_with(&["lrep", "--model", path.to_str().unwrap()]);
    assert_eq!(code, Some(2));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["results"]["transition"]["pass"], false);
    let base = report["results"]["transition"]["base_bracket_residual"].as_f64().unwrap();
    assert!((base - 2.0).abs() <= 1e-9);
}

#[test]
fn semt_report_contains_components_and_densities() {
    let (code, stdout, _) = run_with(&[
        "semt",
        "--model",
        fixtures().join("abelian3.json").to_str().unwrap(),
        "--config",
        fixtures().join("configs/semt_scalar_abelian.json").to_str().unwrap(),
    ]);
    assert_eq!(code, Some(0));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    let semt = &report["results"]["semt"];
    for key in ["t00", "t0a", "tab", "densities", "diagnostics"] {
        assert!(semt.get(key).is_some(), "missing {key}");
    }
    assert!(!semt["densities"].as_array().unwrap().is_empty());
}

#[test]
fn fields_without_config_exits_1() {
    let (code, _, err) =
        run_with(&["fields", "--model", fixtures().join("h3.json").to_str().unwrap()]);
    assert_eq!(code, Some(1));
    assert!(err.contains("--config"), "{err}");
}

#[test]
fn apply_beta_without_polarization_exits_1() {
    let dir = tmpdir();
    let config = dir.join("beta.json");
    std::fs::write(
        &config,
        r#"{"mode": "scalar", "psi": "1", "Lambda": 1.0,
            "lambda_values": [1.0, 1.0, 1.0], "apply_beta": true}"#,
    )
    .unwrap();
    let (code, _, err) = run_with(&[
        "semt",
        "--model",
        fixtures().join("abelian3.json").to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(code, Some(1));
    assert!(err.contains("polarization"), "{err}");
}

#[test]
fn apply_beta_with_polarization_runs() {
    // h3 has a polarization and beta = 0: the shift is a no-op but the flag
    // must round-trip into the report.
    let dir = tmpdir();
    let config = dir.join("beta_ok.json");
    std::fs::write(
        &config,
        r#"{"mode": "scalar", "psi": "exp(-q1^2)", "Lambda": 2.449489742783178,
            "m": 0.0, "lambda_values": [0.0, 0.0, 2.0], "apply_beta": true,
            "grids": {"q": {"box": [[-3.0, 3.0]], "nodes": 61}}}"#,
    )
    .unwrap();
    let (code, stdout, _) = run_with(&[
        "fields",
        "--model",
        fixtures().join("h3.json").to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(code, Some(0));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["results"]["beta_applied"], true);
    assert!(report["results"]["laplace_residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn custom_seed_is_echoed() {
    let (code, stdout, _) = run_with(&[
        "orbits",
        "--model",
        fixtures().join("h3.json").to_str().unwrap(),
        "--seed",
        "12345",
    ]);
    assert_eq!(code, Some(0));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["parameters"]["seed"], 12345);
}

#[test]
fn fixture_files_agree_with_catalog() {
    // The bundled JSON fixtures load into the same models the in-crate
    // catalog builds programmatically.
    let loaded = korbit_core::model::load_model(&fixtures().join("su2.json")).unwrap();
    let su2 = korbit_core::catalog::su2();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                assert_eq!(loaded.model.c(a, b, c), su2.c(a, b, c));
            }
        }
    }
    let t = loaded.transition.unwrap();
    let cat = korbit_core::catalog::su2_transition();
    assert_eq!(t.chi, cat.chi);
    assert_eq!(t.alpha, cat.alpha);
    assert_eq!(loaded.transition_bracket_sign, korbit_core::catalog::CATALOG_BRACKET_SIGN);

    let loaded = korbit_core::model::load_model(&fixtures().join("h3.json")).unwrap();
    let h3 = korbit_core::catalog::heisenberg3();
    assert_eq!(loaded.model.entries(), h3.entries());
    let t = loaded.transition.unwrap();
    let cat = korbit_core::catalog::h3_transition();
    assert_eq!(t.chi, cat.chi);
}
