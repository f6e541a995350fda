//! End-to-end tests of the command line: golden spec files, report
//! determinism, exit-status contract, and input validation.

use std::path::Path;
use std::process::{Command, Output};

fn dgbv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgbv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn golden(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn golden_specs_match_generated_models() {
    // The bundled spec files are serialized from the in-code models; both
    // must stay in lockstep.
    for model in [
        "poly-x3-psi",
        "poly-obstructed",
        "manin-false",
        "torus-forms-n1",
        "torus-forms-n2",
        "torus-polyvectors-n1",
        "torus-polyvectors-n2",
        "torus-derham-n1",
        "torus-derham-n2",
        "heisenberg-ce",
    ] {
        let out = dgbv(&["emit-spec", "--model", model]);
        assert!(out.status.success(), "emit-spec {model}");
        let emitted = String::from_utf8(out.stdout).unwrap();
        let stored =
            std::fs::read_to_string(golden(&format!("{model}.json"))).expect("golden file");
        assert_eq!(
            emitted.trim(),
            stored.trim(),
            "golden file for {model} is stale; regenerate with emit-spec"
        );
    }
}

#[test]
fn bundled_specs_load_and_verify() {
    // Loading a golden file through --spec revalidates all axioms.
    let out = dgbv(&["verify", "--spec", &golden("torus-polyvectors-n1.json")]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["all_passed"], serde_json::json!(true));
    // The invariant one-torus polyvector sector is four dimensional.
    let text = std::fs::read_to_string(golden("torus-polyvectors-n1.json")).unwrap();
    let spec: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(spec["dimension"], serde_json::json!(4));
    assert_eq!(spec["basis"].as_array().unwrap().len(), 4);
}

#[test]
fn corrupted_spec_is_rejected() {
    let text = std::fs::read_to_string(golden("torus-forms-n1.json")).unwrap();
    let mut spec: serde_json::Value = serde_json::from_str(&text).unwrap();
    // Corrupt a product coefficient to break associativity or symmetry.
    spec["product"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!({
            "left": "dz1", "right": "dz1", "out": "dz1*dzb1", "coeff": "1"
        }));
    let dir = std::env::temp_dir().join("dgbv-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("corrupted.json");
    std::fs::write(&path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
    let out = dgbv(&["verify", "--spec", path.to_str().unwrap()]);
    assert!(!out.status.success(), "corrupted spec must fail");
}

#[test]
fn frobenius_report_payload() {
    let out = dgbv(&["frobenius", "--model", "torus-n1", "--order", "3"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["all_passed"], serde_json::json!(true));
    let potential = doc["payload"]["potential"].as_object().unwrap();
    // The one-torus potential is the cubic with the two expected
    // monomials.
    assert_eq!(potential.len(), 2);
    assert_eq!(potential["t0^2*t3"], serde_json::json!("1/2"));
    assert_eq!(potential["t0*t1*t2"], serde_json::json!("-1"));
    // Reports are deterministic.
    let again = dgbv(&["frobenius", "--model", "torus-n1", "--order", "3"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn mirror_command_passes_on_fixture_metrics() {
    for metric in ["diag1.json", "diag12.json"] {
        let out = dgbv(&["mirror", "--metric", &fixture(metric), "--order", "2"]);
        assert!(out.status.success(), "mirror on {metric}");
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(doc["all_passed"], serde_json::json!(true));
    }
}

#[test]
fn deform_reports_obstruction_and_fails_exit() {
    let out = dgbv(&["deform", "--model", "poly-obstructed", "--order", "3"]);
    assert!(!out.status.success(), "obstructed model must exit nonzero");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["all_passed"], serde_json::json!(false));
    let obstructions = doc["payload"]["obstructions"].as_array().unwrap();
    assert_eq!(obstructions[0]["order"], serde_json::json!(2));
}

#[test]
fn cohomology_of_builtin() {
    let out = dgbv(&["cohomology", "--model", "poly-x3-psi"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // d = 0: full cohomology.
    assert_eq!(
        doc["payload"]["cohomology_d"]["dimension"],
        serde_json::json!(6)
    );
    // Heisenberg cochain dimensions 1, 2, 2, 1 by degree.
    let out = dgbv(&["cohomology", "--model", "heisenberg-ce"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        doc["payload"]["cohomology_d"]["dimension"],
        serde_json::json!(6)
    );
    let by_deg = doc["payload"]["cohomology_d"]["by_bidegree"]
        .as_object()
        .unwrap();
    assert_eq!(by_deg["(0,0)"], serde_json::json!(1));
    assert_eq!(by_deg["(0,1)"], serde_json::json!(2));
    assert_eq!(by_deg["(0,2)"], serde_json::json!(2));
    assert_eq!(by_deg["(0,3)"], serde_json::json!(1));
}

#[test]
fn unknown_model_is_a_usage_error() {
    let out = dgbv(&["verify", "--model", "no-such-model"]);
    assert!(!out.status.success());
}

#[test]
fn frobenius_accepts_a_filtration_file() {
    let out = dgbv(&[
        "frobenius",
        "--model",
        "torus-n1",
        "--order",
        "3",
        "--filtration",
        &fixture("tilted-w-n1.json"),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["all_passed"], serde_json::json!(true));
    // Flat-torus potentials do not depend on the filtration choice.
    let potential = doc["payload"]["potential"].as_object().unwrap();
    assert_eq!(potential["t0^2*t3"], serde_json::json!("1/2"));
    assert_eq!(potential["t0*t1*t2"], serde_json::json!("-1"));
}
