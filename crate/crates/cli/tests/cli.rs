use std::path::PathBuf;
use std::process::{Command, Output};

use hydroham_kernel::{parse, Workspace};
use serde_json::Value;

fn hydroham(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydroham")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn bundle_file() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/bundle.toml")).unwrap()
}

fn temp(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hydroham-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn check_file(name: &str, text: &str) -> Output {
    let p = temp(name, text);
    hydroham(&["check", p.to_str().unwrap()])
}

#[test]
fn unknown_case_is_an_input_error() {
    assert_eq!(hydroham(&["verify", "--case", "nope"]).status.code(), Some(2));
}

#[test]
fn branch_out_of_range_is_an_input_error() {
    assert_eq!(hydroham(&["expand", "--branch", "4"]).status.code(), Some(2));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = hydroham(&["check", "/nonexistent/system.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn malformed_toml_is_an_input_error() {
    let o = check_file("bad.toml", "coordinates = [\"u\"\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_keys_are_rejected() {
    let o = check_file("extra.toml", "coordinates = [\"u\"]\nspeed = 3\n[fluxes]\nu = \"u^2\"\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn metric_with_wrong_shape_names_its_location() {
    let text = "coordinates = [\"a\", \"b\"]\n[fluxes]\na = \"b\"\nb = \"a\"\n[operator]\nmetric = [[\"1\", \"0\"], [\"0\"]]\n";
    let o = check_file("shape.toml", text);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("operator.metric"), "{}", stderr(&o));
}

#[test]
fn unparsable_flux_is_an_input_error() {
    let o = check_file("flux.toml", "coordinates = [\"u\"]\n[fluxes]\nu = \"u^^2\"\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fluxes.u"), "{}", stderr(&o));
}

#[test]
fn asymmetric_metric_fails_the_symmetry_condition() {
    let text = "coordinates = [\"a\", \"b\"]\n[fluxes]\na = \"b\"\nb = \"a\"\n[operator]\nmetric = [[\"1\", \"a\"], [\"0\", \"1\"]]\n";
    let o = check_file("asym.toml", text);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    let c22 = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "(22) symmetry").unwrap();
    assert_eq!(c22["met"], false);
    assert!(c22["nonzero"].as_u64().unwrap() > 0);
}

#[test]
fn system_without_operator_recovers_the_monge_metric() {
    let full = bundle_file();
    let head: String = full.split("[chart]").next().unwrap().to_string();
    let o = check_file("noop.toml", &head);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let derived = json(&o)["derived_metric"].clone();
    let expected: toml::Value = toml::from_str(&full).unwrap();
    let expected = &expected["operator"]["metric"];
    let ws = Workspace::with_symbols(&["q1", "q2", "q3", "q4", "q5", "q6"]).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            let a = parse(derived[i][j].as_str().unwrap(), &ws).unwrap();
            let b = parse(expected[i][j].as_str().unwrap(), &ws).unwrap();
            assert_eq!(a, b, "entry ({i}, {j})");
        }
    }
}

#[test]
fn verify_output_is_deterministic() {
    let a = hydroham(&["verify", "--case", "local-fail"]);
    let b = hydroham(&["verify", "--case", "local-fail"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn expand_output_is_deterministic_and_matches_the_printed_density() {
    let a = hydroham(&["expand", "--branch", "2", "--depth", "1"]);
    let b = hydroham(&["expand", "--branch", "2", "--depth", "1"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    let d = r["densities"].as_array().unwrap();
    assert_eq!(d[0]["text"], "u2");
    assert_eq!(d[1]["printed_match"], "exact");
}

#[test]
fn zero_curvature_writes_its_report_to_a_file() {
    let p = temp("zc.json", "");
    let o = hydroham(&["verify", "--case", "zero-curvature", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(r["case"], "zero-curvature");
    assert_eq!(r["met"], true);
}
