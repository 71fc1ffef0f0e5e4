mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sqw::evolution::star_s3_walk;
use sqw::io::{canonical_walk_json, walk_from_json};
use sqw::Walk;

use common::{dense, fixture, fixture_path, max_abs};

fn sqw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fx(name: &str) -> String {
    fixture_path(name).to_str().unwrap().to_owned()
}

fn same_operator(a: &Walk, b: &Walk) -> bool {
    a.n() == b.n() && max_abs(&(dense(a.operator()) - dense(b.operator()))) < 1e-12
}

#[test]
fn validate_reports_violations() {
    let ok = sqw(&["validate", &fx("s3.json")]);
    assert_eq!(ok.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stdout(&ok)).unwrap();
    assert_eq!(report["valid"], true);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"n":3,"edges":[[0,1],[1,2]],"tessellations":[[[0,1,2]],[[0],[1]]]}"#,
    )
    .unwrap();
    let out = sqw(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let kinds: Vec<&str> = report["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["kind"].as_str().unwrap())
        .collect();
    assert!(kinds.contains(&"not-a-clique"));
    assert!(kinds.contains(&"not-a-partition"));
}

#[test]
fn evolve_one_step_from_a_leaf() {
    let out = sqw(&[
        "evolve",
        &fx("s3.json"),
        "--steps",
        "1",
        "--init",
        "vertex:0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let psi = sqw::io::state_from_json(&stdout(&out)).unwrap();
    let reference = sqw::evolution::apply_evolution(
        star_s3_walk().operator(),
        &sqw::StateVector::basis(4, 0),
        1,
    )
    .unwrap();
    assert!(psi.distance(&reference) < 1e-15);

    let csv = sqw(&["evolve", &fx("s3.json"), "--steps", "3", "--format", "csv"]);
    assert!(stdout(&csv).starts_with("vertex,re,im,prob\n0,"));
}

#[test]
fn numerical_drift_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("drift.json");
    // norm² of the first polygon state is 1 + 8e-10: accepted, then drifts
    let a = (0.5f64 * (1.0 + 8e-10)).sqrt();
    fs::write(
        &path,
        format!(r#"{{"n":2,"edges":[[0,1]],"tessellations":[[[0,1]]],"amplitudes":[[[[{a},0],[{a},0]]]]}}"#),
    )
    .unwrap();
    let out = sqw(&["evolve", path.to_str().unwrap(), "--steps", "5"]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn spectrum_lists_four_eigenvalues() {
    let out = sqw(&["spectrum", &fx("s3.json"), "--vectors"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 4);
    assert_eq!(v["eigenvectors"].as_array().unwrap().len(), 4);
}

#[test]
fn expand_reproduces_the_fixtures() {
    let out = sqw(&["expand", &fx("s3.json"), "--u", "3", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(same_operator(
        &walk_from_json(&stdout(&out)).unwrap(),
        &fixture("s3exp_uniform.json")
    ));

    let cs = format!(
        "[[0,{}],[{},0],[0,{}]]",
        1.0 / 3f64.sqrt(),
        -1.0 / 6f64.sqrt(),
        1.0 / 2f64.sqrt()
    );
    let out = sqw(&["expand", &fx("s3.json"), "--u", "3", "--cs", &cs]);
    assert_eq!(out.status.code(), Some(0));
    assert!(same_operator(
        &walk_from_json(&stdout(&out)).unwrap(),
        &fixture("s3exp_nonuniform.json")
    ));
}

#[test]
fn reduce_writes_walk_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let out = sqw(&[
        "reduce",
        &fx("s3exp_nonuniform.json"),
        "--intersection",
        "3,4,5",
        "--j",
        "1",
        "--certificate",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(same_operator(
        &walk_from_json(&stdout(&out)).unwrap(),
        &star_s3_walk()
    ));
    let c: Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c["intersection"], serde_json::json!([3, 4, 5]));
    let first = &c["clique_state"][0];
    assert!((first[1].as_f64().unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);

    // canonical phase makes the first amplitude real and positive
    let out = sqw(&[
        "reduce",
        &fx("s3exp_nonuniform.json"),
        "--intersection",
        "3,4,5",
        "--canonical-phase",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let c: Value = serde_json::from_str(&String::from_utf8(out.stderr).unwrap()).unwrap();
    assert!(c["clique_state"][0][0].as_f64().unwrap() > 0.0);
    assert!(c["clique_state"][0][1].as_f64().unwrap().abs() < 1e-15);
}

#[test]
fn reduce_rejects_a_non_intersection() {
    let out = sqw(&["reduce", &fx("s3exp_uniform.json"), "--intersection", "3,4"]);
    assert_eq!(out.status.code(), Some(1));
}

fn round_trip(input: &Path, u: &str, k: &str, set: &str) {
    let dir = tempfile::tempdir().unwrap();
    let expanded = dir.path().join("expanded.json");
    let reduced = dir.path().join("reduced.json");
    let out = sqw(&[
        "expand",
        input.to_str().unwrap(),
        "--u",
        u,
        "--k",
        k,
        "--output",
        expanded.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = sqw(&[
        "reduce",
        expanded.to_str().unwrap(),
        "--intersection",
        set,
        "--output",
        reduced.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let original = walk_from_json(&fs::read_to_string(input).unwrap()).unwrap();
    let back = walk_from_json(&fs::read_to_string(&reduced).unwrap()).unwrap();
    assert_eq!(
        canonical_walk_json(&back).unwrap(),
        canonical_walk_json(&original).unwrap()
    );
}

#[test]
fn expand_then_reduce_round_trips_every_fixture() {
    round_trip(&fixture_path("s3.json"), "3", "3", "3,4,5");
    round_trip(&fixture_path("s3.json"), "0", "2", "0,4");
    round_trip(&fixture_path("s3exp_uniform.json"), "1", "2", "1,6");
    round_trip(&fixture_path("s3exp_nonuniform.json"), "2", "3", "2,6,7");
}

#[test]
fn verify_accepts_linked_walks_and_rejects_others() {
    let out = sqw(&[
        "verify",
        "--expanded",
        &fx("s3exp_nonuniform.json"),
        "--reduced",
        &fx("s3.json"),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["nu"].as_array().unwrap().len(), 2);

    let out = sqw(&[
        "verify",
        "--expanded",
        &fx("s3exp_uniform.json"),
        "--reduced",
        &fx("s3.json"),
        "--intersection",
        "3,4,5",
    ]);
    assert_eq!(out.status.code(), Some(0));

    // the uniform S3 walk is not the reduction of either expansion
    let dir = tempfile::tempdir().unwrap();
    let other = dir.path().join("uniform_s3.json");
    fs::write(
        &other,
        r#"{"n":4,"edges":[[0,3],[1,3],[2,3]],"tessellations":[[[0,3],[1],[2]],[[0],[1,3],[2]],[[0],[1],[2,3]]]}"#,
    )
    .unwrap();
    let out = sqw(&[
        "verify",
        "--expanded",
        &fx("s3exp_uniform.json"),
        "--reduced",
        other.to_str().unwrap(),
    ]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn search_and_scaling_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.csv");
    let out = sqw(&[
        "search",
        "--n",
        "4",
        "--q",
        "2",
        "--mark",
        "1,2",
        "--output",
        series.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&series).unwrap();
    assert_eq!(text.lines().count(), sqw::search::default_t_max(4) + 2);

    let summary = dir.path().join("summary.json");
    let out = sqw(&[
        "scaling",
        "--n-list",
        "4,6",
        "--q-list",
        "1,2",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = stdout(&out);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "n,q,N,t_peak,p_peak,cost");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("4,1,16,4,"));
    let s: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["cross_q_consistent"], true);
}

#[test]
fn usage_errors() {
    assert_eq!(sqw(&["validate"]).status.code(), Some(2));
    assert_eq!(
        sqw(&["validate", &fx("s3.json"), "--strict"]).status.code(),
        Some(2)
    );
    assert_eq!(sqw(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{not json").unwrap();
    assert_eq!(
        sqw(&["spectrum", junk.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        sqw(&["expand", &fx("s3.json"), "--u", "3"]).status.code(),
        Some(2)
    );
}

#[test]
fn fixtures_match_the_constructors() {
    use sqw::transform::{expand_walk, ExpansionSpec};
    let s3 = fixture("s3.json");
    assert_eq!(s3.cover(), star_s3_walk().cover());
    assert!(same_operator(&s3, &star_s3_walk()));
    let uniform = expand_walk(&s3, &ExpansionSpec::uniform(3, 3).unwrap()).unwrap();
    assert_eq!(uniform.walk.cover(), fixture("s3exp_uniform.json").cover());
    assert!(same_operator(&uniform.walk, &fixture("s3exp_uniform.json")));
}
