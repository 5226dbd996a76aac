use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sptkit")).args(args).output().expect("binary runs");
    let text = String::from_utf8(out.stdout).expect("utf-8 output");
    let v = serde_json::from_str(&text).unwrap_or(Value::Null);
    (out.status.code().expect("exit code"), v, text)
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn documented_examples() {
    let (code, v, _) = run(&["index-onsite", "--mps", "aklt", "--group", "Z2xZ2", "--rep", "pauli"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["class_id"], 1);
    assert_eq!(v["results"]["nontrivial"], true);
    let (code, v, _) = run(&["cohomology", "--group", "Z2", "--degree", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["order"], 2);
    let (code, v, _) = run(&["mps-check", "--mps", "ghz"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["primitivity"]["primitive"], false);
    assert_eq!(v["command"], "mps-check");
    assert!(v["inputs_digest"].as_str().unwrap().len() == 64);
}

#[test]
fn registry_names() {
    let (_, v, _) = run(&["mps-check", "--mps", "product:2"]);
    assert_eq!((v["results"]["d"].clone(), v["results"]["k"].clone()), (2.into(), 1.into()));
    let (_, v, _) = run(&["mps-check", "--mps", "aklt"]);
    assert_eq!((v["results"]["d"].clone(), v["results"]["k"].clone()), (3.into(), 2.into()));
    let (_, v, _) = run(&["cohomology", "--group", "Z2xZ2", "--degree", "1"]);
    assert_eq!(v["results"]["group_order"], 4);
    assert_eq!(v["results"]["element_orders"], serde_json::json!([1, 2, 2, 2]));
    let (_, v, _) = run(&["lsm", "--rep", "pauli", "--mps", "aklt+product:2"]);
    assert_eq!(v["results"]["dim"], 6);
    assert_eq!(v["results"]["obstructed"], true);
}

#[test]
fn files_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(&dir, "z3.json", r#"{"order":3,"table":[[0,1,2],[1,2,0],[2,0,1]],"label":"Z3 from file"}"#);
    let (code, v, _) = run(&["cohomology", "--group", &g, "--degree", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["order"], 3);
    let cfg = write(&dir, "cfg.json", r#"{"command":"cohomology","group":"Z2xZ2","degree":2}"#);
    let (_, v, _) = run(&["cohomology", "--config", &cfg]);
    assert_eq!(v["results"]["order"], 2);
    let (_, v, _) = run(&["cohomology", "--config", &cfg, "--degree", "3"]);
    assert_eq!(v["results"]["order"], 8);
    assert_eq!(v["config"]["degree"], 3);
    let mps = write(&dir, "t.json", r#"{"d":2,"k":1,"matrices":[[[[1,0]]],[[[0,0]]]]}"#);
    let (code, v, _) = run(&["mps-check", "--mps", &mps]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["primitivity"]["primitive"], true);
    // the digest covers file contents
    let (_, a, _) = run(&["mps-check", "--mps", &mps]);
    write(&dir, "t.json", r#"{"d":2,"k":1,"matrices":[[[[0,0]]],[[[1,0]]]]}"#);
    let (_, b, _) = run(&["mps-check", "--mps", &mps]);
    assert_ne!(a["inputs_digest"], b["inputs_digest"]);
}

#[test]
fn output_emit_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let (_, _, stdout) = run(&["lsm", "--rep", "pauli:2"]);
    let (code, _, quiet) = run(&["lsm", "--rep", "pauli:2", "--output", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(quiet.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout);
    let (_, _, text) = run(&["lsm", "--rep", "pauli:2", "--emit", "text"]);
    assert!(text.lines().any(|l| l == "results.obstructed = true"), "{text}");
    let (_, v, _) = run(&["lsm", "--rep", "pauli:2", "--timing"]);
    assert!(v["wall_time_s"].as_f64().is_some());
    let (_, v, _) = run(&["lsm", "--rep", "pauli:2"]);
    assert!(v.get("wall_time_s").is_none());
}

#[test]
fn exit_codes() {
    // verification failure: no gap above an absurd floor
    let (code, v, _) = run(&["parent-ham", "--n-range", "3..4", "--tolerance", "10"]);
    assert_eq!(code, 1);
    assert_eq!(v["passed"], false);
    // physics error surfaces with its module code
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "closing.json", r#"{"gamma":0.5,"matrices":[[[[1,0],[0,0]],[[0,0],[-1,0]]],[[[-1,0],[0,0]],[[0,0],[1,0]]]]}"#);
    let (code, v, _) = run(&["spectral-flow", "--path", &p]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["code"], "spectral_flow.gap_violation");
    let (code, v, _) = run(&["dw-verify", "--L", "3"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["code"], "core.precondition");
    let (code, v, _) = run(&["dw-verify", "--L", "3", "--allow-small-l", "--identities", "lemma_iv"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["conformant"], false);
}

#[test]
fn malformed_inputs_give_error_objects() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(&dir, "bad.json", "{not json");
    let latin = write(&dir, "latin.json", r#"{"order":3,"table":[[0,2,1],[2,1,0],[1,0,2]]}"#);
    let extra = write(&dir, "extra.json", r#"{"group":"Z2","bogus":1}"#);
    let wrong_cmd = write(&dir, "cmd.json", r#"{"command":"lsm"}"#);
    let bad_mps = write(&dir, "m.json", r#"{"d":2,"k":2,"matrices":[[[[1,0]]],[[[0,0]]]]}"#);
    let cases: Vec<Vec<&str>> = vec![
        vec![],
        vec!["frobnicate"],
        vec!["cohomology", "--group", "Z0"],
        vec!["cohomology", "--group", "Q8"],
        vec!["cohomology", "--group", "Z2xx"],
        vec!["cohomology", "--group", "Z2", "--degree", "0"],
        vec!["cohomology", "--group", "Z2", "--degree", "-1"],
        vec!["cohomology", "--modulus", "0"],
        vec!["cohomology", "--class", "7"],
        vec!["cohomology", "--group", &bad_json],
        vec!["cohomology", "--group", &latin],
        vec!["cohomology", "--group", "/nonexistent/g.json"],
        vec!["cohomology", "--config", &extra],
        vec!["cohomology", "--config", &wrong_cmd],
        vec!["cohomology", "--config", "/nonexistent/c.json"],
        vec!["cohomology", "--steps", "4"],
        vec!["mps-check", "--mps", "product:x"],
        vec!["mps-check", "--mps", "product:0"],
        vec!["mps-check", "--mps", "aklt+"],
        vec!["mps-check", "--mps", &bad_mps],
        vec!["parent-ham", "--n-range", "8..3"],
        vec!["parent-ham", "--n-range", "three"],
        vec!["parent-ham", "--m", "3", "--n-range", "2..4"],
        vec!["index-onsite", "--rep", "pauli:2"],
        vec!["index-onsite", "--rep", "spin"],
        vec!["index-onsite", "--group", "Z3"],
        vec!["index-onsite", "--tolerance", "-1"],
        vec!["lsm", "--rep", "pauli"],
        vec!["lsm", "--rep", "trivial:2"],
        vec!["spectral-flow", "--path", "loop"],
        vec!["spectral-flow", "--steps", "4"],
        vec!["dw-verify", "--L", "abc"],
        vec!["dw-verify", "--identities", "lemma_v"],
        vec!["dw-verify", "--samples", "0"],
        vec!["dw-extract", "--emit", "yaml"],
    ];
    for args in cases {
        let (code, v, text) = run(&args);
        assert_eq!(code, 2, "{args:?}: {text}");
        let c = v["error"]["code"].as_str().unwrap_or_else(|| panic!("{args:?}: no error object in {text}"));
        assert!(c.contains('.'), "{args:?}: {c}");
        assert!(v["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["dw-verify", "--group", "Z2", "--seed", "11"],
        vec!["index-onsite", "--mps", "aklt+aklt"],
        vec!["spectral-flow", "--path", "rotation", "--steps", "64"],
    ] {
        let (c1, _, a) = run(&args);
        let (c2, _, b) = run(&args);
        assert_eq!((c1, &a), (c2, &b), "{args:?}");
    }
}
