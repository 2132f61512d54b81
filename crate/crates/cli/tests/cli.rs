use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sumlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumlab")).args(args).env_remove("SUMLAB_SEED").output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr)
        .unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&o.stderr)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(sumlab(&["--help"]).status.code(), Some(0));
    assert_eq!(sumlab(&["--version"]).status.code(), Some(0));
}

#[test]
fn bad_usage_is_a_json_error() {
    let o = sumlab(&["expand", "--A", "x.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "usage");
}

#[test]
fn malformed_set_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"q": 3, "indices": [2, 1]}"#).unwrap();
    let o = sumlab(&["analyze", "--input", p(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr_json(&o);
    assert!(err["message"].as_str().unwrap().contains("not strictly increasing"), "{err}");
    fs::write(&bad, r#"{"q": 3, "indices": [9]}"#).unwrap();
    assert_eq!(sumlab(&["analyze", "--input", p(&bad)]).status.code(), Some(1));
}

#[test]
fn violated_hypothesis_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("sharp");
    let o = sumlab(&[
        "construct",
        "sharpness",
        "--q",
        "12",
        "--alpha",
        "1/2",
        "--beta",
        "1/4",
        "--gamma",
        "1/2",
        "--eta",
        "1/5",
        "-o",
        p(&d),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = sumlab(&[
        "trace",
        "c4",
        "--A",
        p(&d.join("A.json")),
        "--B",
        p(&d.join("B.json")),
        "--C",
        p(&d.join("C.json")),
        "--T",
        "4",
        "--alpha",
        "1/2",
        "--gamma",
        "1/2",
        "--eta",
        "1/5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "hypothesis");
}

#[test]
fn sharpness_expand_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("sharp");
    let o = sumlab(&[
        "construct",
        "sharpness",
        "--q",
        "24",
        "--alpha",
        "1/2",
        "--beta",
        "1/4",
        "--gamma",
        "1/2",
        "--eta",
        "1/5",
        "-o",
        p(&d),
    ]);
    assert!(o.status.success());
    let manifest = json(&d.join("manifest.json"));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 4);
    let report = dir.path().join("expand.json");
    let csv = dir.path().join("per_c.csv");
    let o = sumlab(&[
        "expand",
        "--A",
        p(&d.join("A.json")),
        "--B",
        p(&d.join("B.json")),
        "--C",
        p(&d.join("C.json")),
        "--theta",
        "1",
        "--union",
        "-o",
        p(&report),
        "--per-c-csv",
        p(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&report);
    let a_size = r["result"]["report"]["a_size"].as_u64().unwrap();
    let union = r["result"]["union_covering"].as_u64().unwrap();
    assert!(union <= 16 * a_size);
    assert!(fs::read_to_string(&csv).unwrap().starts_with("c_index,full,adversarial\n"));
    let m = json(&dir.path().join("expand.json.manifest.json"));
    assert_eq!(m["inputs"].as_array().unwrap().len(), 3);

    let svg = dir.path().join("expand.svg");
    let o = sumlab(&["plot", "--input", p(&report), "--format", "svg", "-o", p(&svg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn random_sets_are_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = sumlab(&["--seed", seed, "construct", "random", "--kind", "katztao", "--q", "12", "-o", p(&out)]);
        assert!(o.status.success());
        fs::read(&out).unwrap()
    };
    assert_eq!(run("a.json", "7"), run("b.json", "7"));
    assert_ne!(run("a.json", "7"), run("c.json", "8"));
    let o = sumlab(&[
        "construct",
        "random",
        "--kind",
        "subset",
        "--q",
        "8",
        "--n",
        "4",
        "-o",
        p(&dir.path().join("d.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn trace_certificate_reverifies() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (name, seed, s) in [("A", "1", "1/4"), ("B", "2", "1/2")] {
        let o = sumlab(&[
            "--seed",
            seed,
            "construct",
            "random",
            "--kind",
            "katztao",
            "--q",
            "16",
            "--T",
            "4",
            "--s",
            s,
            "-o",
            p(&d.join(format!("{name}.json"))),
        ]);
        assert!(o.status.success());
    }
    let o = sumlab(&[
        "--seed",
        "3",
        "construct",
        "random",
        "--kind",
        "frostman",
        "--q",
        "16",
        "--T",
        "4",
        "--s",
        "1/2",
        "-o",
        p(&d.join("C.json")),
    ]);
    assert!(o.status.success());
    let files = [d.join("A.json"), d.join("B.json"), d.join("C.json")];
    let cert = d.join("cert.json");
    let o = sumlab(&[
        "trace",
        "abc",
        "--A",
        p(&files[0]),
        "--B",
        p(&files[1]),
        "--C",
        p(&files[2]),
        "--T",
        "4",
        "--alpha",
        "1/4",
        "--beta",
        "1/2",
        "--gamma",
        "1/2",
        "--eta",
        "1/10",
        "-o",
        p(&cert),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let check = d.join("check.json");
    let verify = |check: &Path| {
        sumlab(&[
            "verify",
            "--certificate",
            p(&cert),
            "--A",
            p(&files[0]),
            "--B",
            p(&files[1]),
            "--C",
            p(&files[2]),
            "-o",
            p(check),
        ])
    };
    let o = verify(&check);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&check)["result"]["ok"], true);

    // a tampered exponent is caught
    let mut c = json(&cert);
    c["result"]["beta_prime"] = Value::String("1".into());
    fs::write(&cert, serde_json::to_vec(&c).unwrap()).unwrap();
    let o = verify(&check);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&check)["result"]["ok"], false);
}

#[test]
fn branch_csv_from_function() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    fs::write(&f, r#"{"T": 1, "values": ["0", "1", "1"]}"#).unwrap();
    let csv = dir.path().join("f.csv");
    let o = sumlab(&["branch", "--function", p(&f), "--decompose", "hull", "--csv", p(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&csv).unwrap(), "j,f,minorant\n0,0,0\n1,1,1/2\n2,1,1\n");
    let out: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(out["result"]["decomposition"]["breakpoints"], serde_json::json!([0, 2]));
}

#[test]
fn verify_suite_subset() {
    let o = sumlab(&["verify", "--suite", "5,7"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 2);
    assert_eq!(sumlab(&["verify", "--suite", "13"]).status.code(), Some(1));
}
