use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn quadhecke(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadhecke")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 output")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("stdout is JSON")
}

#[test]
fn headline_attach_matches_everywhere_and_is_reproducible() {
    let twin = scratch("attach.json");
    let args = ["attach", "--d0", "229", "--coeff", "Fp:7", "--chi-order", "3", "--upto", "100"];
    let first = quadhecke(&[&args[..], &["--json-out", twin.to_str().unwrap()]].concat());
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let tsv = stdout(&first);
    let rows: Vec<&str> = tsv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "ell\tkind\ta\tA\ttr\tdet\tmatch");
    // Every prime below 100 except 2 (divides N after augmentation), 7 and 229.
    assert_eq!(rows.len() - 1, 23);
    assert!(rows[1..].iter().all(|r| r.ends_with("\ttrue")));
    for r in &rows[1..] {
        let cols: Vec<&str> = r.split('\t').collect();
        match cols[1] {
            "inert" => assert_eq!((cols[2], cols[3]), ("0", "6")),
            "split" => assert_eq!(cols[3], "1"),
            other => panic!("unexpected kind {other}"),
        }
    }
    let twin_json: Value = serde_json::from_str(&std::fs::read_to_string(&twin).unwrap()).unwrap();
    assert_eq!(twin_json["all_match"], Value::Bool(true));
    assert_eq!(twin_json["rows"].as_array().unwrap().len(), 23);

    let again = quadhecke(&[&args[..], &["--jobs", "1"]].concat());
    assert_eq!(stdout(&again), tsv, "reports must not depend on the worker count");
}

#[test]
fn reports_embed_hash_and_conventions() {
    let a = quadhecke(&["field", "--upto", "30"]);
    let b = quadhecke(&["field", "--upto", "30"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert!(v["conventions"]["lambda"].as_str().unwrap().contains("least nonnegative residue"));
    assert!(v["conventions"]["trees"].as_str().unwrap().contains("transposed"));
    assert_eq!(v["class_number"], 3);
    assert_eq!(v["fundamental_unit"], "7 + 1*w");

    let other = json(&quadhecke(&["field", "--upto", "30", "--seed", "1"]));
    assert_ne!(v["config_hash"], other["config_hash"]);
}

#[test]
fn tree_patches_have_the_expected_sizes() {
    let out = quadhecke(&["tree", "--ell", "2", "--n", "2", "--radius", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph T_2_2 {\n"));
    assert!(dot.contains("config_hash="));
    // Two fibers over 1 + 3 + 6 homothety classes.
    assert_eq!(dot.lines().filter(|l| l.trim_start().starts_with('v') && l.contains("[label=")).count(), 20);
    assert!(dot.contains("laplacian: 8 interior vertices, no violation"));

    let split = stdout(&quadhecke(&["tree", "--ell", "3", "--radius", "3"]));
    assert_eq!(split.lines().filter(|l| l.contains("[label=")).count(), 1 + 4 + 12 + 36);
}

#[test]
fn hecke_report_schema() {
    let out = quadhecke(&["hecke", "--ell", "5", "--lattice", "[[2,1],[0,3]]", "--level-m", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    for key in ["ell", "summands", "lhs", "rhs", "lhs_laplacian", "pass"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let summands = v["summands"].as_array().unwrap();
    let total: u64 = summands.iter().map(|s| s["n"].as_u64().unwrap()).sum();
    assert_eq!(total, 6);
    for s in summands {
        for key in ["m", "d", "e", "n", "r", "phi"] {
            assert!(s.get(key).is_some(), "summand missing {key}");
        }
    }

    let all = json(&quadhecke(&["hecke", "--all-ell-upto", "20", "--level-m", "7"]));
    let ells: Vec<u64> = all["reports"].as_array().unwrap().iter().map(|r| r["ell"].as_u64().unwrap()).collect();
    assert_eq!(ells, vec![2, 3, 5, 11, 13, 17, 19]);
    assert_eq!(all["pass"], Value::Bool(true));
}

#[test]
fn phi_and_invariance() {
    let out = quadhecke(&["phi", "--lattice", "[[1,0],[0,1]]", "--invariance", "--samples", "40", "--level-m", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["lattices"][0]["phi"], "1");
    assert_eq!(v["invariance"]["samples"], 40);
    assert_eq!(v["invariance"]["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cfg = scratch("run.cfg");
    std::fs::write(&cfg, "# field and bounds\nfield.d0 = 5\nbounds.B = 11\nchi.order = 1\n").unwrap();
    let from_file = json(&quadhecke(&["--config", cfg.to_str().unwrap(), "field"]));
    assert_eq!(from_file["d0"], 5);
    assert_eq!(from_file["splitting"].as_array().unwrap().len(), 5);
    let overridden = json(&quadhecke(&["--config", cfg.to_str().unwrap(), "field", "--d0", "229"]));
    assert_eq!(overridden["d0"], 229);
    assert_eq!(overridden["config"]["bounds.B"], "11");
}

#[test]
fn configuration_errors_name_the_field() {
    let cases: [(&[&str], &str); 6] = [
        (&["field", "--chi-order", "4"], "`chi.order`"),
        (&["field", "--d0", "12"], "`field.d0`"),
        (&["field", "--coeff", "Fp:4"], "`coeff`"),
        (&["character", "--coeff", "Fp:5"], "`chi.order`"),
        (&["phi", "--lattice", "[[1,2]]"], "`--lattice`"),
        (&["field", "--level-m", "2"], "`S.M`"),
    ];
    for (args, key) in cases {
        let out = quadhecke(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains(key), "{args:?}: {}", stderr(&out));
    }
    let cfg = scratch("bad.cfg");
    std::fs::write(&cfg, "seed = 1\nbound.B = 3\n").unwrap();
    let out = quadhecke(&["--config", cfg.to_str().unwrap(), "field"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`bound.B`"));
}

#[test]
fn computation_errors_name_prime_and_lattice() {
    let out = quadhecke(&["hecke", "--ell", "7", "--lattice", "[[1,0],[0,2]]"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("l = 7, lattice [[1,0],[0,2]]"), "{}", stderr(&out));
}

#[test]
fn table_characters_are_accepted() {
    let table = scratch("chi.txt");
    // λ₃ generates the class group of Q(√229); its conjugate is the inverse class.
    std::fs::write(&table, "3 lambda 1 1\n3 lambda' 2 2\n5 lambda - 2\n5 lambda' - 1\n").unwrap();
    let out = quadhecke(&["character", "--chi-table", table.to_str().unwrap(), "--upto", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["source"], "table");
    assert_eq!(v["conditions"]["galois"], "unchecked");
    let values = v["values"].as_array().unwrap();
    let at = |p: &str| values.iter().find(|x| x["prime"] == p).unwrap()["value"].clone();
    assert_eq!(at("lambda_3"), "2");
    assert_eq!(at("(2)"), Value::Null);
    assert!(v["config"]["chi.table"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn output_paths_receive_the_artifact() {
    let path = scratch("field.json");
    let out = quadhecke(&["field", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "field");
}

#[test]
fn selftest_passes_on_the_default_configuration() {
    let out = quadhecke(&["selftest"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 9);
}
