mod common;

use std::process::{Command, Output};

use common::examples_dir;

fn plausia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plausia"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn golden(name: &str) -> String {
    examples_dir().join(name).to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_exit_codes() {
    for f in ["counting_grid6.epm", "product_prior.epm", "shifted_table.epm"] {
        let o = plausia(&["validate", &golden(f)]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", stdout(&o));
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.epm");
    std::fs::write(
        &bad,
        "domain unit-rational\nstates a b\nagents 1\npartition 1: {a b}\nprior common: a=1/2 b=1/3\n",
    )
    .unwrap();
    let o = plausia(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    std::fs::write(&bad, "domain unit-rational\nstates\n").unwrap();
    let o = plausia(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn eval_common_knowledge_of_w() {
    let o = plausia(&["eval", &golden("counting_grid6.epm"), "C({w1 w2 w3})"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "{w1 w2 w3}");
}

#[test]
fn eval_trace_lists_iterations() {
    let o = plausia(&["eval", &golden("counting_grid6.epm"), "C({w1 w2})", "--trace"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("{}"), "{out}");
    assert!(out.contains("iteration 1: {w1}"), "{out}");
    let o = plausia(&["eval", &golden("counting_grid6.epm"), "C({w1 w2})", "--trace", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["event"], "{}");
    assert_eq!(v["traces"][0]["iterations"][0], "{w1}");
}

#[test]
fn eval_errors_exit_two() {
    let o = plausia(&["eval", &golden("counting_grid6.epm"), "K(3, {w1})"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown agent"), "{}", stderr(&o));
    let o = plausia(&["eval", &golden("counting_grid6.epm"), "C({w1 w2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn product_threshold_expression_is_well_typed() {
    let o = plausia(&["eval", &golden("product_prior.epm"), "B(1, (1/10,1/10), E)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "{w1 w2}");
}

#[test]
fn axioms_exit_codes() {
    let s4 = golden("counting_grid6.epm");
    let o = plausia(&["axioms", &s4, "--only", "CP1,CP2,CP3,CP4,A1,A2,A3,A4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // Distributivity needs products that leave the sixths grid.
    let o = plausia(&["axioms", &s4]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("M2               fail"), "{}", stdout(&o));
    let o = plausia(&["axioms", &golden("product_prior.epm"), "--only", "CP7"]);
    assert_eq!(o.status.code(), Some(1));
    let o = plausia(&["axioms", &golden("shifted_table.epm"), "--only", "M3-SAT"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("13/50"), "{}", stdout(&o));
    let o = plausia(&["axioms", &golden("shifted_table.epm"), "--only", "CP1,CP6,CP7", "--exempt-bot-bot"]);
    assert_eq!(o.status.code(), Some(0));
    let o = plausia(&["axioms", &golden("counting_grid6.epm"), "--only", "CP9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn text_and_json_reports_agree() {
    let file = golden("product_prior.epm");
    let text = stdout(&plausia(&["axioms", &file, "--only", "CP7"]));
    let json: serde_json::Value =
        serde_json::from_slice(&plausia(&["axioms", &file, "--only", "CP7", "--format", "json"]).stdout).unwrap();
    let reports = json["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 1);
    let r = &reports[0];
    assert_eq!(r["axiom"], "CP7");
    assert_eq!(r["verdict"], "fail");
    assert!(text.contains(&format!("failures {}", r["failures"])), "{text}");
    for w in r["witnesses"].as_array().unwrap() {
        let values = w["values"].as_object().unwrap();
        for (k, v) in values {
            assert!(text.contains(&format!("{k}={}", v.as_str().unwrap())), "{k} missing from text");
        }
    }
}

#[test]
fn agreement_exit_codes() {
    let ex1 = golden("product_prior.epm");
    let o = plausia(&["agreement", &ex1, "--theorem", "msn-nomult", "--event", "E", "--threshold", "(1/10,1/10)"]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.contains("CP7 fails") && out.contains("(1/2,1/2)") && out.contains("(1/4,2/3)"), "{out}");
    let o = plausia(&["agreement", &ex1, "--theorem", "msn-mult", "--event", "E", "--threshold", "(1/10,1/10)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // Dropping CP7 makes the theorem checkable; it still holds here.
    let o = plausia(&[
        "agreement", &ex1, "--theorem", "msn-nomult", "--event", "E", "--threshold", "(1/10,1/10)", "--drop", "CP7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s4 = golden("counting_grid6.epm");
    let o = plausia(&["agreement", &s4, "--theorem", "aumann", "--event", "{w1}"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("holds-vacuously"));
    let o = plausia(&["agreement", &s4, "--theorem", "msn", "--event", "{w1}", "--threshold", "1/2"]);
    assert_eq!(o.status.code(), Some(3), "classical MSN needs unit-rational");
    let ex2 = golden("shifted_table.epm");
    let o = plausia(&["agreement", &ex2, "--theorem", "msn", "--event", "E", "--threshold", "1/2"]);
    assert_eq!(o.status.code(), Some(3), "table measures are not probability models");
    let o = plausia(&["agreement", &ex2, "--theorem", "msn-nomult"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("summary:"));
    let o = plausia(&["agreement", &ex2, "--theorem", "bogus", "--event", "E"]);
    assert_eq!(o.status.code(), Some(2));
    let o = plausia(&["agreement", &ex2, "--theorem", "msn", "--event", "E"]);
    assert_eq!(o.status.code(), Some(2), "missing threshold");
}

#[test]
fn oracle_diff_on_shipped_corpus() {
    let files: Vec<String> = ["counting_grid6.epm", "product_prior.epm", "shifted_table.epm"]
        .iter()
        .map(|f| golden(f))
        .collect();
    let mut args = vec!["oracle-diff"];
    args.extend(files.iter().map(String::as_str));
    let o = plausia(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 mismatch(es)"));
}

#[test]
fn search_writes_replayable_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = plausia(&[
        "search", "--target", "M3-SAT", "--family", "table", "--agents", "1", "--max-states", "3", "--max-witnesses",
        "2", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let witnesses = manifest["witnesses"].as_array().unwrap();
    assert_eq!(witnesses.len(), 2);
    for w in witnesses {
        let file = dir.path().join(w["file"].as_str().unwrap());
        assert!(w["reproduce"].as_str().unwrap().contains("--only M3-SAT"));
        let o = plausia(&["axioms", file.to_str().unwrap(), "--only", "M3-SAT"]);
        assert_eq!(o.status.code(), Some(1), "replay of {}", file.display());
    }
}

#[test]
fn search_without_witnesses_exits_zero() {
    let o = plausia(&["search", "--target", "msn", "--max-states", "3", "--denominator", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("no counterexample found"));
    let o = plausia(&["search", "--target", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = plausia(&["search", "--target", "msn", "--budget", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(plausia(&[]).status.code(), Some(2));
    assert_eq!(plausia(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(plausia(&["validate", "/nonexistent.epm"]).status.code(), Some(2));
    assert_eq!(plausia(&["--help"]).status.code(), Some(0));
}
