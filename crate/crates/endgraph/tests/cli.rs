//! Black-box tests of the `endgraph` binary: exit-code contract, JSON
//! shapes, file round-trips, and the interactive mode.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_endgraph"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let (code, stdout, stderr) = run(args);
    let value = serde_json::from_str(&stdout)
        .unwrap_or_else(|e| panic!("{args:?}: bad JSON ({e}); stderr: {stderr}"));
    (code, value)
}

#[test]
fn ends_reports_two_isolated_points_for_figure1() {
    let (code, v) = run_json(&["ends", fixture("fig1.egp").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["isolated"], 2);
    assert_eq!(v["free_families"], 0);
    assert_eq!(v["classes"]["r+"], "[r+]");
}

#[test]
fn edge_ends_merges_the_two_rays() {
    let (code, v) = run_json(&["edge-ends", fixture("fig1.egp").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["isolated"], 1);
    assert_eq!(v["classes"]["r+"], v["classes"]["r-"]);
}

#[test]
fn verify_rho_passes_and_tau_rejects_figure1() {
    let file = fixture("fig1.egp");
    let (code, v) = run_json(&["verify", file.to_str().unwrap(), "--rho"]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    let (code, v) = run_json(&["verify", file.to_str().unwrap(), "--tau"]);
    assert_eq!(code, 1);
    assert_eq!(v["pass"], false);
    assert!(v["precondition_violated"].as_str().unwrap().contains("vinf"));
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, _) = run(&["verify", fixture("fig1.egp").to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _, stderr) = run(&["ends", "/nonexistent.egp"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("nonexistent"));
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn expand_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("expanded.egp");
    let (code, v) = run_json(&[
        "expand",
        fixture("fig1.egp").to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["replaced"]["vinf"], "vinf.k");
    let (code, v) = run_json(&["ends", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["isolated"], 1, "expanded graph has one end");
}

#[test]
fn rayspace_of_the_comb_has_a_converging_sequence() {
    let (code, v) = run_json(&["rayspace", fixture("comb_tree.ots").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["limits"], serde_json::json!(["base"]));
    assert_eq!(v["sequences"][0][1], "base");
}

#[test]
fn tgraph_output_parses_and_matches_the_ray_space() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tg.egp");
    let (code, _) = run_json(&[
        "tgraph",
        fixture("comb_tree.ots").to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, v) = run_json(&["ends", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["limits"].as_array().unwrap().len(), 1);
}

#[test]
fn surgery_regroups_and_preserves_the_descriptor() {
    let dir = tempfile::tempdir().unwrap();
    let nmap = dir.path().join("nmap.txt");
    std::fs::write(&nmap, "s1: s0[0]\n").unwrap();
    let out = dir.path().join("out.ots");
    let (code, _) = run_json(&[
        "surgery",
        fixture("omega2.ots").to_str().unwrap(),
        nmap.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (_, before) = run_json(&["rayspace", fixture("omega2.ots").to_str().unwrap()]);
    let (_, after) = run_json(&["rayspace", out.to_str().unwrap()]);
    assert_eq!(before["isolated"], after["isolated"]);
}

#[test]
fn check_subbase_passes_scheme_and_flags_bad_topology() {
    let (code, v) = run_json(&["check-subbase", fixture("fork.ots").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    // overlapping incomparable sets on a declared non-discrete topology
    let dir = tempfile::tempdir().unwrap();
    let sets = dir.path().join("sets.txt");
    let points = dir.path().join("points.txt");
    std::fs::write(&sets, "u1: a b\nu2: b c\n").unwrap();
    std::fs::write(&points, "a b c\n").unwrap();
    let (code, v) = run_json(&[
        "check-subbase",
        sets.to_str().unwrap(),
        "--ground",
        points.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["special"]["nested"]["pass"], false);
}

#[test]
fn match_verb_reports_a_capture() {
    let (code, v) = run_json(&[
        "match",
        fixture("omega2.ots").to_str().unwrap(),
        "--policy",
        "descend:s0",
        "--rounds",
        "4",
    ]);
    assert_eq!(code, 0);
    let capture = &v["status"]["Adjudicated"]["Capture"];
    assert_eq!(capture["x"], "s0");
    assert_eq!(capture["remainder"], serde_json::json!(["s1"]));
}

#[test]
fn oscillate_script_matches_its_descend_adjudication() {
    let file = fixture("comb_tree.ots");
    let (_, descend) = run_json(&[
        "match",
        file.to_str().unwrap(),
        "--policy",
        "descend:base",
        "--rounds",
        "5",
    ]);
    let (_, oscillate) = run_json(&[
        "match",
        file.to_str().unwrap(),
        "--policy",
        "oscillate:base:dhdh",
        "--rounds",
        "5",
    ]);
    assert_eq!(descend["status"], oscillate["status"]);
}

#[test]
fn play_transcript_reproduces_the_match_adjudication() {
    let file = fixture("fork.ots");
    let mut child = bin()
        .args(["play", file.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"part 0\npart 0\nquit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let last = String::from_utf8(out.stdout).unwrap();
    let last = last.lines().last().unwrap().to_string();
    let v: Value = serde_json::from_str(&last).unwrap();
    assert_eq!(v["outcome"]["Capture"]["x"], "left");
    // the scripted equivalent adjudicates identically
    let (_, m) = run_json(&[
        "match",
        file.to_str().unwrap(),
        "--policy",
        "descend:left",
        "--rounds",
        "2",
    ]);
    assert_eq!(
        m["status"]["Adjudicated"]["Capture"]["x"],
        v["outcome"]["Capture"]["x"]
    );
}

#[test]
fn play_rejects_unknown_parts_but_continues() {
    let file = fixture("fork.ots");
    let mut child = bin()
        .args(["play", file.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"part 9\npart 1\nquit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("no part 9"));
    let v: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(v["outcome"]["Capture"]["x"], "right");
}

#[test]
fn build_tc_on_a_ground_isolates_every_point() {
    let (code, v) = run_json(&[
        "build-tc",
        fixture("ground_sets.txt").to_str().unwrap(),
        "--ground",
        fixture("ground_points.txt").to_str().unwrap(),
        "--depth",
        "6",
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        v["descriptor"]["isolated"],
        serde_json::json!(["a", "b", "c", "d"])
    );
}

#[test]
fn corpus_runs_are_deterministic() {
    let args = ["corpus", "--seed", "7", "--n", "12", "--suite", "special"];
    let (code1, out1, _) = run(&args);
    let (code2, out2, _) = run(&args);
    assert_eq!(code1, 0);
    assert_eq!(code2, 0);
    assert_eq!(out1, out2, "same seed must print identical reports");
    let v: Value = serde_json::from_str(&out1).unwrap();
    assert_eq!(v["fail"], 0);
    assert_eq!(v["total"], 12);
}

#[test]
fn human_flag_switches_off_json() {
    let (code, out, _) = run(&[
        "ends",
        fixture("fig1.egp").to_str().unwrap(),
        "--human",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("isolated: 2"));
    assert!(serde_json::from_str::<Value>(&out).is_err());
}
