//! End-to-end tests of the `paramp` binary: contract examples, exit codes
//! and determinism of seeded outputs.

use std::path::Path;
use std::process::{Command, Output};

fn paramp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paramp"))
        .args(args)
        .output()
        .expect("failed to spawn paramp")
}

/// Run expecting success; return stdout as UTF-8.
fn run_ok(args: &[&str]) -> String {
    let out = paramp(args);
    assert!(
        out.status.success(),
        "paramp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout is not UTF-8")
}

fn run_json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&run_ok(args)).expect("stdout is not JSON")
}

fn exit_code(args: &[&str]) -> i32 {
    paramp(args).status.code().expect("no exit code")
}

#[test]
fn witness_classifies_the_published_moment_point_as_non_gaussian() {
    let doc = run_json(&["witness", "--mu-rel", "1.66", "--g2", "2.58"]);
    assert_eq!(doc["category"], "NonGaussian");
    assert!(doc["margins"]["non_gaussian"].as_f64().unwrap() > 0.0);
    assert!(doc["margins"]["non_classical"].as_f64().unwrap() > 0.0);
}

#[test]
fn witness_requires_exactly_one_input_plane() {
    // Mixed planes and the empty invocation are both usage errors.
    assert_eq!(exit_code(&["witness", "--mu-rel", "1.5", "--g2", "3.0", "--p0", "0.5"]), 2);
    assert_eq!(exit_code(&["witness"]), 2);
}

#[test]
fn witness_rejects_sub_unit_mu_rel_with_the_domain_exit_code() {
    assert_eq!(exit_code(&["witness", "--mu-rel", "0.5", "--g2", "2.0"]), 3);
}

#[test]
fn unknown_flags_exit_with_the_usage_code() {
    assert_eq!(exit_code(&["witness", "--no-such-flag", "1"]), 2);
    assert_eq!(exit_code(&["no-such-subcommand"]), 2);
}

#[test]
fn version_reports_the_curve_table_resolution() {
    let text = run_ok(&["--version"]);
    assert!(text.contains("10000 points"), "{text}");
    assert!(text.contains("[0, 5]"), "{text}");
    assert!(text.contains("1e-10"), "{text}");
}

#[test]
fn hbt_infer_maps_zero_clicks_to_pure_vacuum() {
    let doc = run_json(&[
        "hbt-infer", "--q1", "0", "--q2", "0", "--t", "0.5", "--pa", "1", "--pb", "1",
    ]);
    assert_eq!(doc["p0"].as_f64().unwrap(), 1.0);
    assert_eq!(doc["p1"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["p2plus"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["physical"], true);
}

#[test]
fn curves_emits_the_requested_rows_with_the_documented_shape() {
    let text = run_ok(&["curves", "--kind", "NG_post", "--r-max", "5", "--points", "1000"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# kind=NG_post_mu_g2");
    assert_eq!(lines[1], "param,x,y");
    assert_eq!(lines[2], "0,1,3");
    assert_eq!(lines.len(), 1002, "comment + header + 1000 samples");
    // Last sample sits at the requested r-max.
    let last: Vec<f64> = lines[1001].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 5.0);
    assert!(last[1] > 20.0, "mu_rel grows along the curve");
}

#[test]
fn curves_accepts_json_format_and_full_kind_names() {
    let doc = run_json(&[
        "curves", "--kind", "ng_pre_p0p1", "--points", "10", "--format", "json",
    ]);
    assert_eq!(doc["kind"], "NG_pre_p0p1");
    assert_eq!(doc["x"].as_array().unwrap().len(), 10);
}

#[test]
fn amplify_maps_vacuum_to_the_reference_point() {
    let dir = tempfile::tempdir().unwrap();
    let state = path_str(&dir.path().join("vacuum.json"));
    run_ok(&["simulate-state", "--kind", "vacuum", "--output", &state]);
    let doc = run_json(&["amplify", "--input", &state]);
    assert_eq!(doc["mu_rel"].as_f64().unwrap(), 1.0);
    assert_eq!(doc["g2_post"].as_f64().unwrap(), 3.0);
    assert!(doc["mean_photons"].as_f64().unwrap() > 1e4);
}

#[test]
fn sample_reruns_are_byte_identical_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let state = path_str(&dir.path().join("state.json"));
    run_ok(&["simulate-state", "--kind", "thermal", "--mean", "0.3", "--output", &state]);
    let a = run_ok(&["sample", "--input", &state, "--pulses", "500", "--seed", "9"]);
    let b = run_ok(&["sample", "--input", &state, "--pulses", "500", "--seed", "9"]);
    let c = run_ok(&["sample", "--input", &state, "--pulses", "500", "--seed", "10"]);
    assert_eq!(a, b, "same seed must reproduce the records exactly");
    assert_ne!(a, c, "different seeds must differ");
    assert!(a.lines().next().unwrap().starts_with("# "), "metadata comments first");
}

#[test]
fn simulate_sample_analyze_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let state = path_str(&dir.path().join("state.json"));
    let vacuum_state = path_str(&dir.path().join("vacuum.json"));
    let signal_csv = path_str(&dir.path().join("signal.csv"));
    let vacuum_csv = path_str(&dir.path().join("vacuum.csv"));

    run_ok(&[
        "simulate-state", "--kind", "heralded", "--brightness", "0.1",
        "--eta-signal", "0.26", "--output", &state,
    ]);
    run_ok(&["simulate-state", "--kind", "vacuum", "--output", &vacuum_state]);
    run_ok(&[
        "sample", "--input", &state, "--pulses", "4000", "--seed", "11",
        "--output", &signal_csv,
    ]);
    run_ok(&[
        "sample", "--input", &vacuum_state, "--pulses", "4000", "--seed", "12",
        "--output", &vacuum_csv,
    ]);

    let doc = run_json(&[
        "analyze", "--signal", &signal_csv, "--vacuum", &vacuum_csv,
        "--resamples", "200", "--seed", "5",
    ]);
    assert_eq!(doc["schema_version"], 1);
    let mu = doc["mu_rel"]["value"].as_f64().unwrap();
    let g2 = doc["g2"]["value"].as_f64().unwrap();
    assert!((1.3..2.0).contains(&mu), "mu_rel = {mu}");
    assert!((2.3..3.0).contains(&g2), "g2 = {g2}");
    assert!(!doc["verdict"]["category"].as_str().unwrap().is_empty());
    for key in ["signal_sha256", "vacuum_sha256"] {
        let h = doc["inputs"][key].as_str().unwrap();
        assert_eq!(h.len(), 64);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
    }
    // Sampled records carry no herald column, so nothing was conditioned.
    assert_eq!(doc["inputs"]["conditioned"], false);
    assert_eq!(doc["inputs"]["gain"].as_f64().unwrap(), 6.5);
}

#[test]
fn sweep_emits_the_documented_header_and_one_row_per_point() {
    let text = run_ok(&["sweep", "--brightness", "0.05,0.1,0.2"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "brightness,p0,p1,p2plus,m,s2,mu_rel,g2,sigma_mu_rel,sigma_g2,prob_verdict,moment_verdict"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.05,"));
    assert!(lines[3].starts_with("0.2,"));
}

fn path_str(p: &Path) -> String {
    p.to_str().expect("temp path is valid UTF-8").to_owned()
}
