use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn pzk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pzk")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: stdout {:?} stderr {:?}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("pzk-cli-{}-{name}", std::process::id()))
}

#[test]
fn honest_sumcheck_passes_and_emits_a_transcript() {
    let out = pzk(&["sumcheck", "run", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"]["accepted"], Value::Bool(true));
    for key in ["instance", "params", "messages", "output_claim"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert!(!r["messages"].as_array().unwrap().is_empty());
}

#[test]
fn runs_are_reproducible_from_the_seed() {
    let a = pzk(&["zksumcheck", "run", "--seed", "9", "--params", "verifier=late_probe"]);
    let b = pzk(&["zksumcheck", "run", "--seed", "9", "--params", "verifier=late_probe"]);
    assert_eq!(a.stdout, b.stdout);
    let c = pzk(&["zksumcheck", "run", "--seed", "10", "--params", "verifier=late_probe"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn over_degree_prover_is_rejected_and_the_run_still_meets_expectations() {
    let out = pzk(&["sumcheck", "run", "--params", "prover=over_degree"]);
    let r = report(&out);
    assert_eq!(r["verdict"]["accepted"], Value::Bool(false));
    assert!(r["verdict"]["error"].as_str().unwrap().contains("degree"), "{r}");
}

#[test]
fn soundness_reports_stay_within_the_envelope() {
    for cmd in ["sumcheck", "zksumcheck"] {
        let out = pzk(&[cmd, "soundness", "--trials", "1500", "--seed", "1"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        let s = &report(&out)["soundness"];
        assert_eq!(s["trials"], Value::from(1500));
        assert_eq!(s["within_envelope"], Value::Bool(true));
    }
}

#[test]
fn report_flag_writes_a_file_instead_of_stdout() {
    let path = scratch("report.json");
    let out = pzk(&["aqc", "check", "--report", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    let table = r["table"].as_array().unwrap();
    assert!(table.iter().all(|row| row["matches_bound"] == Value::Bool(true)), "{r}");
}

#[test]
fn commitment_bundles_reopen_from_a_file() {
    let bundle = scratch("bundle.json");
    let out = pzk(&["commit", "new", "--seed", "12", "--params", "m=2,dq=2", "--report", bundle.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let open = pzk(&["commit", "open", "--in", bundle.to_str().unwrap(), "--params", "alpha=3:4"]);
    std::fs::remove_file(&bundle).ok();
    assert_eq!(open.status.code(), Some(0), "{}", String::from_utf8_lossy(&open.stderr));
    assert_eq!(report(&open)["verdict"]["accepted"], Value::Bool(true));
}

#[test]
fn forged_openings_are_rejected() {
    let out = pzk(&["commit", "open", "--seed", "5", "--params", "forge=true"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdict"]["accepted"], Value::Bool(false));
}

#[test]
fn false_circuit_claims_fail_and_true_ones_pass() {
    let ok = pzk(&["spc", "zkprove", "--params", "aux=2"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(report(&ok)["verdict"]["accepted"], Value::Bool(true));
    let eval = report(&pzk(&["spc", "eval"]));
    let y = u64::from_str_radix(eval["value"].as_str().unwrap(), 16).unwrap();
    let wrong = format!("y={}", y + 1);
    let bad = pzk(&["spc", "prove", "--params", &wrong]);
    assert_eq!(bad.status.code(), Some(0));
    assert_eq!(report(&bad)["verdict"]["accepted"], Value::Bool(false));
}

#[test]
fn frontends_prove_their_instances() {
    for args in [
        &["tqbf", "prove", "--seed", "3"][..],
        &["o3sat", "prove", "--seed", "3"][..],
        &["circuit", "prove", "--seed", "3"][..],
        &["circuit", "prove", "--seed", "3", "--params", "depth=3,width=4,inputs=4"][..],
    ] {
        let out = pzk(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn tqbf_verdict_tracks_truth_for_a_supplied_formula() {
    let path = scratch("qbf.json");
    let out = pzk(&["tqbf", "prove", "--seed", "8", "--params", "n=3,c=3"]);
    let q = report(&out)["instance"].clone();
    std::fs::write(&path, q.to_string()).unwrap();
    let again = pzk(&["tqbf", "prove", "--in", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(again.status.code(), Some(0));
    let r = report(&again);
    assert_eq!(r["verdict"]["accepted"], r["truth"]);
}

#[test]
fn zk_test_matches_real_and_simulated_views() {
    let out = pzk(&["zksumcheck", "zktest", "--trials", "20000", "--params", "verifier=early_probe"]);
    assert_eq!(out.status.code(), Some(0));
    let zk = &report(&out)["zk"];
    assert_eq!(zk["within_floor"], Value::Bool(true));
    assert_eq!(zk["negative_separated"], Value::Bool(true));
}

#[test]
fn usage_and_input_errors_exit_with_two() {
    assert_eq!(pzk(&["sumcheck", "run", "--params", "m=many"]).status.code(), Some(2));
    assert_eq!(pzk(&["sumcheck", "run", "--field", "12"]).status.code(), Some(2));
    assert_eq!(pzk(&["spc", "prove", "--in", "/nonexistent/circuit.json"]).status.code(), Some(2));
    assert_eq!(pzk(&["nonsense"]).status.code(), Some(2));
}
