use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn saf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saf")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (Value, i32) {
    let out = saf(args);
    let code = out.status.code().unwrap();
    assert!(code != 3, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    (serde_json::from_slice(&out.stdout).expect("json report"), code)
}

fn prototype_file(name: &str) -> String {
    let out = saf(&["prototype", "--w", "2", "--h", "1", "--e", "-1", "--t", "(-1+1*sqrt(17))/6"]);
    assert!(out.status.success());
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, &out.stdout).unwrap();
    path.display().to_string()
}

#[test]
fn report_has_command_digest_and_result() {
    let (r, code) = report(&["involution", "saf", &fixture("rotation.json")]);
    assert_eq!(code, 0);
    assert!(r["command"].as_str().unwrap().starts_with("involution saf"));
    assert_eq!(r["input_digest"].as_str().unwrap().len(), 64);
    assert_eq!(r["result"]["saf"], "2*(1^sqrt(5))");
    assert!(r.get("timing_ms").is_none());
}

#[test]
fn output_is_deterministic() {
    let args = ["involution", "decide", &fixture("figure.json")];
    assert_eq!(saf(&args).stdout, saf(&args).stdout);
}

#[test]
fn decide_exit_codes() {
    let (r, code) = report(&["involution", "decide", &fixture("figure.json")]);
    assert_eq!((r["result"]["kind"].as_str(), code), (Some("NotCP"), 1));
    let (r, code) = report(&["involution", "decide", &fixture("rational.json")]);
    assert_eq!((r["result"]["kind"].as_str(), code), (Some("CP"), 0));
    let (r, code) = report(&["involution", "decide", &fixture("rational.json"), "--budget", "0"]);
    assert_eq!((r["result"]["kind"].as_str(), code), (Some("Inconclusive"), 2));
}

#[test]
fn errors_exit_three() {
    let out = saf(&["involution", "saf", "/no/such/file.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    let out = saf(&["perm", "irreducible", "A B / C"]);
    assert_eq!(out.status.code(), Some(3));
    let out = saf(&["perm", "frobnicate"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn parse_errors_carry_position() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("broken.json");
    std::fs::write(&path, "{\n  \"perm\": \"A B / B A\",\n  \"lengths\": {\"A\": 1\n").unwrap();
    let out = saf(&["involution", "saf", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json:4:"));
}

#[test]
fn perm_commands() {
    let (r, _) = report(&["perm", "irreducible", &fixture("iet.txt")]);
    assert_eq!(r["result"]["irreducible"], true);
    let (r, _) = report(&["perm", "irreducible", "A B / A B"]);
    assert_eq!(r["result"]["irreducible"], false);
    let (r, _) = report(&["perm", "inverse-sing", &fixture("sing.txt"), "--letter", "a"]);
    assert_eq!(r["result"]["count"], 9);
    let (r, _) = report(&["perm", "rauzy", &fixture("figure.json"), "--steps", "4"]);
    assert_eq!(r["result"]["steps"].as_array().unwrap().len(), 4);
}

#[test]
fn approx_adds_decimal_companions() {
    let (r, _) = report(&["--approx", "4", "involution", "flux", &fixture("rotation.json")]);
    assert_eq!(r["result"]["galois_flux"], "0-2*sqrt(5)");
    assert_eq!(r["result"]["galois_flux~"], "-4.4721");
}

#[test]
fn suspend_text_and_json() {
    let (r, _) = report(&["suspend", &fixture("iet.txt")]);
    assert_eq!(r["result"]["stratum"], "H(2)");
    let (r, _) = report(&["suspend", &fixture("gp.txt")]);
    assert_eq!(r["result"]["stratum"], "Q(-1^4)");
    assert!(r["result"]["transversal"].is_array());
    // the figure involution decomposes, so it has no suspension
    assert_eq!(saf(&["suspend", &fixture("figure.json")]).status.code(), Some(3));
}

#[test]
fn prototype_round_trip() {
    let p = prototype_file("proto.json");
    let (r, _) = report(&["surface", "saf", &p, "--slope", "inf", "--slope", "1", "--slope", "-1/2", "--jobs", "2"]);
    let dirs = r["result"]["directions"].as_array().unwrap();
    assert_eq!(dirs.len(), 3);
    assert!(dirs.iter().all(|d| d["saf"] == "0"));
    let (r, _) = report(&["surface", "cylinders", &p, "--dir", "0:1", "--dir", "1:0", "--jobs", "2"]);
    let decs = r["result"]["decompositions"].as_array().unwrap();
    assert_eq!(decs[0]["direction"], serde_json::json!(["0", "1"]));
    assert!(decs.iter().all(|d| !d["cylinders"].as_array().unwrap().is_empty()));
    let (r, code) = report(&["surface", "eigencheck", &p]);
    assert_eq!((code, &r["result"]["failures"]), (0, &serde_json::json!([])));
    let (r, _) = report(&["surface", "flux", &p]);
    assert_eq!(r["result"]["complex_flux"], "(0)+i*(0)");
}

#[test]
fn kernel_move_keeps_eigenform() {
    let p = prototype_file("proto_km.json");
    let out = saf(&["surface", "kernel-move", &p, "--v", "(1/100,0)"]);
    assert!(out.status.success());
    let moved = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("moved.json");
    std::fs::write(&moved, &out.stdout).unwrap();
    let (r, code) = report(&["surface", "eigencheck", moved.to_str().unwrap()]);
    assert_eq!(code, 0, "{r}");
    let (r, _) = report(&["surface", "double-cover", moved.to_str().unwrap()]);
    assert_eq!(r["result"]["stratum"], "H(1,1,2)");
}

#[test]
fn eigencheck_needs_prototype() {
    let (r, _) = report(&["suspend", &fixture("iet.txt")]);
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("plain.json");
    std::fs::write(&path, r["result"].to_string()).unwrap();
    let out = saf(&["surface", "eigencheck", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prototype"));
}
