//! End-to-end tests of the command-line interface: artifact round trips,
//! exit-status contract, and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dkshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dkshift"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn construct_worked_example(path: &Path) {
    let out = dkshift(&[
        "construct",
        "--k", "2", "--B", "1", "--N", "2",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn construct_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    construct_worked_example(&cert);
    let out = dkshift(&["verify", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("verdict: PASS"));
    // The divisor-count identity witness for this instance is 16*4 = 8*8.
    assert!(text.contains("64"), "expected identity witness in: {text}");
}

#[test]
fn verify_rejects_tampered_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    construct_worked_example(&cert);
    let text = fs::read_to_string(&cert).unwrap();
    assert!(text.contains("28623"));
    fs::write(&cert, text.replace("28623", "28624")).unwrap();
    let out = dkshift(&["verify", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("FAIL"), "must name the failed condition: {text}");
}

#[test]
fn construct_artifacts_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let c1 = dir.path().join("c1.json");
    let c2 = dir.path().join("c2.json");
    for (path, seed) in [(&c1, "7"), (&c2, "7")] {
        let out = dkshift(&[
            "construct",
            "--k", "6", "--B", "2", "--N", "2",
            "--seed", seed,
            "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(&c1).unwrap(), fs::read(&c2).unwrap());
}

#[test]
fn scan_finds_known_solution() {
    let out = dkshift(&["scan", "--k", "1", "--B", "1", "--limit", "100", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["count"].as_u64().unwrap() >= 1);
    assert_eq!(report["first_samples"][0].as_u64(), Some(2));
}

#[test]
fn scan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let out = dkshift(&[
        "scan",
        "--k", "1", "--B", "1", "--limit", "1000",
        "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x_checkpoint,count,ratio\n"));
    assert!(text.lines().count() >= 3);
}

#[test]
fn usage_errors_exit_with_status_2() {
    let out = dkshift(&["construct", "--k", "0", "--B", "1", "--N", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dkshift(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dkshift(&["construct", "--k", "2", "--B", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn admissible_examples() {
    let out = dkshift(&["admissible", "--form", "1,0", "--form", "1,1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("fixed prime: 2"));

    let out = dkshift(&["admissible", "--form", "2,1", "--form", "2,3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("ADMISSIBLE"));

    let out = dkshift(&["admissible", "--form", "1,0", "--form", "1,0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("discriminant nonzero: false"));
}

#[test]
fn generate_no_result_path_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    construct_worked_example(&cert);
    let resume = dir.path().join("resume.json");

    // A crippled factoring budget cannot classify any x: the run must
    // report the documented no-result status, never a false certificate.
    let crippled = [
        "--trial-bound", "2", "--rho-iterations", "1", "--rho-polys", "1",
    ];
    let mut args = vec![
        "generate",
        "--k", "2", "--B", "1", "--N", "2",
        "--cert", cert.to_str().unwrap(),
        "--x-start", "0", "--x-end", "4",
        "--resume", resume.to_str().unwrap(),
        "--json",
    ];
    args.extend_from_slice(&crippled);
    let out = dkshift(&args);
    assert_eq!(out.status.code(), Some(4), "{}", stdout(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["status"], "no result within budget");
    assert_eq!(report["summary"]["scanned"].as_u64(), Some(4));
    assert_eq!(report["summary"]["unknown"].as_u64(), Some(4));

    // The checkpoint recorded progress; a second run resumes past it.
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&resume).unwrap()).unwrap();
    assert_eq!(saved["next_x"].as_u64(), Some(4));
    let mut args = vec![
        "generate",
        "--k", "2", "--B", "1", "--N", "2",
        "--cert", cert.to_str().unwrap(),
        "--x-start", "0", "--x-end", "6",
        "--resume", resume.to_str().unwrap(),
        "--json",
    ];
    args.extend_from_slice(&crippled);
    let out = dkshift(&args);
    assert_eq!(out.status.code(), Some(4));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["summary"]["scanned"].as_u64(), Some(2), "{report}");
}

#[test]
fn generate_emits_verifiable_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    let solution = dir.path().join("s.json");
    construct_worked_example(&cert);
    let out = dkshift(&[
        "generate",
        "--k", "2", "--B", "1", "--N", "2",
        "--cert", cert.to_str().unwrap(),
        "--x-start", "0", "--x-end", "8",
        "--out", solution.to_str().unwrap(),
        "--json",
    ]);
    if out.status.code() == Some(4) {
        // Honest no-result is acceptable; a bad exit status is not.
        return;
    }
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    // The written artifact re-verifies through the independent oracle.
    let verify = dkshift(&["verify", solution.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0), "{}", stdout(&verify));
    assert!(stdout(&verify).contains("PASS"));
}
