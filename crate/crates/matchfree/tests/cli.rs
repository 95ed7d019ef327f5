//! End-to-end checks of the command-line binary: output shapes, file
//! round-trips, and the exit-code contract (0 ok, 1 usage/input, 3 failed
//! verification).

use std::path::PathBuf;
use std::process::{Command, Output};

use matchfree::{write_family, ElementSet, SetFamily};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matchfree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("matchfree-cli-{}-{name}", std::process::id()));
    p
}

#[test]
fn formula_prints_the_exact_value() {
    let out = run(&["formula", "--n", "7", "--s", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "105");

    let out = run(&["formula", "--n", "10", "--s", "4"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "977");
}

#[test]
fn construct_and_check_round_trip() {
    let path = temp_path("witness.fam");
    let out = run(&[
        "construct",
        "--n",
        "7",
        "--s",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out = run(&["check", "--family", path.to_str().unwrap(), "--s", "3"]);
    assert!(out.status.success());
    let report = stdout(&out);
    assert!(report.contains("\"size\": 105"), "unexpected report: {report}");
    assert!(report.contains("\"matches_formula\": true"), "unexpected report: {report}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn discharge_verdict_drives_the_exit_code() {
    // A sound input: the closed-form witness for (10, 3).
    let good = temp_path("good.fam");
    let out = run(&[
        "construct",
        "--n",
        "10",
        "--s",
        "3",
        "--kind",
        "anchored",
        "--out",
        good.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "discharge",
        "--family",
        good.to_str().unwrap(),
        "--s",
        "3",
        "--m",
        "3",
    ]);
    assert!(out.status.success(), "witness discharge should exit 0");
    assert!(stdout(&out).contains("\"verdict\": true"));

    // An unsound input: three pairwise disjoint members sneak in, so the run
    // must flag violations and exit 3.
    let mut fam = SetFamily::new(10).unwrap();
    for mask in 0u32..(1 << 10) {
        let set = ElementSet::from_mask(mask);
        if set.len() >= 4 {
            fam.insert(set).unwrap();
        }
    }
    for arc in [[1u32, 2, 3], [4, 5, 6], [7, 8, 9]] {
        fam.insert(ElementSet::from_elements(&arc)).unwrap();
    }
    let bad = temp_path("bad.fam");
    std::fs::write(&bad, write_family(&fam)).unwrap();
    let out = run(&[
        "discharge",
        "--family",
        bad.to_str().unwrap(),
        "--s",
        "3",
        "--m",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(3), "violations should exit 3");
    assert!(stdout(&out).contains("\"verdict\": false"));
    std::fs::remove_file(&good).ok();
    std::fs::remove_file(&bad).ok();
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["formula", "--n", "7"]);
    assert_eq!(out.status.code(), Some(1), "missing --s is a usage error");

    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["check", "--family", "/nonexistent/path.fam", "--s", "3"]);
    assert_eq!(out.status.code(), Some(1), "unreadable input is an input error");
}

#[test]
fn a_closed_output_pipe_ends_the_run_quietly() {
    use std::process::Stdio;
    // The (14,4) witness is a few hundred kilobytes — far past the OS pipe
    // buffer — so dropping the read end mid-write must surface as a quiet
    // SIGPIPE-style exit, not a panic.
    let mut child = Command::new(env!("CARGO_BIN_EXE_matchfree"))
        .args(["construct", "--n", "14", "--s", "4"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    drop(child.stdout.take());
    let out = child.wait_with_output().expect("child finishes");
    assert_eq!(out.status.code(), Some(141), "expected the SIGPIPE status");
    assert!(
        !String::from_utf8_lossy(&out.stderr).contains("panicked"),
        "broken pipe must not panic"
    );
}

#[test]
fn solver_reports_match_the_known_values() {
    let out = run(&["solve", "--n", "4", "--s", "3"]);
    assert!(out.status.success());
    let report = stdout(&out);
    assert!(report.contains("\"value\": 12"), "unexpected report: {report}");
    assert!(report.contains("\"optimal\": true"), "unexpected report: {report}");
}

#[test]
fn inequality_audit_emits_the_locked_csv_header() {
    let out = run(&["audit-inequalities", "--s", "3", "--m-max", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("id,s,m,k,holds,vacuous,margin"));
    // One row per bound per m, plus the header.
    assert_eq!(text.lines().count(), 1 + 14 * 5);
}

#[test]
fn sigma_files_relabel_the_configuration() {
    let sigma = temp_path("order.sigma");
    std::fs::write(&sigma, "2,3,4,5,6,7,1\n").unwrap();
    let out = run(&[
        "config",
        "--s",
        "3",
        "--m",
        "2",
        "--sigma",
        sigma.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.contains("\"sigma\": [\n    2,"),
        "order not echoed: {}",
        &text[..text.len().min(400)]
    );

    let out = run(&["audit-config", "--s", "3", "--m", "2", "--sigma", sigma.to_str().unwrap()]);
    assert!(out.status.success(), "relabelled configuration should verify");
    std::fs::remove_file(&sigma).ok();
}

#[test]
fn averaging_command_validates_a_witness() {
    let family = temp_path("avg.fam");
    let out = run(&[
        "construct",
        "--n",
        "7",
        "--s",
        "3",
        "--out",
        family.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&["average", "--family", family.to_str().unwrap(), "--s", "3", "--m", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"identity_holds\": true"));
    std::fs::remove_file(&family).ok();
}
