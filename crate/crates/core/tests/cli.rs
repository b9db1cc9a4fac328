//! The `lab` binary: outputs, exit codes and reproducibility.

use std::fs;
use std::path::Path;
use std::process::Command;

const RATE: &str = "# small 1-D rate run\nn_grid = 2^5..2^10\nreplicates = 20\ninput = uniform\n";

fn lab(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn successful_run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "rate.txt", RATE);
    let out = dir.path().join("out");
    let (code, text) = lab(&[
        "rate-w1",
        "--config",
        &cfg,
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{text}");
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(results.starts_with("experiment,n,replicate,metric,value\n"));
    assert_eq!(results.lines().filter(|l| l.contains(",w1,")).count(), 6 * 20);
    assert!(fs::read_to_string(out.join("fit.csv")).unwrap().contains("slope"));
    let meta = fs::read_to_string(out.join("meta.txt")).unwrap();
    assert!(meta.contains("seed") && meta.contains("11") && meta.contains("replicates = 20"));
}

#[test]
fn failed_check_exits_two_and_bad_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let wrong = write_config(dir.path(), "wrong.txt", &format!("{RATE}expected_slope = 1.0\n"));
    let (code, text) = lab(&["rate-w1", "--config", &wrong, "--out", out]);
    assert_eq!(code, 2, "{text}");
    assert!(text.contains("FAIL"));

    let unknown = write_config(dir.path(), "unknown.txt", &format!("{RATE}colour = blue\n"));
    let (code, text) = lab(&["rate-w1", "--config", &unknown, "--out", out]);
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("colour"));

    let (code, _) = lab(&["rate-w1", "--config", "/nonexistent/config.txt", "--out", out]);
    assert_eq!(code, 1);
}

#[test]
fn reruns_are_byte_identical_and_seeds_matter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "rate.txt", RATE);
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let (code, text) = lab(&[
            "rate-w1",
            "--config",
            &cfg,
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{text}");
        fs::read(out.join("results.csv")).unwrap()
    };
    let (a, b, c) = (run("5", "a"), run("5", "b"), run("6", "c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn report_refits_an_existing_results_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "rate.txt", RATE);
    let run_dir = dir.path().join("run");
    let (code, text) = lab(&["rate-w1", "--config", &cfg, "--out", run_dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    let results = run_dir.join("results.csv");
    let rep = write_config(dir.path(), "report.txt", &format!("results = {}\n", results.display()));
    let rep_dir = dir.path().join("report");
    let (code, text) = lab(&["report", "--config", &rep, "--out", rep_dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    let fit = fs::read_to_string(rep_dir.join("fit.csv")).unwrap();
    assert!(fit.lines().any(|l| l.starts_with("rate-w1:w1,")), "{fit}");
}
