use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &[&str] = &[
    "--n-train", "48", "--n-test", "24", "--nn-dims", "8,4", "--seed", "3",
    "--set", "ris_rows=2", "--set", "ris_cols=4", "--set", "groups=2",
    "--set", "epochs=3", "--set", "fl_rounds=2", "--set", "fl_local_epochs=2",
    "--set", "cdf_points=9",
];

fn multiris(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiris")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = multiris(args);
    assert!(out.status.success(), "{args:?}\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn with_out<'a>(cmd: &'a str, dir: &'a Path, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd, "--out", dir.to_str().unwrap()];
    v.extend_from_slice(extra);
    v
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(name).display()))
}

#[test]
fn staged_pipeline_matches_one_shot_run() {
    let tmp = tempfile::tempdir().unwrap();
    let (staged, direct) = (tmp.path().join("staged"), tmp.path().join("direct"));

    run_ok(&with_out("gen-data", &staged, SMALL));
    assert!(staged.join("train.real").exists() && staged.join("test.real").exists());
    run_ok(&with_out("label", &staged, &[]));
    assert!(staged.join("train_pos_ind_3.ds").exists());
    run_ok(&with_out("train", &staged, &[]));
    assert!(staged.join("model_chan_fl_3.pred").exists());
    let table = run_ok(&with_out("eval", &staged, &[]));
    assert!(table.contains("exhaustive") && table.contains("chan_fl"));

    run_ok(&with_out("run-setup", &direct, SMALL));
    for f in ["summary.csv", "rates.csv", "ratios.csv", "cdf.csv", "manifest.txt"] {
        assert_eq!(read(&staged, f), read(&direct, f), "{f}");
    }

    let summary = read(&direct, "summary.csv");
    assert_eq!(summary.lines().count(), 10);
    assert!(summary.lines().any(|l| l.starts_with("exhaustive,") && l.split(',').nth(2) == Some("1.0")));
    assert!(read(&direct, "loss.csv").lines().count() > 1);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = [SMALL, &["--setup", "3", "--approach", "random,chan_cen"]].concat();
    run_ok(&with_out("run-setup", &a, &args));
    run_ok(&with_out("run-setup", &b, &["--config", a.join("config.txt").to_str().unwrap(), "--approach", "random,chan_cen"]));
    for f in ["summary.csv", "rates.csv", "ratios.csv", "cdf.csv", "loss.csv", "manifest.txt"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    let summary = read(&a, "summary.csv");
    let approaches: Vec<&str> = summary.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(approaches, ["exhaustive", "random", "no_ris", "chan_cen"]);
    assert!(read(&a, "config.txt").contains("wall=true"));
}

#[test]
fn report_reads_result_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("r");
    run_ok(&with_out("run-setup", &dir, &[SMALL, &["--approach", "random"]].concat()));
    let table = run_ok(&["report", "--out", dir.to_str().unwrap(), "--cdf-points", "5"]);
    assert!(table.lines().any(|l| l.starts_with("exhaustive") && l.contains("1.0000")));
    assert_eq!(read(&dir, "cdf_5.csv").lines().count(), 6);
}

#[test]
fn bad_configs_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.txt");
    fs::write(&cfg, "seed=1\ncolour=blue\n").unwrap();
    let out = multiris(&["run-setup", "--out", tmp.path().to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let out = multiris(&["run-setup", "--out", tmp.path().to_str().unwrap(), "--setup", "custom"]);
    assert!(!out.status.success());
    let out = multiris(&["run-setup", "--out", tmp.path().to_str().unwrap(), "--approach", "magic"]);
    assert!(!out.status.success());
}

#[test]
fn stages_need_their_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = multiris(&with_out("label", tmp.path(), &[]));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("train.real"));
}
