use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn c2st(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_c2st"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn toy_args(out: &str) -> Vec<&str> {
    vec![
        "toy", "--mode", "shift", "--grid", "-1,0,1", "--trials", "10", "--seeds", "1", "--n-q",
        "40", "--out", out,
    ]
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&c2st(&["--help"])), 0);
    assert_eq!(code(&c2st(&["--version"])), 0);
    assert_eq!(code(&c2st(&["run", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&c2st(&[])), 1);
    assert_eq!(code(&c2st(&["frobnicate"])), 1);
    assert_eq!(code(&c2st(&["run", "--bogus"])), 1);
    assert_eq!(code(&c2st(&["run", "--task", "banana"])), 1);
    assert_eq!(code(&c2st(&["run", "--trials", "many"])), 1);
    assert_eq!(code(&c2st(&["run", "--alpha", "2"])), 1);
    assert_eq!(code(&c2st(&["toy", "--mode", "sideways"])), 1);
    assert_eq!(
        code(&c2st(&["run", "--config", "/nonexistent/settings.conf"])),
        1
    );
}

#[test]
fn toy_run_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = c2st(&toy_args(d.to_str().unwrap()));
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["results.csv", "power.svg", "metadata.txt"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let csv = fs::read_to_string(a.join("results.csv")).unwrap();
    // three shifts × (uniform(10), c2st)
    assert_eq!(csv.lines().count(), 1 + 6);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("toy,")));
    assert!(fs::read_to_string(a.join("power.svg"))
        .unwrap()
        .contains("alpha-ref"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("toy.conf");
    fs::write(
        &conf,
        "# quick\ntrials = 3\nalpha = 0.1\nn-q = 30\nseeds = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = c2st(&[
        "toy",
        "--mode",
        "rotate",
        "--grid",
        "0,pi/2",
        "--config",
        conf.to_str().unwrap(),
        "--trials",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let meta = fs::read_to_string(out.join("metadata.txt")).unwrap();
    assert!(meta.contains("trials = 5"), "{meta}");
    assert!(meta.contains("alpha = 0.1"), "{meta}");
    assert!(meta.contains("mode = rotate"), "{meta}");
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(6) == Some("5")));
}

#[test]
fn runtime_failure_exits_two_and_keeps_finished_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("partial");
    // the mixture weight 1.5 is only rejected when its cell is reached
    let o = c2st(&[
        "run",
        "--task",
        "extra_mode",
        "--gamma",
        "0,1.5",
        "--methods",
        "sbc",
        "--trials",
        "2",
        "--seeds",
        "1",
        "--n-q",
        "20",
        "--draws",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("extra_mode,0,"));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    fs::write(&file, "x").unwrap();
    let o = c2st(&toy_args(file.to_str().unwrap()));
    assert_eq!(code(&o), 2);
}

#[test]
fn selftest_passes() {
    let o = c2st(&["selftest"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().count() >= 5 && text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn diagnose_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = c2st(&[
        "diagnose",
        "--task",
        "mean_shift",
        "--gamma",
        "0,0.5",
        "--m",
        "20",
        "--n",
        "500",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("task,gamma,m,n,mean_u"));
    let o = c2st(&[
        "diagnose",
        "--n",
        "200",
        "--m",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(Path::new(&dir.path().join("diagnostics.csv")).exists());
    assert_eq!(code(&c2st(&["diagnose", "--n", "1"])), 1);
}
