use std::path::Path;
use std::process::{Command, Output};

fn basketsvm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_basketsvm"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

#[test]
fn gen_writes_the_canonical_stream() {
    let dir = tempfile::tempdir().unwrap();
    let out = basketsvm(&["gen", "Cross", "--seed", "3", "--n-total", "400", "--out", "cross.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("cross.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 400);
    let first: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(first.len(), 4);
    assert_eq!(first[0], "0");
    assert!(first[3] == "1" || first[3] == "-1");
    assert!(lines[399].starts_with("399,"));

    let again = basketsvm(&["gen", "cross", "--seed", "3", "--n-total", "400", "--out", "again.csv"], dir.path());
    assert!(again.status.success());
    assert_eq!(text, std::fs::read_to_string(dir.path().join("again.csv")).unwrap());
}

#[test]
fn gen_rejects_unknown_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let out = basketsvm(&["gen", "Spiral", "--out", "x.csv"], dir.path());
    assert!(!out.status.success());
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("small.plan"),
        "datasets = LinearShift, SEA3D\nseeds = 1, 2\nn_total = 1500\ncapacity = 50, 100\n\
         log10_c = 0, -1\nfolds = 3\nrepetitions = 1\nout = ignored\n",
    )
    .unwrap();
    let out = basketsvm(
        &["run", "small.plan", "--out", "res", "--workers", "2", "--seed-override", "7"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("8 runs"), "{stderr}");
    let results = dir.path().join("res").join("results.csv");
    let printed = String::from_utf8_lossy(&out.stdout);
    assert_eq!(Path::new(printed.trim()), Path::new("res").join("results.csv"));
    assert!(dir.path().join("res").join("summary.csv").exists());
    assert!(dir.path().join("res").join("trajectories.csv").exists());
    assert!(!dir.path().join("ignored").exists());

    let report = basketsvm(&["report", results.to_str().unwrap()], dir.path());
    assert!(report.status.success(), "{}", String::from_utf8_lossy(&report.stderr));
    let table = String::from_utf8_lossy(&report.stdout);
    let header = table.lines().next().unwrap();
    for col in ["DATASET", "ADD", "REM", "BAL", "KSV", "REL", "SIZE", "PERF", "SVM/PA"] {
        assert!(header.contains(col), "{header}");
    }
    assert!(table.contains("LinearShift") && table.contains("SEA3D"));
}

#[test]
fn run_reports_plan_errors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.plan"), "datasets = Cross\ncapacity = ten\n").unwrap();
    let out = basketsvm(&["run", "bad.plan"], dir.path());
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2") && stderr.contains("capacity"), "{stderr}");

    std::fs::write(dir.path().join("good.plan"), "datasets = Cross\n").unwrap();
    let out = basketsvm(&["run", "good.plan", "--workers", "0"], dir.path());
    assert!(!out.status.success());
}
