use std::path::Path;
use std::process::Command;

fn eppm(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_eppm")).args(args).output().unwrap()
}

fn read_csvs(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn exit_codes() {
    assert_eq!(eppm(&["codegen", "--code", "7,3,1"]).status.code(), Some(0));
    assert_eq!(eppm(&["codegen", "--code", "7,3,2"]).status.code(), Some(2));
    assert_eq!(eppm(&["validate-code", "--code", "7,3,1", "--base", "0,1,2"]).status.code(), Some(2));
    assert_eq!(eppm(&["ber-sweep", "--set", "trials=10"]).status.code(), Some(2));
    assert_eq!(eppm(&["reproduce", "fig5"]).status.code(), Some(2));

    let out = eppm(&["codegen", "--code", "109,28,7", "--max-nodes", "500"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("# missing 109 28 7"));
}

#[test]
fn exhausted_interleaver_search_still_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = eppm(&[
        "optimize-interleaver",
        "--code",
        "11,5,2",
        "--max-nodes",
        "50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let json = std::fs::read_to_string(dir.path().join("interleaver.json")).unwrap();
    assert!(json.contains("\"budget_exhausted\": true"));
    assert!(dir.path().join("permutation.txt").exists());
}

#[test]
fn sweep_csv_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ppm.csv");
    let out = eppm(&[
        "ber-sweep",
        "--set",
        r#"scheme={"kind":"ppm","order":4}"#,
        "--set",
        "photon.p0=1.5e-8",
        "--trials",
        "5000",
        "--seed",
        "4",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], eppm::harness::CSV_HEADER);
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("ber,"));
}

#[test]
fn reproduce_is_independent_of_worker_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "4")] {
        let out = eppm(&[
            "reproduce",
            "fig8",
            "--effort",
            "0.002",
            "--seed",
            "5",
            "--workers",
            workers,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (x, y) = (read_csvs(a.path()), read_csvs(b.path()));
    assert_eq!(x.len(), 2);
    assert_eq!(x, y);
}
