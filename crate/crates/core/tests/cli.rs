//! End-to-end runs of the `progrand` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn progrand(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_progrand"));
    cmd.args(args).env_remove("PROGRAND_OUT_DIR");
    if let Some(dir) = out_dir {
        cmd.arg("--out-dir").arg(dir);
    }
    cmd.output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn err(out: &Output) -> String {
    assert!(!out.status.success(), "expected failure");
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn three_stream_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{
  "polynomial": "x^32+x^22+x^2+x+1",
  "seed": 12345,
  "m": 8,
  "streams": [
    [[1,2,4],[1,2,5],[1,2,6],[1,2,7],[1,2,8],[1,2,9],[1,2,10],[1,2,11]],
    [[1,2,12],[1,2,13],[1,2,14],[1,2,15],[1,2,16],[1,2,17],[1,2,18],[1,2,19]],
    [[1,3,4],[1,3,5],[1,3,6],[1,3,7],[1,3,8],[1,3,9],[1,3,10],[1,3,11]]
  ],
  "schedule": {"type": "fixed", "value": 127}
}"#,
    )
    .unwrap();
    path
}

#[test]
fn check_poly_reports_period() {
    let stdout = ok(&progrand(&["check-poly", "x^3+x^2+1"], None));
    assert!(stdout.contains("primitive:   true"));
    assert!(stdout.contains("period:      7"));
    let stdout = ok(&progrand(&["check-poly", "x^4+x^2+1"], None));
    assert!(stdout.contains("irreducible: false"));
    assert!(stdout.contains("period:      6"));
    let e = err(&progrand(&["check-poly", "x^3+x^2"], None));
    assert!(e.starts_with("error:"));
}

#[test]
fn capacity_prints_count() {
    assert_eq!(
        ok(&progrand(&["capacity", "32", "3", "8"], None)).trim(),
        "58"
    );
    let dir = tempfile::tempdir().unwrap();
    ok(&progrand(&["capacity", "32", "3", "8"], Some(dir.path())));
    assert!(dir.path().join("capacity.json").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn generate_packed_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = three_stream_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&progrand(
            &[
                "generate",
                "--config",
                config.to_str().unwrap(),
                "-N",
                "1000000",
            ],
            Some(out),
        ));
    }
    for i in 0..3 {
        let name = format!("stream_{i}.bin");
        let first = fs::read(a.join(&name)).unwrap();
        assert_eq!(first.len(), 125_000);
        assert_eq!(first, fs::read(b.join(&name)).unwrap());
    }
    assert_eq!(
        fs::read(a.join("manifest.json")).unwrap(),
        fs::read(b.join("manifest.json")).unwrap()
    );
}

#[test]
fn generate_ascii_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    ok(&progrand(
        &[
            "generate",
            "-N",
            "500",
            "--format",
            "ascii",
            "--threshold",
            "64",
            "--seed",
            "99",
        ],
        Some(&first),
    ));
    let text = fs::read_to_string(first.join("stream_0.txt")).unwrap();
    assert_eq!(text.lines().count(), 500);
    assert!(text.lines().all(|l| l == "0" || l == "1"));

    let second = dir.path().join("second");
    let manifest = first.join("manifest.json");
    ok(&progrand(
        &["replay", manifest.to_str().unwrap()],
        Some(&second),
    ));
    let mut names: Vec<_> = fs::read_dir(&first)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 6);
    for name in names {
        assert_eq!(
            fs::read(first.join(&name)).unwrap(),
            fs::read(second.join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn shift_equivalent_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"polynomial":"x^32+x^22+x^2+x+1","m":2,
            "streams":[[[1,4],[2,3]],[[5,8],[1,3]]],
            "schedule":{"type":"fixed","value":1}}"#,
    )
    .unwrap();
    let e = err(&progrand(
        &["generate", "--config", path.to_str().unwrap()],
        Some(dir.path()),
    ));
    assert!(e.contains("{1,4}") && e.contains("{5,8}"), "{e}");
    assert!(!dir.path().join("stream_0.bin").exists());
}

#[test]
fn sweep_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&progrand(
        &["sweep", "-N", "20000", "--threshold", "0,127,255"],
        Some(dir.path()),
    ));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(stdout.starts_with(&csv));
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][2], 0.5);
    assert_eq!(rows[2][1], 0.0);
    assert!((rows[0][1] - rows[0][2]).abs() < 0.02);

    let e = err(&progrand(&["sweep", "--threshold", ""], Some(dir.path())));
    assert!(!e.is_empty());
    assert_eq!(
        progrand(&["sweep"], Some(dir.path())).status.code(),
        Some(2)
    );
    let e = err(&progrand(
        &["sweep", "--threshold", "256"],
        Some(dir.path()),
    ));
    assert!(e.contains("256"), "{e}");
}

#[test]
fn dynamic_fit_and_saturated_start() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&progrand(&["dynamic"], Some(dir.path())));
    assert!(stdout.contains("fit over steps 0..=255"), "{stdout}");
    let fit: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["ones_after_window"], 0);
    assert!(fit["fit"]["c2"].as_f64().unwrap() < 0.0);
    assert!(fit["fit"]["c1"].as_f64().unwrap() > 0.0);
    let csv = fs::read_to_string(dir.path().join("cumulative.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2049);

    let e = err(&progrand(
        &["dynamic", "--threshold", "255"],
        Some(dir.path()),
    ));
    assert!(e.contains("no ones"), "{e}");
}

#[test]
fn correlate_identical_files_peak_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    ok(&progrand(&["generate", "-N", "4000"], Some(&gen)));
    let s0 = gen.join("stream_0.bin");
    let s1 = gen.join("stream_1.bin");
    let out = dir.path().join("corr");
    let stdout = ok(&progrand(
        &[
            "correlate",
            s0.to_str().unwrap(),
            s0.to_str().unwrap(),
            s1.to_str().unwrap(),
            "--max-lag",
            "50",
        ],
        Some(&out),
    ));
    let first = stdout.lines().nth(1).unwrap();
    assert_eq!(first, "cross,0,1,0,1");
    for line in stdout
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("cross,0,2") || l.starts_with("auto"))
    {
        let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(v.abs() < 0.1, "{line}");
    }
    assert!(out.join("xcorr_0_2.csv").exists());
    assert!(out.join("acorr_2.csv").exists());
    assert_eq!(
        fs::read_to_string(out.join("xcorr_0_1.csv"))
            .unwrap()
            .lines()
            .count(),
        102
    );
}

#[test]
fn correlate_rejects_constant_file() {
    let dir = tempfile::tempdir().unwrap();
    let zeros = dir.path().join("zeros.bin");
    fs::write(&zeros, vec![0u8; 100]).unwrap();
    let e = err(&progrand(
        &["correlate", zeros.to_str().unwrap()],
        Some(dir.path()),
    ));
    assert!(
        e.contains("zeros.bin") && e.contains("zero variance"),
        "{e}"
    );
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_progrand"))
        .args(["generate", "-N", "64"])
        .env("PROGRAND_OUT_DIR", dir.path())
        .output()
        .unwrap();
    ok(&status);
    assert_eq!(fs::read(dir.path().join("stream_0.bin")).unwrap().len(), 8);
}
