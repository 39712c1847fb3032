use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hhqec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hhqec"))
        .args(args)
        .output()
        .expect("spawn hhqec")
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|_| panic!("missing {}", p.display()))
}

#[test]
fn layout_json_and_exit_codes() {
    let out = hhqec(&["layout", "--d", "3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["qubits"].as_array().unwrap().len(), 25);

    assert_eq!(hhqec(&["layout", "--d", "4"]).status.code(), Some(2));
    assert_eq!(hhqec(&["layout", "--d", "-1"]).status.code(), Some(2));
    assert_eq!(hhqec(&["no-such-command"]).status.code(), Some(2));

    let dir = tmp("layout_svg");
    let svg = dir.join("l.svg");
    assert!(hhqec(&["layout", "--d", "5", "--svg", svg.to_str().unwrap()])
        .status
        .success());
    let text = read(&svg);
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
}

#[test]
fn noiseless_z_injection_gives_plus_one_outcomes() {
    let dir = tmp("inject_z");
    let out = hhqec(&[
        "inject",
        "--theta",
        "0",
        "--basis",
        "Z",
        "--shots",
        "500",
        "--seed",
        "1",
        "--per-shot",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.join("outcomes_Z.csv"));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 500);
    assert!(rows.iter().all(|r| r.ends_with(",1,+1")));
}

#[test]
fn magic_h_noiseless_passes_threshold() {
    let dir = tmp("magic_h");
    let out = hhqec(&[
        "inject",
        "--magic",
        "H",
        "--shots",
        "2000",
        "--seed",
        "3",
        "--resamples",
        "50",
        "--reference-rows",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&read(&dir.join("magic_report.json"))).unwrap();
    let e = &v["entries"][0];
    assert_eq!(e["name"], "H");
    assert_eq!(e["above_threshold"], true);
    assert!((e["fidelity"]["value"].as_f64().unwrap() - 1.0).abs() < 6.0 / 2000f64.sqrt());
    assert!(!v["reference"].as_array().unwrap().is_empty());
    // --magic and explicit angles are contradictory.
    assert_eq!(
        hhqec(&["inject", "--magic", "T", "--theta", "1", "--seed", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn grid_emits_81_by_3_rows() {
    let dir = tmp("grid");
    let out = hhqec(&[
        "inject-grid",
        "--shots",
        "50",
        "--seed",
        "2",
        "--resamples",
        "10",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(&dir.join("grid.csv")).lines().count(), 1 + 81 * 3);
    assert_eq!(read(&dir.join("fidelity.csv")).lines().count(), 1 + 81);
    assert!(read(&dir.join("acceptance.csv")).lines().count() > 1);
}

#[test]
fn sample_then_decode() {
    let dir = tmp("decode");
    let d = dir.to_str().unwrap();
    let run = |p: &str| {
        assert!(hhqec(&[
            "sample",
            "--d",
            "3",
            "--shots",
            "400",
            "--seed",
            "4",
            "--p",
            p,
            "--out-dir",
            d
        ])
        .status
        .success());
        let out = hhqec(&[
            "decode",
            "--dem",
            &format!("{d}/dem.json"),
            "--shots",
            &format!("{d}/shots.bin"),
            "--oracle",
            "--out-dir",
            d,
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap()
    };
    // Noiseless shots have empty syndromes and never fail.
    let v = run("0");
    assert_eq!(v["failures"], 0);
    let v = run("0.004");
    assert_eq!(v["shots"], 400);
    assert_eq!(v["oracle_discrepancies"], 0);

    // A d=5 DEM does not fit d=3 shots.
    let other = tmp("decode_other");
    let o = other.to_str().unwrap();
    assert!(hhqec(&[
        "sample",
        "--d",
        "5",
        "--shots",
        "10",
        "--seed",
        "1",
        "--p",
        "0.001",
        "--out-dir",
        o
    ])
    .status
    .success());
    let out = hhqec(&[
        "decode",
        "--dem",
        &format!("{o}/dem.json"),
        "--shots",
        &format!("{d}/shots.bin"),
        "--out-dir",
        d,
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn csv_and_binary_shots_decode_identically() {
    let dir = tmp("formats");
    let d = dir.to_str().unwrap();
    for fmt in ["bin", "csv"] {
        assert!(hhqec(&[
            "sample",
            "--d",
            "3",
            "--basis",
            "X",
            "--shots",
            "300",
            "--seed",
            "9",
            "--p",
            "0.005",
            "--format",
            fmt,
            "--out-dir",
            d
        ])
        .status
        .success());
    }
    let summary = |f: &str| {
        let out = hhqec(&[
            "decode",
            "--dem",
            &format!("{d}/dem.json"),
            "--shots",
            &format!("{d}/{f}"),
            "--out-dir",
            d,
        ]);
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(summary("shots.bin"), summary("shots.csv"));
}

#[test]
fn threshold_outputs_are_byte_identical_and_workers_do_not_matter() {
    let args = |dir: &str, workers: &str| {
        vec![
            "threshold".to_string(),
            "--d".into(),
            "3,5".into(),
            "--p-grid".into(),
            "0,0.004".into(),
            "--shots".into(),
            "500".into(),
            "--seed".into(),
            "7".into(),
            "--workers".into(),
            workers.into(),
            "--out-dir".into(),
            dir.into(),
        ]
    };
    let (a, b) = (tmp("thr_a"), tmp("thr_b"));
    for (dir, w) in [(&a, "1"), (&b, "3")] {
        let argv = args(dir.to_str().unwrap(), w);
        let out = hhqec(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["sweep.csv", "crossing.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    // Zero-noise rows never fail.
    for line in read(&a.join("sweep.csv")).lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols[3].parse::<f64>().unwrap() == 0.0 {
            assert_eq!(cols[6], "0");
        }
    }
}

#[test]
fn synthetic_threshold_recovers_crossing() {
    let dir = tmp("synthetic");
    let out = hhqec(&[
        "threshold",
        "--synthetic",
        "0.1,1.0,0.004",
        "--p-grid",
        "0.002,0.003,0.0035,0.0045,0.005,0.006",
        "--seed",
        "0",
        "--basis",
        "X",
        "--fit-p-max",
        "0.0035",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&read(&dir.join("crossing.json"))).unwrap();
    let p = v["crossings"][0]["p_th"].as_f64().unwrap();
    assert!((p - 0.004).abs() < 1e-9, "{p}");
    let a = v["fits"][0]["fit"]["a"].as_f64().unwrap();
    assert!((a - 1.0).abs() < 1e-6, "{a}");
}
