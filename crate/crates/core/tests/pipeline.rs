//! End-to-end pipeline tests through the external interfaces: TOML config
//! files, CLI subcommands, and the emitted artifact schemas.

use std::fs;
use std::path::Path;

use parmc::cli::main_with_args;

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("campaign.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_BAR: &str = r#"
    [campaign]
    n_mc = 64
    n_serial = 16
    n_workers = 2
    base_seed = 12

    [problem]
    kind = "bar"
    n_elements = 10
    t_final = 1e-3
    dt = 1e-5

    [prices]
    vm_hour_price = 0.10
"#;

#[test]
fn bar_campaign_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_BAR);
    let out = dir.path().join("out");
    let code = main_with_args([
        "parmc",
        "run",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    // moments.csv: header plus one row per time step
    let moments = fs::read_to_string(out.join("moments.csv")).unwrap();
    let mut lines = moments.lines();
    assert_eq!(lines.next().unwrap(), "channel_index,time,mean,std");
    assert_eq!(lines.count(), 101); // 100 steps + t = 0

    // samples.csv: one tracked sample per realization
    let samples = fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 65); // header + 64

    // report.json carries the reproducibility info
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["base_seed"], 12);
    assert_eq!(report["n_mc"], 64);
    assert_eq!(report["n_tasks"], 4);
    assert!(report["timing"]["total_ms"].as_f64().unwrap() > 0.0);
    assert!(report["storage_bytes"].as_u64().unwrap() > 0);
    assert!(report["estimated_cost"].as_f64().unwrap() >= 0.0);
}

#[test]
fn worker_override_does_not_change_moments() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_BAR);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for (out, workers) in [(&out_a, "1"), (&out_b, "5")] {
        let code = main_with_args([
            "parmc",
            "run",
            "--config",
            &config,
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(
        fs::read(out_a.join("moments.csv")).unwrap(),
        fs::read(out_b.join("moments.csv")).unwrap()
    );
    assert_eq!(
        fs::read(out_a.join("samples.csv")).unwrap(),
        fs::read(out_b.join("samples.csv")).unwrap()
    );
}

#[test]
fn seed_override_changes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_BAR);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for (out, seed) in [(&out_a, "1"), (&out_b, "2")] {
        let code = main_with_args([
            "parmc",
            "run",
            "--config",
            &config,
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    assert_ne!(
        fs::read(out_a.join("samples.csv")).unwrap(),
        fs::read(out_b.join("samples.csv")).unwrap()
    );
}

#[test]
fn convergence_subcommand_emits_residue_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
            [campaign]
            n_mc = 1024
            n_serial = 64
            n_workers = 2
            base_seed = 5

            [problem]
            kind = "toy_digit_square"
        "#,
    );
    let out = dir.path().join("study");
    let code = main_with_args([
        "parmc",
        "convergence",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--n-list",
        "1024,4096,16384",
    ]);
    assert_eq!(code, 0);
    assert!(out.join("n_1024/report.json").exists());
    assert!(out.join("n_16384/histogram.csv").exists());
    assert!(out.join("residue_1024_to_4096.json").exists());
    assert!(out.join("convergence.json").exists());

    let residue: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("residue_1024_to_4096.json")).unwrap())
            .unwrap();
    assert_eq!(residue["n_small"], 1024);
    assert_eq!(residue["n_large"], 4096);
    assert!(residue["pdf"]["residue"].as_f64().unwrap() >= 0.0);
}

#[test]
fn speedup_subcommand_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
            [campaign]
            n_mc = 512
            n_serial = 32
            base_seed = 6

            [problem]
            kind = "toy_digit_square"
            busy_work_iters = 1000
        "#,
    );
    let out = dir.path().join("study");
    let code = main_with_args([
        "parmc",
        "speedup",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--worker-list",
        "1,2",
        "--repetitions",
        "2",
    ]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(out.join("speedup_study.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "workers,total_ms,speedup");
    assert_eq!(lines.count(), 2);
}

#[test]
fn invalid_config_fails_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
            [campaign]
            n_mc = 100
            n_serial = 33

            [problem]
            kind = "toy_digit_square"
        "#,
    );
    assert_eq!(main_with_args(["parmc", "run", "--config", &config]), 1);
}
