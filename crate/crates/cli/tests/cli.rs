use std::process::Command;

use ancss_cli::output::{collect_rows, write_csv, HEADER};
use ancss_cli::run::verify;
use ancss_cli::{emit_csv, parse_config, run, Args, BpskPoint, ConfigError, Mode, RunConfig};
use ancss_core::{AnalyticPoint, BerPoint};
use clap::Parser;

fn args(list: &[&str]) -> Args {
    Args::try_parse_from(std::iter::once("ancss").chain(list.iter().copied())).unwrap()
}

fn small(out: std::path::PathBuf, mode: Mode) -> RunConfig {
    RunConfig {
        users: vec![2],
        beta: vec![100],
        ebn0_db: vec![0.0, 3.0, 6.0],
        max_trials: 200_000,
        mode,
        out,
        ..RunConfig::default()
    }
}

#[test]
fn odd_user_count_is_rejected() {
    let err = parse_config(&args(&["--L", "3"])).unwrap_err();
    assert!(matches!(err, ConfigError::OddUsers(3)));
    assert!(err.to_string().contains("L must be even"));
}

#[test]
fn distinct_diagnostics() {
    let e = parse_config(&args(&["--min-errors", "500", "--max-trials", "100"])).unwrap_err();
    assert!(matches!(e, ConfigError::ErrorsExceedTrials { .. }));
    let e = parse_config(&args(&["--ebn0", "4:1:2"])).unwrap_err();
    assert!(matches!(e, ConfigError::EmptyGrid(_)));
    let e = parse_config(&args(&["--mode", "plot"])).unwrap_err();
    assert!(matches!(e, ConfigError::BadValue { .. }));
}

#[test]
fn flags_build_the_grid() {
    let c = parse_config(&args(&["--beta", "100", "--L", "2,4", "--ebn0", "0:2:20"])).unwrap();
    assert_eq!(c.ebn0_db.len(), 11);
    assert_eq!(c.users, vec![2, 4]);
    assert_eq!(c.beta, vec![100]);
    assert_eq!(c.sweep().points().len(), 22);
}

#[test]
fn defaults_without_config() {
    let c = parse_config(&args(&[])).unwrap();
    assert_eq!(c, RunConfig::default());
    assert_eq!(c.users, vec![2, 4, 8]);
    assert_eq!(c.beta, vec![100, 200]);
    assert_eq!(c.ebn0_db, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0]);
    assert_eq!((c.seed, c.min_errors, c.max_trials), (42, 200, 100_000_000));
    assert_eq!(c.mode, Mode::Both);
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(
        &path,
        "# test sweep\nL = 4\nbeta = 50\nseed = 7\nper-bit-energy = false\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let c = parse_config(&args(&["--config", p, "--beta", "200"])).unwrap();
    assert_eq!(c.users, vec![4]);
    assert_eq!(c.beta, vec![200]);
    assert_eq!(c.seed, 7);
    assert!(!c.per_bit_energy);
    let c = parse_config(&args(&["--config", p, "--per-bit-energy"])).unwrap();
    assert!(c.per_bit_energy);
    let missing = parse_config(&args(&["--config", "/nonexistent/run.conf"])).unwrap_err();
    assert!(missing.to_string().contains("/nonexistent/run.conf"));
}

#[test]
fn empty_inputs_give_a_header_only_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    emit_csv(&[], &[], &[], &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        format!("{}\n", HEADER.join(","))
    );
}

#[test]
fn io_errors_name_the_path() {
    let err = emit_csv(&[], &[], &[], std::path::Path::new("/nonexistent/dir/out.csv")).unwrap_err();
    assert!(format!("{err:#}").contains("/nonexistent/dir/out.csv"));
}

#[test]
fn one_row_of_each_kind_in_order() {
    let a = AnalyticPoint {
        ebn0_db: 10.0,
        users: 2,
        beta: 100,
        sigma2: 1000.0,
        ber: 0.0011740516939,
    };
    let s = BerPoint {
        ebn0_db: 10.0,
        users: 2,
        beta: 100,
        trials: 160_000,
        errors: 208,
        ber_hat: 208.0 / 160_000.0,
        ci95_halfwidth: 1.96 * (0.0013 * 0.9987 / 160_000.0f64).sqrt(),
        zero_error: false,
    };
    let b = BpskPoint {
        ebn0_db: 10.0,
        ber: 3.872e-6,
    };
    let mut buf = Vec::new();
    write_csv(&collect_rows(&[a], &[b], &[s]), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], "analytic,10,2,100,1.174051694e-3,,,");
    assert!(lines[2].starts_with("simulated,10,2,100,1.300000000e-3,"));
    assert!(lines[2].ends_with(",160000,208"));
    assert_eq!(lines[3], "bpsk,10,,,3.872000000e-6,,,");
}

#[test]
fn csv_round_trips_to_printed_precision() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(dir.path().join("rt.csv"), Mode::Both);
    run(&config).unwrap();
    let mut reader = csv::Reader::from_path(&config.out).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), HEADER);
    let mut kinds = Vec::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let ber: f64 = rec[4].parse().unwrap();
        kinds.push(rec[0].to_string());
        if &rec[0] == "simulated" {
            let trials: u64 = rec[6].parse().unwrap();
            let errors: u64 = rec[7].parse().unwrap();
            let exact = errors as f64 / trials as f64;
            assert!((ber - exact).abs() <= 5e-10 * exact.max(f64::MIN_POSITIVE));
        } else {
            assert!(rec[5].is_empty() && rec[6].is_empty() && rec[7].is_empty());
        }
    }
    let expected: Vec<&str> = ["analytic"; 3]
        .into_iter()
        .chain(["simulated"; 3])
        .chain(["bpsk"; 3])
        .collect();
    assert_eq!(kinds, expected);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(config.manifest_path()).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["rows"].as_array().unwrap().len(), 9);
    assert_eq!(manifest["rows"][3]["source"], "simulated: monte carlo");
}

#[test]
fn modes_select_rows() {
    let dir = tempfile::tempdir().unwrap();
    let analytic = run(&small(dir.path().join("a.csv"), Mode::Analytic)).unwrap();
    assert_eq!(analytic.rows_written, 6);
    let sim = run(&small(dir.path().join("s.csv"), Mode::Simulate)).unwrap();
    assert_eq!(sim.rows_written, 3);
    assert!(sim.report.is_none());
}

#[test]
fn verify_passes_on_a_small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let report = verify(&small(dir.path().join("v.csv"), Mode::Verify)).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.checked(), 3);
    assert!(report.passed(), "{}", report.table());
}

#[test]
fn doubled_variance_fails_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        variance_scale: 2.0,
        ..small(dir.path().join("v.csv"), Mode::Verify)
    };
    let report = verify(&config).unwrap();
    assert!(!report.passed());
}

#[test]
fn zero_error_points_are_not_gated() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        ebn0_db: vec![40.0],
        max_trials: 20_000,
        ..small(dir.path().join("z.csv"), Mode::Verify)
    };
    let report = verify(&config).unwrap();
    assert_eq!(report.rows[0].point.errors, 0);
    assert_eq!(report.checked(), 0);
    assert!(report.passed());
}

fn ancss(list: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ancss")).args(list).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let out = out.to_str().unwrap();
    let base = [
        "--L",
        "2",
        "--beta",
        "100",
        "--ebn0",
        "0:3:6",
        "--max-trials",
        "200000",
        "--out",
        out,
    ];

    let bad = ancss(&["--L", "3"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("L must be even"));

    let ok = ancss(&[&base[..], &["--mode", "verify"]].concat());
    assert_eq!(ok.status.code(), Some(0));
    let table = String::from_utf8_lossy(&ok.stdout);
    assert!(table.contains("pass") && table.contains("0 failed"), "{table}");

    let corrupted = ancss(&[&base[..], &["--mode", "verify", "--variance-scale", "2"]].concat());
    assert_eq!(corrupted.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&corrupted.stdout).contains("FAIL"));
}
