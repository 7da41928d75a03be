use std::path::{Path, PathBuf};
use std::process::Command;

use metacloud::config::{Experiment, ExperimentConfig};
use metacloud::models::Setup;
use metacloud::{experiment, generate, report};
use metacloud_core::cloud::SampleCloud;
use metacloud_core::partition::Space;

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn small(experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        n: 20_000,
        svg: false,
        ..ExperimentConfig::default()
    }
}

#[test]
fn sampling_does_not_depend_on_thread_count() {
    let setup = Setup::new(&ExperimentConfig::default()).unwrap();
    let model = setup.standard().unwrap();
    let n = 3 * generate::CHUNK + 17;
    let one = generate::pool(1)
        .unwrap()
        .install(|| generate::sample(&model, n, 5))
        .unwrap();
    let four = generate::pool(4)
        .unwrap()
        .install(|| generate::sample(&model, n, 5))
        .unwrap();
    assert_eq!(one, four);
    assert_ne!(one, generate::sample(&model, n, 6).unwrap());
}

#[test]
fn runs_write_identical_csv_bytes() {
    for exp in [Experiment::Standard, Experiment::Thc2Cross, Experiment::Thmix] {
        let cfg = small(exp);
        let (a, b) = (scratch("rerun_a"), scratch("rerun_b"));
        let oa = experiment::run(&cfg, &a, 1).unwrap();
        experiment::run(&cfg, &b, 3).unwrap();
        assert!(!oa.gates.is_empty());
        for f in oa.files.iter().filter(|f| f.extension().is_some_and(|e| e == "csv")) {
            let name = f.file_name().unwrap();
            assert_eq!(
                std::fs::read(a.join(name)).unwrap(),
                std::fs::read(b.join(name)).unwrap(),
                "{exp:?} {name:?}"
            );
        }
    }
}

#[test]
fn onto_csv_has_one_row_per_eps() {
    let cfg = small(Experiment::Standard);
    let dir = scratch("onto_rows");
    experiment::run(&cfg, &dir, 1).unwrap();
    let text = std::fs::read_to_string(dir.join("onto_seed1.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(report::ONTO_HEADER));
    assert_eq!(lines.count(), cfg.eps.len());
    let manifest = std::fs::read_to_string(dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("experiment = \"standard\"") && manifest.contains("[[gates]]"));
}

#[test]
fn cloud_dump_round_trips() {
    let pts = vec![0.5, -1.25, 3.0, f64::MIN_POSITIVE, -0.0, 1e300];
    let cloud = SampleCloud::from_raw(pts.clone(), 2, 2.0, "x".into(), 1, Space::X).unwrap();
    let path = scratch("dump").join("c.bin");
    report::dump_cloud(&path, &cloud).unwrap();
    let (d, back) = report::read_dump(&path).unwrap();
    assert_eq!(d, 2);
    assert_eq!(back.len(), pts.len());
    assert_eq!(back.as_slice(), cloud.points());
    std::fs::write(&path, b"MCLOUD01short").unwrap();
    assert!(report::read_dump(&path).is_err());
}

#[test]
fn cli_reports_usage_and_gate_failures_by_exit_code() {
    let exe = env!("CARGO_BIN_EXE_metacloud");
    let out = Command::new(exe).arg("print-config").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let dir = scratch("cli");
    let cfg_path = dir.join("default.toml");
    std::fs::write(&cfg_path, &text).unwrap();
    assert_eq!(ExperimentConfig::load(&cfg_path).unwrap(), ExperimentConfig::default());

    std::fs::write(&cfg_path, "experiment = \"standard\"\nnope = 1\n").unwrap();
    let bad = Command::new(exe).arg("run").arg(&cfg_path).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("nope"));

    let bad_threads = Command::new(exe)
        .args(["selftest", "--only", "1"])
        .env("METACLOUD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(1));

    let quick = Command::new(exe)
        .args(["selftest", "--quick", "--only", "1,4", "--out"])
        .arg(dir.join("st"))
        .output()
        .unwrap();
    assert!(quick.status.success());
    let lines = String::from_utf8(quick.stdout).unwrap();
    assert_eq!(lines.lines().filter(|l| l.contains(" PASS ")).count(), 2);
    assert!(dir.join("st/criteria.csv").exists());
}
