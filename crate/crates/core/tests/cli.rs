use std::fs;
use std::process::Command;

use gmt_rect::harness::ExperimentReport;

fn gmt_rect() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gmt-rect"))
}

fn read_report(path: &std::path::Path) -> ExperimentReport {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn list_names_every_experiment() {
    let out = gmt_rect().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().all(|l| l.starts_with('E')));
}

#[test]
fn unknown_id_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gmt_rect()
        .args(["run", "E10_nothing", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn same_seed_same_report() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let st = gmt_rect()
            .args([
                "run",
                "E2_diameter",
                "E3_si_majority",
                "--parallel",
                "--seed",
                "11",
                "--out",
            ])
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(st.status.success());
    }
    for id in ["E2_diameter", "E3_si_majority"] {
        let ra = read_report(&a.path().join(id).join("report.json"));
        let rb = read_report(&b.path().join(id).join("report.json"));
        assert_eq!(ra.config.seed, 11);
        assert_eq!(ra.canonical_json().unwrap(), rb.canonical_json().unwrap());
        for f in ["metrics.csv", "manifest.json"] {
            assert_eq!(
                fs::read(a.path().join(id).join(f)).unwrap(),
                fs::read(b.path().join(id).join(f)).unwrap()
            );
        }
    }
}

#[test]
fn failed_assertion_exits_nonzero_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    fs::write(&cfg, "[E9_straightening]\nresidual_max = 1e-30\n").unwrap();
    let out = gmt_rect()
        .args(["run", "E9_straightening", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let report = read_report(&dir.path().join("E9_straightening").join("report.json"));
    assert!(!report.passed());
    assert!(report.verdicts.iter().all(|v| !v.pass));
}
