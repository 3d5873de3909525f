use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scsim(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scsim"))
        .args(args)
        .env("SCSIM_OUT_DIR", out)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn lemma_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = scsim(dir.path(), &["verify-lemma1", "--n", "3..8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("lemma1.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# scsim verify-lemma1 seed=0x"));
    assert!(lines.next().unwrap().starts_with("N,X,"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), (3..=8).map(|n| 1usize << n).sum::<usize>());
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn corrupted_mask_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = scsim(dir.path(), &["verify-lemma1", "--n", "4", "--corrupt-mask", "0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn apc_exhaustive_and_fault() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&scsim(dir.path(), &["apc-check", "--inputs", "15"])), 0);
    let o = scsim(dir.path(), &["apc-check", "--inputs", "15", "--inject-fault", "0"]);
    assert_eq!(code(&o), 1);
    let csv = fs::read_to_string(dir.path().join("apc_check.csv")).unwrap();
    assert!(csv.contains("15,exhaustive,32768,"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&scsim(dir.path(), &["infer", "--pcc", "bogus", "--limit", "1"])), 2);
    assert_eq!(code(&scsim(dir.path(), &["verify-lemma1", "--n", "2"])), 2);
    assert_eq!(code(&scsim(dir.path(), &["apc-check", "--inputs", "25", "--inject-fault", "999"])), 2);
    assert_eq!(code(&scsim(dir.path(), &["infer", "--model", "/nonexistent.json"])), 2);
    assert_eq!(code(&scsim(dir.path(), &["no-such-command"])), 2);
}

#[test]
fn reruns_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["infer", "--limit", "20", "--k", "32"];
    assert_eq!(code(&scsim(a.path(), &args)), 0);
    assert_eq!(code(&scsim(b.path(), &args)), 0);
    let ra = fs::read(a.path().join("infer.csv")).unwrap();
    let rb = fs::read(b.path().join("infer.csv")).unwrap();
    assert_eq!(ra, rb);

    for d in [&a, &b] {
        assert_eq!(code(&scsim(d.path(), &["arch-report", "--channels", "1-12"])), 0);
    }
    assert_eq!(fs::read(a.path().join("arch_sweep.csv")).unwrap(), fs::read(b.path().join("arch_sweep.csv")).unwrap());
}

#[test]
fn seed_changes_sc_rows() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["infer", "--limit", "20", "--k", "8"];
    scsim(a.path(), &args);
    let mut with_seed = args.to_vec();
    with_seed.extend(["--seed", "7"]);
    scsim(b.path(), &with_seed);
    let ha = fs::read_to_string(a.path().join("infer.csv")).unwrap();
    let hb = fs::read_to_string(b.path().join("infer.csv")).unwrap();
    assert!(hb.starts_with("# scsim infer seed=0x7 "));
    assert_ne!(ha, hb);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("from-config");
    fs::write(&cfg, format!(r#"{{"n_range": "3..5", "tol": null, "out_dir": {:?}}}"#, out)).unwrap();
    // unknown keys are rejected
    let o = Command::new(env!("CARGO_BIN_EXE_scsim"))
        .args(["--config", cfg.to_str().unwrap(), "verify-lemma1"])
        .env_remove("SCSIM_OUT_DIR")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);

    fs::write(&cfg, format!(r#"{{"n_range": "3..5", "out_dir": {:?}}}"#, out)).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_scsim"))
        .args(["--config", cfg.to_str().unwrap(), "verify-lemma1"])
        .env_remove("SCSIM_OUT_DIR")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(out.join("lemma1.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 8 + 16 + 32);

    let flag_out = dir.path().join("from-flag");
    let o = Command::new(env!("CARGO_BIN_EXE_scsim"))
        .args(["--config", cfg.to_str().unwrap(), "--out-dir", flag_out.to_str().unwrap(), "verify-lemma1", "--n", "3"])
        .env_remove("SCSIM_OUT_DIR")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(flag_out.join("lemma1.csv")).unwrap().lines().count(), 2 + 8);
}

#[test]
fn curves_and_sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&scsim(dir.path(), &["pcc-curves", "--n", "3..4"])), 0);
    let csv = fs::read_to_string(dir.path().join("pcc_curves.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 3 * (8 + 16));
    assert!(fs::read_to_string(dir.path().join("pcc_curves.svg")).unwrap().starts_with("<svg"));

    let o = scsim(dir.path(), &["sweep", "--limit", "10", "--k-values", "8,16", "--n-bits-values", "4,8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    // header comment, column header, then baseline + two k rows per precision
    assert_eq!(csv.lines().count(), 2 + 2 * 3);
}

#[test]
fn arch_report_properties_hold() {
    let dir = tempfile::tempdir().unwrap();
    let o = scsim(dir.path(), &["arch-report"]);
    assert_eq!(code(&o), 0);
    let summary = fs::read_to_string(dir.path().join("arch_summary.csv")).unwrap();
    assert!(summary.contains("argmin_edap,FinFET-10nm,8,true"));
    let sweep = fs::read_to_string(dir.path().join("arch_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 2 + 2 * 32);
}

#[test]
fn config_polynomials_are_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let base = ["--config", cfg.to_str().unwrap(), "infer", "--limit", "5", "--k", "16", "--source", "lfsr"];
    fs::write(&cfg, r#"{"lfsr_taps": {"8": [8, 6, 5, 4]}}"#).unwrap();
    assert_eq!(code(&scsim(dir.path(), &base)), 0);
    fs::write(&cfg, r#"{"lfsr_taps": {"8": [8, 1]}}"#).unwrap();
    let o = scsim(dir.path(), &base);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("period"));
}
