use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sacbound"))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, "n_modes = 8\ndt = 1e-3\nt_final = 0.02\nseed = 9\nsample_stride = 5\n").unwrap();
    path
}

#[test]
fn run_subcommand_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("out");
    let status = bin().arg("run").arg("--config").arg(&config).arg("--out").arg(&out).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(String::from_utf8_lossy(&status.stdout).contains("Km="));
    assert!(out.join("timeseries.csv").is_file());
    assert!(out.join("summary.json").is_file());
}

#[test]
fn batch_subcommand_writes_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("batch");
    let status = bin()
        .args(["batch", "--seeds", "3", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    let agg: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("aggregate.json")).unwrap()).unwrap();
    assert_eq!(agg["runs"].as_array().unwrap().len(), 3);
    for s in 0..3 {
        assert!(out.join(format!("stream-{s:04}/summary.json")).is_file());
    }
}

#[test]
fn bad_inputs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let missing = bin().args(["run", "--config", "/nonexistent.toml", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let seeds = bin()
        .args(["batch", "--seeds", "1,1", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(seeds.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&seeds.stderr).contains("duplicate"));
}

#[test]
fn selftest_reports_every_check() {
    let out = bin().arg("selftest").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for id in ["[a]", "[b]", "[c]", "[d]", "[e]", "[f]", "[g]", "[h]", "[h-corrected]"] {
        assert!(text.contains(id), "missing {id}");
    }
    assert!(text.lines().all(|l| l.starts_with("PASS ") || l.starts_with("FAIL ")));
}
