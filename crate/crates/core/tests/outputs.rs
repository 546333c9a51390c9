use std::fs;
use std::path::Path;

use sacbound::report::{run_batch, run_single, stream_dir};
use sacbound::simulation::Row;
use sacbound::{Error, RunConfig};

const QUICK: &str = "
n_modes = 16
dt = 1e-3
t_final = 0.1
seed = 5
sample_stride = 10
";

fn quick(extra: &str) -> RunConfig {
    RunConfig::from_toml_str(&format!("{QUICK}{extra}"), Path::new(".")).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_single(&quick(""), dir.path()).unwrap();
    let csv = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(Row::CSV_HEADER));
    let ms: Vec<usize> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ms, (1..=10).map(|i| 10 * i).collect::<Vec<_>>());
    assert_eq!(report.rows.len(), 10);

    let summary = json(&dir.path().join("summary.json"));
    for key in [
        "m", "t", "E1", "E2", "E3", "E4", "E5", "Km", "km_terms_theorem_order", "Im", "Im_corrected",
        "Im_paper_verbatim", "q0", "bound", "bound_corrected", "bound_paper_verbatim", "max_u_l2", "seed",
        "stream", "config", "config_hash", "wall_time_s",
    ] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary["m"], 100);
    assert_eq!(summary["Km"].as_f64().unwrap(), report.summary.km);
    let last = report.rows.last().unwrap();
    assert_eq!(last.km, report.summary.km);
    assert_eq!(last.bound, report.summary.bound);
    let terms: Vec<f64> = serde_json::from_value(summary["km_terms_theorem_order"].clone()).unwrap();
    let s = &report.summary;
    assert_eq!(terms, vec![s.e1, s.e2, s.e3, s.e5, s.e4]);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_single(&quick(""), a.path()).unwrap();
    run_single(&quick(""), b.path()).unwrap();
    let read = |d: &Path| fs::read(d.join("timeseries.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn batch_of_one_matches_single_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let single = run_single(&quick(""), a.path()).unwrap();
    let (reports, agg) = run_batch(&quick(""), &[0], b.path()).unwrap();
    assert_eq!(reports[0].rows, single.rows);
    assert_eq!(agg.km.median, single.summary.km);
    assert_eq!(
        fs::read(a.path().join("timeseries.csv")).unwrap(),
        fs::read(stream_dir(b.path(), 0).join("timeseries.csv")).unwrap()
    );
    let aggregate = json(&b.path().join("aggregate.json"));
    assert_eq!(aggregate["runs"][0]["dir"], "stream-0000");
    assert_eq!(aggregate["config_hash"], single.summary.config_hash);
}

#[test]
fn streams_are_independent_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (reports, agg) = run_batch(&quick(""), &[2, 0], dir.path()).unwrap();
    assert_ne!(reports[0].summary.km, reports[1].summary.km);
    let alone = run_single(&quick("stream = 2"), &dir.path().join("alone")).unwrap();
    assert_eq!(alone.rows, reports[0].rows);
    assert_eq!(agg.runs.iter().map(|r| r.stream).collect::<Vec<_>>(), vec![2, 0]);
    assert!(agg.km.min <= agg.km.median && agg.km.median <= agg.km.max);
}

#[test]
fn zero_data_gives_zero_error_terms() {
    let cfg = RunConfig::from_toml_str(
        "n_modes = 8\ndt = 0.01\nt_final = 0.1\nseed = 0\nalpha = \"constant:0\"\nu_star = \"zero\"\nsample_stride = 1\n",
        Path::new("."),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = run_single(&cfg, dir.path()).unwrap();
    assert_eq!(report.rows.len(), 10);
    for r in &report.rows {
        // No noise at all: even the bridge term E5 vanishes.
        assert_eq!([r.e1, r.e2, r.e3, r.e4, r.e5, r.im, r.bound, r.u_l2], [0.0; 8]);
    }
}

#[test]
fn corrected_constant_scales_e2() {
    let dir = tempfile::tempdir().unwrap();
    let reference = run_single(&quick(""), &dir.path().join("p")).unwrap();
    let fixed = run_single(&quick("moment_constant = \"corrected\""), &dir.path().join("c")).unwrap();
    let ratio = fixed.summary.e2 / reference.summary.e2;
    assert!((ratio - 3f64.powf(0.25)).abs() < 1e-12);
    assert!(fixed.summary.km > reference.summary.km);
    assert_ne!(fixed.summary.config_hash, reference.summary.config_hash);
}

#[test]
fn config_errors_are_reported() {
    let base = Path::new(".");
    let bad = [
        "n_modes = 0\ndt = 0.1\nt_final = 1.0\nseed = 1\n",
        "n_modes = 4\ndt = 0.3\nt_final = 1.0\nseed = 1\n",
        "n_modes = 4\ndt = -1.0\nt_final = 1.0\nseed = 1\n",
        "n_modes = 4\ndt = 0.1\nt_final = 1.0\nseed = 1\nalpha = \"pink\"\n",
        "n_modes = 4\ndt = 0.1\nt_final = 1.0\nseed = 1\nsample_stride = 0\n",
    ];
    for text in bad {
        assert!(matches!(RunConfig::from_toml_str(text, base), Err(Error::InvalidConfig(_))), "{text}");
    }
    assert!(matches!(
        RunConfig::from_toml_str("n_modes = 4\ndt = 0.1\nt_final = 1.0\nseed = 1\nextra = 2\n", base),
        Err(Error::ConfigParse(_))
    ));
    assert!(matches!(
        RunConfig::from_file(Path::new("/nonexistent/config.toml")),
        Err(Error::Read { .. })
    ));
}

#[test]
fn table_inputs_resolve_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("alpha.txt"), "1 1 0.5 0.5 # four modes\n").unwrap();
    fs::write(dir.path().join("u0.csv"), "0.5, 0.0, 0.1\n").unwrap();
    let path = dir.path().join("run.toml");
    fs::write(
        &path,
        "n_modes = 4\ndt = 0.01\nt_final = 0.05\nseed = 3\nalpha = \"table:alpha.txt\"\nalpha_tail_sup_sq = 0.25\nu_star = \"coeffs:u0.csv\"\n",
    )
    .unwrap();
    let cfg = RunConfig::from_file(&path).unwrap();
    assert_eq!(cfg.sim.u_star().coeffs(), &[0.5, 0.0, 0.1]);
    let report = run_single(&cfg, &dir.path().join("out")).unwrap();
    assert_eq!(report.summary.m, 5);
}
