//! Run drivers writing `timeseries.csv`, `summary.json` and `aggregate.json`.
//!
//! `timeseries.csv` has the header `m,t,E1,E2,E3,E4,E5,Km,Im,bound,u_l2`,
//! one row every `sample_stride` steps plus the final index, all floats in
//! `%.16e` form. `summary.json` holds the exact final values.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::certify::ImVariant;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::simulation::{Row, Simulation};

/// Final-time values of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub m: usize,
    pub t: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    #[serde(rename = "E3")]
    pub e3: f64,
    #[serde(rename = "E4")]
    pub e4: f64,
    #[serde(rename = "E5")]
    pub e5: f64,
    #[serde(rename = "Km")]
    pub km: f64,
    /// Addends in the order the bound is stated: E1, E2, E3, E5, E4.
    pub km_terms_theorem_order: [f64; 5],
    /// `I_m` with the configured bracket, as in the CSV.
    #[serde(rename = "Im")]
    pub im: f64,
    #[serde(rename = "Im_corrected")]
    pub im_corrected: f64,
    #[serde(rename = "Im_paper_verbatim")]
    pub im_paper_verbatim: f64,
    /// `‖Q_N u⋆‖²`.
    pub q0: f64,
    /// Bound on `E[‖r(t)‖² | data]` with the configured `I_m` bracket.
    pub bound: f64,
    pub bound_corrected: f64,
    pub bound_paper_verbatim: f64,
    pub max_u_l2: f64,
    pub seed: u64,
    pub stream: u64,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub wall_time_s: f64,
}

/// Sampled rows plus the final summary of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs a single trajectory, keeping every `sample_stride`-th row and the
/// final one; `on_row` sees each kept row as it is produced.
pub fn simulate(run: &RunConfig, mut on_row: impl FnMut(&Row) -> Result<()>) -> Result<RunReport> {
    let start = Instant::now();
    let mut sim = Simulation::new(run)?;
    let stride = run.sample_stride;
    let last = sim.final_index();
    let mut rows = Vec::new();
    sim.run_to_end(|row| {
        if row.m % stride == 0 || row.m == last {
            on_row(row)?;
            rows.push(*row);
        }
        Ok(())
    })?;
    let row = *sim
        .last_row()
        .ok_or_else(|| Error::InvalidConfig("run needs at least one step".into()))?;
    let b = *sim.last_breakdown().expect("set with the last row");
    let cert = sim.certificate();
    let summary = Summary {
        m: row.m,
        t: row.t,
        e1: b.e1,
        e2: b.e2,
        e3: b.e3,
        e4: b.e4,
        e5: b.e5,
        km: b.km,
        km_terms_theorem_order: b.theorem_order(),
        im: row.im,
        im_corrected: cert.im(ImVariant::Corrected),
        im_paper_verbatim: cert.im(ImVariant::PaperVerbatim),
        q0: cert.q0(),
        bound: row.bound,
        bound_corrected: sim.bound_with(ImVariant::Corrected)?.expect("index complete"),
        bound_paper_verbatim: sim.bound_with(ImVariant::PaperVerbatim)?.expect("index complete"),
        max_u_l2: sim.max_u_l2(),
        seed: run.sim.seed(),
        stream: run.stream,
        config: run.echo(),
        config_hash: run.hash(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(RunReport { rows, summary })
}

/// `run`: one trajectory written to `out_dir`.
pub fn run_single(run: &RunConfig, out_dir: &Path) -> Result<RunReport> {
    fs::create_dir_all(out_dir)?;
    let mut csv = create(&out_dir.join("timeseries.csv"))?;
    writeln!(csv, "{}", Row::CSV_HEADER)?;
    let report = simulate(run, |row| Ok(writeln!(csv, "{}", row.csv_line())?))?;
    csv.flush()?;
    let mut json = create(&out_dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut json, &report.summary)?;
    writeln!(json)?;
    json.flush()?;
    Ok(report)
}

/// Min, median and max of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Some(Self {
            min: v[0],
            median,
            max: v[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchEntry {
    pub stream: u64,
    pub dir: PathBuf,
    #[serde(rename = "Km")]
    pub km: f64,
    pub bound: f64,
}

/// Contents of `aggregate.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub seed: u64,
    pub config_hash: String,
    pub runs: Vec<BatchEntry>,
    #[serde(rename = "Km")]
    pub km: Spread,
    pub bound: Spread,
}

/// Directory of the run for `stream` inside a batch output directory.
pub fn stream_dir(out_dir: &Path, stream: u64) -> PathBuf {
    out_dir.join(format!("stream-{stream:04}"))
}

/// `batch`: independent trajectories on the given sub-streams of the
/// config seed, run in parallel, each in its own directory.
pub fn run_batch(run: &RunConfig, streams: &[u64], out_dir: &Path) -> Result<(Vec<RunReport>, Aggregate)> {
    if streams.is_empty() {
        return Err(Error::InvalidArgument("batch needs at least one stream".into()));
    }
    fs::create_dir_all(out_dir)?;
    let reports = streams
        .par_iter()
        .map(|&s| run_single(&run.with_stream(s), &stream_dir(out_dir, s)))
        .collect::<Result<Vec<_>>>()?;
    let runs: Vec<BatchEntry> = reports
        .iter()
        .map(|r| BatchEntry {
            stream: r.summary.stream,
            dir: PathBuf::from(format!("stream-{:04}", r.summary.stream)),
            km: r.summary.km,
            bound: r.summary.bound,
        })
        .collect();
    let kms: Vec<f64> = runs.iter().map(|r| r.km).collect();
    let bounds: Vec<f64> = runs.iter().map(|r| r.bound).collect();
    let aggregate = Aggregate {
        seed: run.sim.seed(),
        config_hash: run.hash(),
        km: Spread::of(&kms).expect("nonempty"),
        bound: Spread::of(&bounds).expect("nonempty"),
        runs,
    };
    let mut json = create(&out_dir.join("aggregate.json"))?;
    serde_json::to_writer_pretty(&mut json, &aggregate)?;
    writeln!(json)?;
    json.flush()?;
    Ok((reports, aggregate))
}

/// Parses `--seeds`: a count `n` (streams `0..n`) or a comma-separated
/// list of stream indices.
pub fn parse_streams(spec: &str) -> Result<Vec<u64>> {
    let spec = spec.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse seed list {spec:?}"));
    if spec.contains(',') {
        let streams = spec
            .split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let mut sorted = streams.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != streams.len() {
            return Err(Error::InvalidArgument(format!("duplicate stream in {spec:?}")));
        }
        Ok(streams)
    } else {
        let n: u64 = spec.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        Ok((0..n).collect())
    }
}
