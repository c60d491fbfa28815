//! Parameter-grid sweeps: one winding number per tuple, appended as JSON
//! lines, resumable by tuple key.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{build_semicircle, evans_winding, WindingOptions};
use crate::engine::{EvalOptions, EvansModel};
use crate::error::{EvansError, Result};
use crate::limits::hf_radius;
use crate::params::{classify_shock, PhysicalParams};
use crate::profile::ProfileOptions;
use crate::shooting::Normalization;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "MHD_EVANS_WORKERS";

/// Records are synced to disk after this many appends.
const SYNC_EVERY: usize = 16;

/// Smallest radius used by the automatic policy.
pub const MIN_AUTO_RADIUS: f64 = 1.05;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepAxes {
    pub gamma: Vec<f64>,
    pub v_plus: Vec<f64>,
    pub b1: Vec<f64>,
    pub mu0: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl SweepAxes {
    pub fn len(&self) -> usize {
        self.gamma.len() * self.v_plus.len() * self.b1.len() * self.mu0.len() * self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian product in axis order (last axis fastest).
    pub fn tuples(&self) -> Vec<[f64; 5]> {
        let mut out = Vec::with_capacity(self.len());
        for &g in &self.gamma {
            for &v in &self.v_plus {
                for &b in &self.b1 {
                    for &m in &self.mu0 {
                        for &s in &self.sigma {
                            out.push([g, v, b, m, s]);
                        }
                    }
                }
            }
        }
        out
    }

    /// The 108-tuple grid used as a quick stability check.
    pub fn desk_grid() -> SweepAxes {
        SweepAxes {
            gamma: vec![1.0, 5.0 / 3.0, 3.0],
            v_plus: vec![0.8, 1e-2, 1e-5],
            b1: vec![0.2, 2.0, 3.8],
            mu0: vec![0.2, 3.8],
            sigma: vec![0.2, 3.8],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusPolicy {
    /// `max(hf_radius, 1.05)`.
    Auto,
    Fixed(f64),
}

impl RadiusPolicy {
    pub fn radius(&self, params: &PhysicalParams) -> f64 {
        match *self {
            RadiusPolicy::Auto => hf_radius(params).radius.max(MIN_AUTO_RADIUS),
            RadiusPolicy::Fixed(r) => r,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axes: SweepAxes,
    #[serde(default = "default_points")]
    pub n_points: usize,
    #[serde(default = "default_radius")]
    pub radius: RadiusPolicy,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
    pub output: PathBuf,
    /// `None` reads the worker count from the environment, else uses all cores.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Store per-tuple wall time; off for byte-reproducible output.
    #[serde(default = "default_timing")]
    pub record_timing: bool,
}

fn default_points() -> usize {
    120
}

fn default_radius() -> RadiusPolicy {
    RadiusPolicy::Auto
}

fn default_normalization() -> Normalization {
    Normalization::Check
}

fn default_timing() -> bool {
    true
}

impl SweepSpec {
    pub fn new(axes: SweepAxes, output: impl Into<PathBuf>) -> SweepSpec {
        SweepSpec {
            axes,
            n_points: default_points(),
            radius: default_radius(),
            normalization: default_normalization(),
            output: output.into(),
            workers: None,
            record_timing: default_timing(),
        }
    }

    pub fn worker_count(&self) -> usize {
        self.workers
            .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|s| s.trim().parse().ok()))
            .filter(|&n| n > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    Error { kind: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub key: String,
    pub gamma: f64,
    pub v_plus: f64,
    pub b1: f64,
    pub mu0: f64,
    pub sigma: f64,
    pub shock_type: String,
    pub radius: f64,
    pub winding: Option<i64>,
    pub max_arg_step: Option<f64>,
    pub n_evals: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    #[serde(flatten)]
    pub status: RecordStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub tuples: usize,
    /// Tuples found in the output file and skipped.
    pub resumed: usize,
    pub computed: usize,
    pub ok: usize,
    pub errors: usize,
    pub by_winding: BTreeMap<i64, usize>,
    pub by_error: BTreeMap<String, usize>,
}

impl SweepSummary {
    fn add(&mut self, r: &SweepRecord) {
        match &r.status {
            RecordStatus::Ok => {
                self.ok += 1;
                if let Some(w) = r.winding {
                    *self.by_winding.entry(w).or_default() += 1;
                }
            }
            RecordStatus::Error { kind, .. } => {
                self.errors += 1;
                *self.by_error.entry(kind.clone()).or_default() += 1;
            }
        }
    }
}

/// Computes the winding number of one tuple; numerical failures become
/// error records.
pub fn evaluate_tuple(t: [f64; 5], spec: &SweepSpec) -> SweepRecord {
    let start = Instant::now();
    let [gamma, v_plus, b1, mu0, sigma] = t;
    let key = format!("g={gamma},v={v_plus},b={b1},m={mu0},s={sigma}");
    let mut rec = SweepRecord {
        key,
        gamma,
        v_plus,
        b1,
        mu0,
        sigma,
        shock_type: String::new(),
        radius: f64::NAN,
        winding: None,
        max_arg_step: None,
        n_evals: 0,
        wall_time: None,
        status: RecordStatus::Ok,
    };
    let outcome = (|| -> Result<()> {
        let p = PhysicalParams::new(gamma, v_plus, b1, mu0, sigma)?;
        rec.shock_type = classify_shock(&p, 1e-12).to_string();
        rec.radius = spec.radius.radius(&p);
        let model = EvansModel::finite(&p, &ProfileOptions::default())?;
        let contour = build_semicircle(rec.radius, spec.n_points, 0.0)?;
        let res = evans_winding(
            &model,
            &contour,
            spec.normalization,
            &EvalOptions::default(),
            &WindingOptions::default(),
        )?;
        rec.winding = Some(res.winding);
        rec.max_arg_step = Some(res.max_arg_step);
        rec.n_evals = contour.evaluation_points().len() + res.refinements;
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.status = RecordStatus::Error {
            kind: e.kind().to_string(),
            message: e.to_string(),
        };
    }
    if spec.record_timing {
        rec.wall_time = Some(start.elapsed().as_secs_f64());
    }
    rec
}

/// Reads all records of a JSON-lines file; a truncated last line (from an
/// interrupted run) is ignored.
pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => out.push(r),
            Err(_) => continue,
        }
    }
    Ok(out)
}

/// Runs every tuple not yet present in `spec.output`, appending one record
/// per tuple. Per-tuple failures are recorded, I/O failures abort.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepSummary> {
    let existing = read_records(&spec.output)?;
    let done: HashSet<String> = existing.iter().map(|r| r.key.clone()).collect();
    let all = spec.axes.tuples();
    let mut summary = SweepSummary {
        tuples: all.len(),
        ..Default::default()
    };
    for r in &existing {
        summary.add(r);
    }
    let todo: Vec<[f64; 5]> = all
        .into_iter()
        .filter(|t| !done.contains(&format!("g={},v={},b={},m={},s={}", t[0], t[1], t[2], t[3], t[4])))
        .collect();
    summary.resumed = summary.tuples - todo.len();
    if todo.is_empty() {
        return Ok(summary);
    }
    let file = repair_tail(&spec.output)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.worker_count())
        .build()
        .map_err(|e| EvansError::Io(e.to_string()))?;

    let (tx, rx) = mpsc::channel::<SweepRecord>();
    let writer = std::thread::spawn(move || -> Result<Vec<SweepRecord>> {
        let mut file = file;
        let mut written = Vec::new();
        for rec in rx {
            let line = serde_json::to_string(&rec)?;
            writeln!(file, "{line}")?;
            written.push(rec);
            if written.len() % SYNC_EVERY == 0 {
                file.sync_data()?;
            }
        }
        file.sync_data()?;
        Ok(written)
    });
    pool.install(|| {
        todo.par_iter().for_each_with(tx, |tx, &t| {
            // the writer only stops early on an I/O error, reported below
            let _ = tx.send(evaluate_tuple(t, spec));
        })
    });
    let written = writer
        .join()
        .map_err(|_| EvansError::Io("sweep writer panicked".into()))??;
    for r in &written {
        summary.add(r);
    }
    summary.computed = written.len();
    Ok(summary)
}

/// Opens `path` for appending, first cutting off a partial last line.
fn repair_tail(path: &Path) -> Result<File> {
    if let Ok(text) = std::fs::read(path) {
        if !text.is_empty() && text.last() != Some(&b'\n') {
            let keep = text.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            let f = OpenOptions::new().write(true).open(path)?;
            f.set_len(keep as u64)?;
        }
    }
    Ok(OpenOptions::new().create(true).append(true).open(path)?)
}

/// Records sorted by key, serialized one per line.
pub fn canonical_lines(records: &[SweepRecord]) -> Result<Vec<String>> {
    let mut sorted: Vec<&SweepRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.key.cmp(&b.key));
    sorted.into_iter().map(|r| Ok(serde_json::to_string(r)?)).collect()
}
