//! Experiment runs: leave-one-out over a set of areas, or zero-shot from a
//! training set to a disjoint test set. Every (fold, M, Q, seed) cell is
//! observed once and reconstructed by each requested method; rows come out
//! in a fixed order whatever the thread count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{knn1_reconstruct, mse};
use crate::error::{Error, Result};
use crate::grid::{read_grid, write_pgm, GridSignal};
use crate::operator::reconstruct_sampling;
use crate::patterns::{area_library, PatternLibrary, ROTATION_STEP};
use crate::sampling::{observe, SamplingSpec};
use crate::tda::topo_distance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    LeaveOneOut,
    ZeroShot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Geneo,
    Knn1,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Geneo => "geneo",
            Method::Knn1 => "knn1",
        }
    }
}

fn default_radius() -> usize {
    22
}

fn default_rotation_step() -> u32 {
    ROTATION_STEP
}

fn default_methods() -> Vec<Method> {
    vec![Method::Geneo, Method::Knn1]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// Declarative description of one experiment (a JSON document).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub train_areas: Vec<PathBuf>,
    #[serde(default)]
    pub test_areas: Vec<PathBuf>,
    pub protocol: Protocol,
    /// Known-pixel percentages.
    #[serde(rename = "M")]
    pub m: Vec<f64>,
    /// Corrupted percentages of the known pixels.
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_radius")]
    pub radius: usize,
    #[serde(default = "default_rotation_step")]
    pub rotation_step: u32,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
}

impl ExperimentConfig {
    /// Parses a config file; relative area paths resolve against the
    /// file's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: Self = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for p in cfg.train_areas.iter_mut().chain(cfg.test_areas.iter_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        match self.protocol {
            Protocol::LeaveOneOut => {
                if self.train_areas.len() < 2 {
                    return bad("leave-one-out needs at least two train areas");
                }
                if !self.test_areas.is_empty() {
                    return bad(
                        "leave-one-out takes its folds from train_areas; test_areas must be empty",
                    );
                }
            }
            Protocol::ZeroShot => {
                if self.train_areas.is_empty() || self.test_areas.is_empty() {
                    return bad("zero-shot needs non-empty train_areas and test_areas");
                }
            }
        }
        if self.m.is_empty() || self.q.is_empty() || self.seeds.is_empty() {
            return bad("M, Q and seeds must be non-empty");
        }
        if self.methods.is_empty() {
            return bad("no methods selected");
        }
        if self.radius == 0 {
            return bad("radius must be positive");
        }
        for &m in &self.m {
            for &q in &self.q {
                SamplingSpec::new(m, q, 0)?;
            }
        }
        Ok(())
    }
}

/// One reconstruction of one held-out area.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub fold: usize,
    pub method: Method,
    pub m: f64,
    pub q: f64,
    pub seed: u64,
    pub mse: f64,
    pub w1_h0: f64,
    pub w1_h1: f64,
    pub w1_total: f64,
    pub wall_ms: f64,
}

/// A fold or cell that could not be run.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldFailure {
    pub fold: usize,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub failures: Vec<FoldFailure>,
}

pub const REPORT_HEADER: &str = "fold,method,M,Q,seed,mse,w1_h0,w1_h1,w1_total,wall_ms";

impl ExperimentReport {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:e},{:e},{:e},{:e},{:.3}",
                r.fold,
                r.method.name(),
                r.m,
                r.q,
                r.seed,
                r.mse,
                r.w1_h0,
                r.w1_h1,
                r.w1_total,
                r.wall_ms
            );
        }
        out
    }
}

/// Optional side outputs.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory receiving `.pgm` dumps of every ground truth and
    /// reconstruction.
    pub dump_maps: Option<PathBuf>,
}

/// Stateless 64-bit mixer (splitmix64 finalizer).
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one sampling run, derived from the base seed and the cell.
pub fn run_seed(base: u64, fold: usize, m: f64, q: f64) -> u64 {
    [fold as u64, m.to_bits(), q.to_bits()]
        .into_iter()
        .fold(mix(base), |h, v| mix(h ^ v))
}

struct Fold {
    index: usize,
    test: std::result::Result<GridSignal, String>,
    /// Indices into the training pool.
    train: Vec<usize>,
}

fn load(path: &Path) -> std::result::Result<GridSignal, String> {
    std::fs::read(path)
        .map_err(Error::from)
        .and_then(|b| read_grid(&b))
        .map_err(|e| format!("{}: {e}", path.display()))
}

/// Leave-one-out: fold `i` reconstructs `train_areas[i]` with a library
/// built from every other area.
pub fn run_leave_one_out(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.protocol != Protocol::LeaveOneOut {
        return Err(Error::Config("config protocol is not leave-one-out".into()));
    }
    let pool: Vec<_> = cfg.train_areas.par_iter().map(|p| load(p)).collect();
    let folds = (0..pool.len())
        .map(|i| Fold {
            index: i,
            test: pool[i].clone(),
            train: (0..pool.len()).filter(|&j| j != i).collect(),
        })
        .collect();
    run_folds(cfg, opts, &pool, folds)
}

/// Zero-shot: one library from all train areas, fold `i` reconstructs
/// `test_areas[i]`.
pub fn run_zero_shot(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.protocol != Protocol::ZeroShot {
        return Err(Error::Config("config protocol is not zero-shot".into()));
    }
    let pool: Vec<_> = cfg.train_areas.par_iter().map(|p| load(p)).collect();
    let tests: Vec<_> = cfg.test_areas.par_iter().map(|p| load(p)).collect();
    let folds = tests
        .into_iter()
        .enumerate()
        .map(|(i, test)| Fold {
            index: i,
            test,
            train: (0..pool.len()).collect(),
        })
        .collect();
    run_folds(cfg, opts, &pool, folds)
}

/// Dispatches on `cfg.protocol`.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    match cfg.protocol {
        Protocol::LeaveOneOut => run_leave_one_out(cfg, opts),
        Protocol::ZeroShot => run_zero_shot(cfg, opts),
    }
}

fn run_folds(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    pool: &[std::result::Result<GridSignal, String>],
    folds: Vec<Fold>,
) -> Result<ExperimentReport> {
    if let Some(dir) = &opts.dump_maps {
        std::fs::create_dir_all(dir)?;
    }
    let needs_library = cfg.methods.contains(&Method::Geneo);
    // Per-area libraries are built once and shared between folds.
    let area_libs: Vec<Option<std::result::Result<PatternLibrary, String>>> = pool
        .par_iter()
        .enumerate()
        .map(|(id, area)| {
            if !needs_library {
                return None;
            }
            Some(match area {
                Ok(gt) => area_library(gt, cfg.radius, id as u32, cfg.rotation_step)
                    .map_err(|e| format!("{}: {e}", cfg.train_areas[id].display())),
                Err(e) => Err(e.clone()),
            })
        })
        .collect();

    let mut report = ExperimentReport::default();
    for fold in folds {
        let gt = match &fold.test {
            Ok(gt) => gt,
            Err(e) => {
                report.failures.push(FoldFailure {
                    fold: fold.index,
                    error: e.clone(),
                });
                continue;
            }
        };
        let library = if needs_library {
            match fold_library(&fold, &area_libs) {
                Ok(lib) => Some(lib),
                Err(e) => {
                    report.failures.push(FoldFailure {
                        fold: fold.index,
                        error: e,
                    });
                    continue;
                }
            }
        } else {
            None
        };
        if let Some(dir) = &opts.dump_maps {
            std::fs::write(
                dir.join(format!("fold{}_gt.pgm", fold.index)),
                write_pgm(gt),
            )?;
        }

        let cells: Vec<(f64, f64, u64)> = cfg
            .m
            .iter()
            .flat_map(|&m| {
                cfg.q
                    .iter()
                    .flat_map(move |&q| cfg.seeds.iter().map(move |&s| (m, q, s)))
            })
            .collect();
        let outcomes: Vec<Result<Vec<ReportRow>>> = cells
            .par_iter()
            .map(|&(m, q, seed)| run_cell(cfg, opts, fold.index, gt, library.as_ref(), m, q, seed))
            .collect();
        for (outcome, &(m, q, seed)) in outcomes.into_iter().zip(&cells) {
            match outcome {
                Ok(rows) => report.rows.extend(rows),
                Err(e) => report.failures.push(FoldFailure {
                    fold: fold.index,
                    error: format!("M={m} Q={q} seed={seed}: {e}"),
                }),
            }
        }
    }
    report.rows.sort_by(|a, b| {
        a.fold
            .cmp(&b.fold)
            .then(a.method.cmp(&b.method))
            .then(a.m.total_cmp(&b.m))
            .then(a.q.total_cmp(&b.q))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(report)
}

/// Library of a fold: the readable training areas it may use. An
/// unreadable training area fails every fold that would have used it.
fn fold_library(
    fold: &Fold,
    area_libs: &[Option<std::result::Result<PatternLibrary, String>>],
) -> std::result::Result<PatternLibrary, String> {
    let mut parts = Vec::with_capacity(fold.train.len());
    for &i in &fold.train {
        match &area_libs[i] {
            Some(Ok(lib)) => parts.push(lib.clone()),
            Some(Err(e)) => return Err(e.clone()),
            None => unreachable!("libraries are built whenever geneo runs"),
        }
    }
    PatternLibrary::concat(parts).map_err(|e| e.to_string())
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    fold: usize,
    gt: &GridSignal,
    library: Option<&PatternLibrary>,
    m: f64,
    q: f64,
    base_seed: u64,
) -> Result<Vec<ReportRow>> {
    let spec = SamplingSpec::new(m, q, run_seed(base_seed, fold, m, q))?;
    let obs = observe(gt, &spec)?;
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let mut rows = Vec::with_capacity(methods.len());
    for method in methods {
        let start = Instant::now();
        let rec = match method {
            Method::Geneo => {
                let lib = library.ok_or(Error::EmptyLibrary)?;
                reconstruct_sampling(&obs, lib)?.phi_rec
            }
            Method::Knn1 => knn1_reconstruct(&obs)?,
        };
        let err = mse(&rec, gt)?;
        let topo = topo_distance(&rec, gt)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        if let Some(dir) = &opts.dump_maps {
            let name = format!("fold{fold}_{}_M{m}_Q{q}_s{base_seed}.pgm", method.name());
            std::fs::write(dir.join(name), write_pgm(&rec))?;
        }
        rows.push(ReportRow {
            fold,
            method,
            m,
            q,
            seed: base_seed,
            mse: err,
            w1_h0: topo.h0,
            w1_h1: topo.h1,
            w1_total: topo.total,
            wall_ms,
        });
    }
    Ok(rows)
}
