//! Execution configurations (single/multi worker x scalar/lane kernels),
//! the end-to-end join driver, and phase timing with speedup reporting.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::columnar::{FeatureColumns, PointColumns};
use crate::error::{JoinError, Result};
use crate::filter::{match_cells, CandidatePairs};
use crate::grid::{build_cell_feature_pairs, group_points, GridSpec};
use crate::refine::{
    build_pool, refine_on, KernelVariant, P2PKernel, P2PResult, PipKernel, PipResult, RefineInput, DEFAULT_BATCH_SIZE,
    MAX_LANE_WIDTH,
};

pub const MAX_WORKERS: usize = 1024;
pub const DEFAULT_LANE_WIDTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// single worker, scalar kernel
    Sc,
    /// multiple workers, scalar kernel
    Mc,
    /// single worker, lane kernel
    ScLanes,
    /// multiple workers, lane kernel
    McLanes,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Sc, Mode::Mc, Mode::ScLanes, Mode::McLanes];

    /// Report label: `SC`, `MC`, `SC+SIMD`, `MC+SIMD`.
    pub fn label(self) -> &'static str {
        match self {
            Mode::Sc => "SC",
            Mode::Mc => "MC",
            Mode::ScLanes => "SC+SIMD",
            Mode::McLanes => "MC+SIMD",
        }
    }

    /// Command-line spelling.
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sc => "sc",
            Mode::Mc => "mc",
            Mode::ScLanes => "sc-lanes",
            Mode::McLanes => "mc-lanes",
        }
    }

    pub fn is_multi(self) -> bool {
        matches!(self, Mode::Mc | Mode::McLanes)
    }

    pub fn uses_lanes(self) -> bool {
        matches!(self, Mode::ScLanes | Mode::McLanes)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = JoinError;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| JoinError::usage(format!("unknown mode {s:?} (sc, mc, sc-lanes, mc-lanes)")))
    }
}

/// A validated execution configuration. Single-worker modes always run one
/// worker and scalar modes always use lane width 1, whatever was requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecConfig {
    mode: Mode,
    workers: usize,
    lane_width: usize,
    batch_size: usize,
}

impl ExecConfig {
    pub fn new(mode: Mode, workers: usize, lane_width: usize, batch_size: usize) -> Result<Self> {
        if workers == 0 || workers > MAX_WORKERS {
            return Err(JoinError::usage(format!(
                "workers must be in 1..={MAX_WORKERS}, got {workers}"
            )));
        }
        if lane_width == 0 || lane_width > MAX_LANE_WIDTH {
            return Err(JoinError::usage(format!(
                "lane width must be in 1..={MAX_LANE_WIDTH}, got {lane_width}"
            )));
        }
        if batch_size == 0 {
            return Err(JoinError::usage("batch size must be at least 1"));
        }
        Ok(Self {
            mode,
            workers: if mode.is_multi() { workers } else { 1 },
            lane_width: if mode.uses_lanes() { lane_width } else { 1 },
            batch_size,
        })
    }

    /// Mode with default knobs: every available core, 8 lanes, 64 groups per batch.
    pub fn with_defaults(mode: Mode) -> Self {
        Self::new(mode, default_workers(), DEFAULT_LANE_WIDTH, DEFAULT_BATCH_SIZE).expect("defaults are valid")
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn lane_width(&self) -> usize {
        self.lane_width
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn kernel_variant(&self) -> KernelVariant {
        if self.mode.uses_lanes() {
            KernelVariant::Lanes(self.lane_width)
        } else {
            KernelVariant::Scalar
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(MAX_WORKERS)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JoinOp {
    /// Nearest polyline within `range` of each point.
    P2P { range: f64 },
    /// Containing polygon of each point.
    Pip,
}

impl JoinOp {
    /// MBB expansion applied before rasterizing features.
    pub fn expand_range(&self) -> f64 {
        match *self {
            JoinOp::P2P { range } => range,
            JoinOp::Pip => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JoinOutput {
    P2P(P2PResult),
    Pip(PipResult),
}

impl JoinOutput {
    pub fn matched_count(&self) -> usize {
        match self {
            JoinOutput::P2P(r) => r.matched_count(),
            JoinOutput::Pip(r) => r.matched_count(),
        }
    }

    /// Equality including the bit pattern of every distance.
    pub fn bit_identical(&self, other: &JoinOutput) -> bool {
        match (self, other) {
            (JoinOutput::P2P(a), JoinOutput::P2P(b)) => a.bit_identical(b),
            (JoinOutput::Pip(a), JoinOutput::Pip(b)) => a == b,
            _ => false,
        }
    }
}

/// Minimum and median wall-clock time of one phase, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTiming {
    pub min_ms: f64,
    pub median_ms: f64,
}

impl PhaseTiming {
    pub fn single(ms: f64) -> Self {
        Self {
            min_ms: ms,
            median_ms: ms,
        }
    }

    /// Min and median of repeated samples (mean of the middle two for an even count).
    pub fn from_samples(samples: &[f64]) -> Self {
        assert!(!samples.is_empty(), "no timing samples");
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let mid = s.len() / 2;
        let median_ms = if s.len() % 2 == 1 {
            s[mid]
        } else {
            (s[mid - 1] + s[mid]) / 2.0
        };
        Self {
            min_ms: s[0],
            median_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub mode: Mode,
    pub workers: usize,
    pub lane_width: usize,
    pub repeats: usize,
    pub index: PhaseTiming,
    pub filter: PhaseTiming,
    pub refine: PhaseTiming,
}

impl TimingReport {
    pub fn label(&self) -> &'static str {
        self.mode.label()
    }

    /// Refine-phase speedup of this run over `baseline` (median times).
    pub fn speedup_over(&self, baseline: &TimingReport) -> f64 {
        speedup(baseline.refine.median_ms, self.refine.median_ms)
    }
}

fn speedup(baseline_ms: f64, this_ms: f64) -> f64 {
    if baseline_ms == this_ms {
        1.0
    } else {
        baseline_ms / this_ms
    }
}

/// Filter-phase statistics of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterStats {
    pub grid: GridSpec,
    pub occupied_cells: usize,
    pub candidate_groups: usize,
    pub feature_cell_pairs: usize,
    /// (point, feature) pairs handed to refinement.
    pub refined_pairs: u64,
}

#[derive(Debug, Clone)]
pub struct JoinRun {
    pub output: JoinOutput,
    pub timing: TimingReport,
    pub stats: FilterStats,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Index, filter and refine `points` against `features` under `cfg`.
///
/// The output does not depend on `cfg`; only the timings do.
pub fn run_join(
    op: JoinOp,
    points: &PointColumns,
    features: &FeatureColumns,
    cell_size: Option<f64>,
    cfg: &ExecConfig,
) -> Result<JoinRun> {
    if let JoinOp::P2P { range } = op {
        crate::refine::check_range(range)?;
    }
    let pool = if cfg.mode.is_multi() {
        Some(build_pool(cfg.workers)?)
    } else {
        None
    };
    let variant = cfg.kernel_variant();

    let t = Instant::now();
    let grid = GridSpec::covering(points, features, op.expand_range(), cell_size)?;
    let grouped = group_points(points, &grid)?;
    let pairs = build_cell_feature_pairs(features, &grid, op.expand_range())?;
    let index_ms = ms_since(t);

    let t = Instant::now();
    let cands: CandidatePairs = match_cells(&grouped, &pairs);
    let input = RefineInput::new(points, &grouped, features, &cands)?;
    let filter_ms = ms_since(t);

    let stats = FilterStats {
        grid,
        occupied_cells: grouped.group_count(),
        candidate_groups: cands.group_count(),
        feature_cell_pairs: pairs.len(),
        refined_pairs: cands.point_feature_pairs(&grouped),
    };

    let (output, refine_ms) = match op {
        JoinOp::P2P { range } => {
            let kernel = P2PKernel::new(features, variant)?;
            let t = Instant::now();
            let slots = refine_on(&input, &kernel, cfg.batch_size, pool.as_ref())?;
            let out = kernel.finish(&slots, range);
            (JoinOutput::P2P(out), ms_since(t))
        }
        JoinOp::Pip => {
            let kernel = PipKernel::new(features, variant)?;
            let t = Instant::now();
            let slots = refine_on(&input, &kernel, cfg.batch_size, pool.as_ref())?;
            (JoinOutput::Pip(kernel.finish(slots)), ms_since(t))
        }
    };

    let timing = TimingReport {
        mode: cfg.mode,
        workers: cfg.workers,
        lane_width: cfg.lane_width,
        repeats: 1,
        index: PhaseTiming::single(index_ms),
        filter: PhaseTiming::single(filter_ms),
        refine: PhaseTiming::single(refine_ms),
    };
    Ok(JoinRun { output, timing, stats })
}

/// [`run_join`] `repeats` times; timings become min/median over the runs.
pub fn run_join_repeated(
    op: JoinOp,
    points: &PointColumns,
    features: &FeatureColumns,
    cell_size: Option<f64>,
    cfg: &ExecConfig,
    repeats: usize,
) -> Result<JoinRun> {
    if repeats == 0 {
        return Err(JoinError::usage("repeat count must be at least 1"));
    }
    let mut samples = [Vec::new(), Vec::new(), Vec::new()];
    let mut last = None;
    for _ in 0..repeats {
        let run = run_join(op, points, features, cell_size, cfg)?;
        samples[0].push(run.timing.index.median_ms);
        samples[1].push(run.timing.filter.median_ms);
        samples[2].push(run.timing.refine.median_ms);
        last = Some(run);
    }
    let mut run = last.expect("at least one repeat");
    run.timing.repeats = repeats;
    run.timing.index = PhaseTiming::from_samples(&samples[0]);
    run.timing.filter = PhaseTiming::from_samples(&samples[1]);
    run.timing.refine = PhaseTiming::from_samples(&samples[2]);
    Ok(run)
}

/// The five refine-phase speedups across the four execution modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedupMatrix {
    pub sc_over_mc: f64,
    pub sc_lanes_over_mc_lanes: f64,
    pub sc_over_sc_lanes: f64,
    pub mc_over_mc_lanes: f64,
    pub overall: f64,
}

impl SpeedupMatrix {
    /// From refine-phase times of the SC, MC, SC+SIMD and MC+SIMD runs.
    pub fn from_refine_times(sc: f64, mc: f64, sc_lanes: f64, mc_lanes: f64) -> Self {
        Self {
            sc_over_mc: speedup(sc, mc),
            sc_lanes_over_mc_lanes: speedup(sc_lanes, mc_lanes),
            sc_over_sc_lanes: speedup(sc, sc_lanes),
            mc_over_mc_lanes: speedup(mc, mc_lanes),
            overall: speedup(sc, mc_lanes),
        }
    }

    /// `(group, ratio label, value)` in report order.
    pub fn rows(&self) -> [(&'static str, &'static str, f64); 5] {
        [
            ("Multi-core Speedup", "SC/MC", self.sc_over_mc),
            ("Multi-core Speedup", "(SC+SIMD)/(MC+SIMD)", self.sc_lanes_over_mc_lanes),
            ("SIMD Speedup", "SC/(SC+SIMD)", self.sc_over_sc_lanes),
            ("SIMD Speedup", "MC/(MC+SIMD)", self.mc_over_mc_lanes),
            ("Overall Speedup", "SC/(MC+SIMD)", self.overall),
        ]
    }
}

/// Speedup table from one report per mode (refine-phase medians).
pub fn speedup_matrix(reports: &[TimingReport]) -> Result<SpeedupMatrix> {
    let refine = |mode: Mode| -> Result<f64> {
        reports
            .iter()
            .find(|r| r.mode == mode)
            .map(|r| r.refine.median_ms)
            .ok_or_else(|| JoinError::usage(format!("no {} run in the benchmark reports", mode.label())))
    };
    Ok(SpeedupMatrix::from_refine_times(
        refine(Mode::Sc)?,
        refine(Mode::Mc)?,
        refine(Mode::ScLanes)?,
        refine(Mode::McLanes)?,
    ))
}
