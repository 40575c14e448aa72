//! Refinement: exact geometry over the filter's `(cell, {feature})` groups.
//!
//! Every kernel comes in a scalar form (one point at a time) and a lane form
//! (a batch of `W` points of the same cell stepping through the same vertex
//! sequence, ragged tails masked). Both forms apply the same per-point
//! arithmetic in the same order, so their outputs are bit-identical.
//!
//! [`refine_partitioned`] splits the group list into batches of `K` groups and
//! runs them on a worker pool. A point belongs to exactly one cell group, and
//! cell groups own disjoint runs of the cell-sorted order, so each batch gets
//! its own `&mut` slice of the output and no locking is needed.

mod p2p;
mod pip;

use std::ops::Range;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::columnar::{CellGroupedPoints, FeatureColumns, PointColumns};
use crate::error::{JoinError, Result};
use crate::filter::CandidatePairs;

pub use p2p::{p2p_lanes, p2p_scalar, NearestMatch, P2PKernel, P2PResult};
pub use pip::{pip_lanes, pip_scalar, PipKernel, PipResult};

pub(crate) use p2p::check_range;

/// Widest lane batch a kernel accepts.
pub const MAX_LANE_WIDTH: usize = 64;

/// Default number of candidate groups per scheduled batch.
pub const DEFAULT_BATCH_SIZE: usize = 64;

/// How a kernel walks the points of one cell group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelVariant {
    Scalar,
    Lanes(usize),
}

impl KernelVariant {
    pub fn lanes(width: usize) -> Result<Self> {
        if width == 0 || width > MAX_LANE_WIDTH {
            return Err(JoinError::usage(format!(
                "lane width must be in 1..={MAX_LANE_WIDTH}, got {width}"
            )));
        }
        Ok(Self::Lanes(width))
    }
}

/// A refinement kernel evaluated one candidate group at a time.
pub trait GroupKernel: Sync {
    /// Per-point result slot.
    type Slot: Copy + Send + Sync;

    /// Slot for points that never reach refinement.
    fn empty_slot(&self) -> Self::Slot;

    /// Refine the points of one cell (`xs`/`ys` in cell-sorted order) against
    /// that cell's candidate features, writing one slot per point.
    fn refine_group(&self, xs: &[f32], ys: &[f32], candidates: &[usize], out: &mut [Self::Slot]);
}

/// Points, features and filter output, checked for mutual consistency, with
/// point coordinates gathered into cell-sorted order.
#[derive(Debug)]
pub struct RefineInput<'a> {
    point_count: usize,
    grouped: &'a CellGroupedPoints,
    features: &'a FeatureColumns,
    candidates: &'a CandidatePairs,
    sorted: PointColumns,
}

impl<'a> RefineInput<'a> {
    pub fn new(
        points: &PointColumns,
        grouped: &'a CellGroupedPoints,
        features: &'a FeatureColumns,
        candidates: &'a CandidatePairs,
    ) -> Result<Self> {
        validate(points, grouped, features, candidates)?;
        Ok(Self {
            point_count: points.len(),
            grouped,
            features,
            candidates,
            sorted: points.gather(&grouped.perm),
        })
    }

    pub fn features(&self) -> &'a FeatureColumns {
        self.features
    }

    pub fn candidates(&self) -> &'a CandidatePairs {
        self.candidates
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    /// Sorted-order range of the points owned by candidate group `g`.
    fn sorted_range(&self, g: usize) -> Range<usize> {
        self.grouped.group_range(self.candidates.point_groups[g])
    }
}

fn validate(
    points: &PointColumns,
    grouped: &CellGroupedPoints,
    features: &FeatureColumns,
    cands: &CandidatePairs,
) -> Result<()> {
    let n = grouped.cell_ids.len();
    if grouped.starts.len() != n || grouped.counts.len() != n {
        return Err(JoinError::usage("cell groups: column lengths disagree"));
    }
    if grouped.counts.iter().sum::<usize>() != grouped.perm.len() {
        return Err(JoinError::usage("cell groups: counts do not cover the permutation"));
    }
    if grouped.perm.iter().any(|&i| i >= points.len()) {
        return Err(JoinError::usage("cell groups reference points that do not exist"));
    }
    let g = cands.cell_ids.len();
    if cands.point_groups.len() != g || cands.group_starts.len() != g {
        return Err(JoinError::usage("candidate pairs: column lengths disagree"));
    }
    if !cands.point_groups.windows(2).all(|w| w[0] < w[1]) {
        return Err(JoinError::usage("candidate groups are not in cell order"));
    }
    for (k, &pg) in cands.point_groups.iter().enumerate() {
        if pg >= n || grouped.cell_ids[pg] != cands.cell_ids[k] {
            return Err(JoinError::usage(format!(
                "candidate group {k} does not match an occupied point cell"
            )));
        }
    }
    if cands.candidate_feature_pos.iter().any(|&f| f >= features.len()) {
        return Err(JoinError::usage("candidate pairs reference features that do not exist"));
    }
    Ok(())
}

/// Split `groups` consecutive groups into batches of at most `batch_size`.
pub fn batch_ranges(groups: usize, batch_size: usize) -> Vec<Range<usize>> {
    assert!(batch_size > 0, "batch size must be positive");
    (0..groups)
        .step_by(batch_size)
        .map(|s| s..s.saturating_add(batch_size).min(groups))
        .collect()
}

struct BatchJob<'s, S> {
    groups: Range<usize>,
    base: usize,
    out: &'s mut [S],
}

/// Refine every candidate group in batches of `batch_size` groups, on the
/// given pool or inline on the calling thread. Returns one slot per original
/// point index.
pub fn refine_on<K: GroupKernel>(
    input: &RefineInput<'_>,
    kernel: &K,
    batch_size: usize,
    pool: Option<&ThreadPool>,
) -> Result<Vec<K::Slot>> {
    if batch_size == 0 {
        return Err(JoinError::usage("batch size must be at least 1"));
    }
    let cands = input.candidates;
    let mut sorted_out = vec![kernel.empty_slot(); input.grouped.point_count()];

    // Groups are in ascending cell order and so own increasing, disjoint
    // runs of the sorted order: carve one slice per batch.
    let mut jobs = Vec::new();
    let mut rest: &mut [K::Slot] = &mut sorted_out;
    let mut cursor = 0;
    for groups in batch_ranges(cands.group_count(), batch_size) {
        let lo = input.sorted_range(groups.start).start;
        let hi = input.sorted_range(groups.end - 1).end;
        let (_, tail) = std::mem::take(&mut rest).split_at_mut(lo - cursor);
        let (out, tail) = tail.split_at_mut(hi - lo);
        rest = tail;
        cursor = hi;
        jobs.push(BatchJob { groups, base: lo, out });
    }

    let run = |job: BatchJob<'_, K::Slot>| {
        let xs = input.sorted.xs();
        let ys = input.sorted.ys();
        for g in job.groups {
            let r = input.sorted_range(g);
            let local = r.start - job.base..r.end - job.base;
            kernel.refine_group(&xs[r.clone()], &ys[r], cands.candidates(g), &mut job.out[local]);
        }
    };
    match pool {
        Some(pool) => pool.install(|| jobs.into_par_iter().with_max_len(1).for_each(run)),
        None => jobs.into_iter().for_each(run),
    }

    let mut out = vec![kernel.empty_slot(); input.point_count];
    for (slot, &orig) in sorted_out.into_iter().zip(&input.grouped.perm) {
        out[orig] = slot;
    }
    Ok(out)
}

pub fn build_pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .thread_name(|i| format!("refine-{i}"))
        .build()
        .map_err(|e| JoinError::usage(format!("cannot start {workers} workers: {e}")))
}

/// Refine in batches of `batch_size` groups on `workers` threads.
///
/// The result does not depend on `batch_size` or `workers`.
pub fn refine_partitioned<K: GroupKernel>(
    input: &RefineInput<'_>,
    kernel: &K,
    batch_size: usize,
    workers: usize,
) -> Result<Vec<K::Slot>> {
    if workers == 0 {
        return Err(JoinError::usage("worker count must be at least 1"));
    }
    if workers == 1 {
        refine_on(input, kernel, batch_size, None)
    } else {
        let pool = build_pool(workers)?;
        refine_on(input, kernel, batch_size, Some(&pool))
    }
}
