use crate::columnar::{CellGroupedPoints, FeatureColumns, FeatureId, FeatureKind, PointColumns};
use crate::error::{JoinError, Result};
use crate::filter::CandidatePairs;
use crate::geometry::{ring_parity_xy, RayEdge};

use super::{refine_partitioned, GroupKernel, KernelVariant, RefineInput, MAX_LANE_WIDTH};

/// Per-point containing polygon, indexed by original point index. Where
/// polygons overlap, the smallest containing id is reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipResult {
    pub containing: Vec<Option<FeatureId>>,
}

impl PipResult {
    pub fn len(&self) -> usize {
        self.containing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.containing.is_empty()
    }

    pub fn matched_count(&self) -> usize {
        self.containing.iter().filter(|m| m.is_some()).count()
    }
}

#[inline(always)]
fn keep_min(best: Option<FeatureId>, id: FeatureId) -> Option<FeatureId> {
    match best {
        Some(b) if b <= id => Some(b),
        _ => Some(id),
    }
}

/// Even-odd point-in-polygon kernel over every ring of each candidate.
#[derive(Debug, Clone, Copy)]
pub struct PipKernel<'a> {
    features: &'a FeatureColumns,
    variant: KernelVariant,
}

impl<'a> PipKernel<'a> {
    pub fn new(features: &'a FeatureColumns, variant: KernelVariant) -> Result<Self> {
        if features.kind() != FeatureKind::Polygon {
            return Err(JoinError::usage("point-in-polygon refinement needs polygon features"));
        }
        if let KernelVariant::Lanes(w) = variant {
            KernelVariant::lanes(w)?;
        }
        Ok(Self { features, variant })
    }

    fn scalar(&self, xs: &[f32], ys: &[f32], candidates: &[usize], out: &mut [Option<FeatureId>]) {
        for i in 0..xs.len() {
            let (px, py) = (xs[i] as f64, ys[i] as f64);
            let mut best = None;
            for &c in candidates {
                let mut inside = false;
                for (rx, ry) in self.features.rings(c) {
                    inside ^= ring_parity_xy(px, py, rx, ry);
                }
                if inside {
                    best = keep_min(best, self.features.id(c));
                }
            }
            out[i] = best;
        }
    }

    fn lanes(&self, width: usize, xs: &[f32], ys: &[f32], candidates: &[usize], out: &mut [Option<FeatureId>]) {
        let mut px = [0.0f64; MAX_LANE_WIDTH];
        let mut py = [0.0f64; MAX_LANE_WIDTH];
        let mut inside = [false; MAX_LANE_WIDTH];
        let mut best = [None; MAX_LANE_WIDTH];
        let (px, py, inside, best) = (
            &mut px[..width],
            &mut py[..width],
            &mut inside[..width],
            &mut best[..width],
        );

        let n = xs.len();
        for start in (0..n).step_by(width) {
            let active = width.min(n - start);
            for l in 0..width {
                let src = start + l.min(active - 1);
                px[l] = xs[src] as f64;
                py[l] = ys[src] as f64;
                best[l] = None;
            }
            let (y_lo, y_hi) = py.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
                (lo.min(y), hi.max(y))
            });
            for &c in candidates {
                inside.fill(false);
                for (rx, ry) in self.features.rings(c) {
                    let last = rx.len() - 1;
                    let (mut ax, mut ay) = (rx[last] as f64, ry[last] as f64);
                    for v in 0..rx.len() {
                        let (bx, by) = (rx[v] as f64, ry[v] as f64);
                        let edge = RayEdge::new(ax, ay, bx, by);
                        if edge.spans(y_lo, y_hi) {
                            for l in 0..width {
                                inside[l] ^= edge.crosses_select(px[l], py[l]);
                            }
                        }
                        ax = bx;
                        ay = by;
                    }
                }
                let id = self.features.id(c);
                for l in 0..active {
                    if inside[l] {
                        best[l] = keep_min(best[l], id);
                    }
                }
            }
            out[start..start + active].copy_from_slice(&best[..active]);
        }
    }

    pub fn finish(&self, slots: Vec<Option<FeatureId>>) -> PipResult {
        PipResult { containing: slots }
    }
}

impl GroupKernel for PipKernel<'_> {
    type Slot = Option<FeatureId>;

    fn empty_slot(&self) -> Option<FeatureId> {
        None
    }

    fn refine_group(&self, xs: &[f32], ys: &[f32], candidates: &[usize], out: &mut [Option<FeatureId>]) {
        match self.variant {
            KernelVariant::Scalar => self.scalar(xs, ys, candidates, out),
            KernelVariant::Lanes(w) => self.lanes(w, xs, ys, candidates, out),
        }
    }
}

fn run(
    points: &PointColumns,
    grouped: &CellGroupedPoints,
    features: &FeatureColumns,
    cands: &CandidatePairs,
    variant: KernelVariant,
) -> Result<PipResult> {
    let kernel = PipKernel::new(features, variant)?;
    let input = RefineInput::new(points, grouped, features, cands)?;
    let slots = refine_partitioned(&input, &kernel, usize::MAX, 1)?;
    Ok(kernel.finish(slots))
}

/// Smallest-id containing candidate polygon for every point, one point at a time.
pub fn pip_scalar(
    points: &PointColumns,
    grouped: &CellGroupedPoints,
    features: &FeatureColumns,
    cands: &CandidatePairs,
) -> Result<PipResult> {
    run(points, grouped, features, cands, KernelVariant::Scalar)
}

/// Same as [`pip_scalar`], processing each cell's points `lane_width` at a time.
pub fn pip_lanes(
    points: &PointColumns,
    grouped: &CellGroupedPoints,
    features: &FeatureColumns,
    cands: &CandidatePairs,
    lane_width: usize,
) -> Result<PipResult> {
    run(points, grouped, features, cands, KernelVariant::lanes(lane_width)?)
}
