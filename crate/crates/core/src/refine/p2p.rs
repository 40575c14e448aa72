use crate::columnar::{CellGroupedPoints, FeatureColumns, FeatureId, FeatureKind, PointColumns};
use crate::error::{JoinError, Result};
use crate::filter::CandidatePairs;
use crate::geometry::{min_strict, polyline_distance_sq_xy, Segment};

use super::{refine_partitioned, GroupKernel, KernelVariant, RefineInput, MAX_LANE_WIDTH};

const NO_FEATURE: usize = usize::MAX;

/// Nearest polyline found for one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestMatch {
    pub feature_id: FeatureId,
    /// Euclidean distance, not squared.
    pub distance: f64,
}

/// Per-point nearest polyline within range, indexed by original point index.
#[derive(Debug, Clone, PartialEq)]
pub struct P2PResult {
    pub matches: Vec<Option<NearestMatch>>,
}

impl P2PResult {
    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn matched_count(&self) -> usize {
        self.matches.iter().filter(|m| m.is_some()).count()
    }

    /// Equality down to the bit pattern of every distance.
    pub fn bit_identical(&self, other: &P2PResult) -> bool {
        self.matches.len() == other.matches.len()
            && self.matches.iter().zip(&other.matches).all(|(a, b)| match (a, b) {
                (None, None) => true,
                (Some(a), Some(b)) => a.feature_id == b.feature_id && a.distance.to_bits() == b.distance.to_bits(),
                _ => false,
            })
    }
}

/// Running minimum for one point: best squared distance and the candidate
/// position that first reached it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestSlot {
    feature_pos: usize,
    dist_sq: f64,
}

/// Nearest-polyline kernel. Candidates are scanned in ascending feature
/// position and only a strictly smaller distance replaces the current best,
/// so exact ties go to the first candidate.
#[derive(Debug, Clone, Copy)]
pub struct P2PKernel<'a> {
    features: &'a FeatureColumns,
    variant: KernelVariant,
}

impl<'a> P2PKernel<'a> {
    pub fn new(features: &'a FeatureColumns, variant: KernelVariant) -> Result<Self> {
        if features.kind() != FeatureKind::Polyline {
            return Err(JoinError::usage("point-to-polyline refinement needs polyline features"));
        }
        if let KernelVariant::Lanes(w) = variant {
            KernelVariant::lanes(w)?;
        }
        Ok(Self { features, variant })
    }

    #[inline]
    fn line(&self, pos: usize) -> (&[f32], &[f32]) {
        // polylines carry exactly one ring
        self.features.ring(self.features.ring_range(pos).start)
    }

    fn scalar(&self, xs: &[f32], ys: &[f32], candidates: &[usize], out: &mut [NearestSlot]) {
        for i in 0..xs.len() {
            let (px, py) = (xs[i] as f64, ys[i] as f64);
            let mut best = f64::INFINITY;
            let mut best_pos = NO_FEATURE;
            for &c in candidates {
                let (vx, vy) = self.line(c);
                let d = polyline_distance_sq_xy(px, py, vx, vy);
                if d < best {
                    best = d;
                    best_pos = c;
                }
            }
            out[i] = NearestSlot {
                feature_pos: best_pos,
                dist_sq: best,
            };
        }
    }

    fn lanes(&self, width: usize, xs: &[f32], ys: &[f32], candidates: &[usize], out: &mut [NearestSlot]) {
        let mut px = [0.0f64; MAX_LANE_WIDTH];
        let mut py = [0.0f64; MAX_LANE_WIDTH];
        let mut best = [0.0f64; MAX_LANE_WIDTH];
        let mut best_pos = [NO_FEATURE; MAX_LANE_WIDTH];
        let mut line_min = [0.0f64; MAX_LANE_WIDTH];
        let (px, py) = (&mut px[..width], &mut py[..width]);
        let (best, best_pos, line_min) = (&mut best[..width], &mut best_pos[..width], &mut line_min[..width]);

        let n = xs.len();
        for start in (0..n).step_by(width) {
            let active = width.min(n - start);
            // inactive lanes replay the last active point; their results are masked
            for l in 0..width {
                let src = start + l.min(active - 1);
                px[l] = xs[src] as f64;
                py[l] = ys[src] as f64;
                best[l] = f64::INFINITY;
                best_pos[l] = NO_FEATURE;
            }
            for &c in candidates {
                let (vx, vy) = self.line(c);
                if vx.len() == 1 {
                    let (ax, ay) = (vx[0] as f64, vy[0] as f64);
                    for l in 0..width {
                        let dx = px[l] - ax;
                        let dy = py[l] - ay;
                        line_min[l] = dx * dx + dy * dy;
                    }
                } else {
                    line_min.fill(f64::INFINITY);
                    for s in 1..vx.len() {
                        let seg = Segment::new(vx[s - 1] as f64, vy[s - 1] as f64, vx[s] as f64, vy[s] as f64);
                        for l in 0..width {
                            let d = seg.distance_sq_select(px[l], py[l]);
                            line_min[l] = min_strict(line_min[l], d);
                        }
                    }
                }
                for l in 0..active {
                    if line_min[l] < best[l] {
                        best[l] = line_min[l];
                        best_pos[l] = c;
                    }
                }
            }
            for l in 0..active {
                out[start + l] = NearestSlot {
                    feature_pos: best_pos[l],
                    dist_sq: best[l],
                };
            }
        }
    }

    /// Turn per-point slots into matches within `range`.
    pub fn finish(&self, slots: &[NearestSlot], range: f64) -> P2PResult {
        let range_sq = range * range;
        let matches = slots
            .iter()
            .map(|s| {
                (s.feature_pos != NO_FEATURE && s.dist_sq <= range_sq).then(|| NearestMatch {
                    feature_id: self.features.id(s.feature_pos),
                    distance: s.dist_sq.sqrt(),
                })
            })
            .collect();
        P2PResult { matches }
    }
}

impl GroupKernel for P2PKernel<'_> {
    type Slot = NearestSlot;

    fn empty_slot(&self) -> NearestSlot {
        NearestSlot {
            feature_pos: NO_FEATURE,
            dist_sq: f64::INFINITY,
        }
    }

    fn refine_group(&self, xs: &[f32], ys: &[f32], candidates: &[usize], out: &mut [NearestSlot]) {
        match self.variant {
            KernelVariant::Scalar => self.scalar(xs, ys, candidates, out),
            KernelVariant::Lanes(w) => self.lanes(w, xs, ys, candidates, out),
        }
    }
}

pub(crate) fn check_range(range: f64) -> Result<()> {
    if range > 0.0 && range.is_finite() {
        Ok(())
    } else {
        Err(JoinError::usage(format!(
            "range must be positive and finite, got {range}"
        )))
    }
}

fn run(
    points: &PointColumns,
    grouped: &CellGroupedPoints,
    features: &FeatureColumns,
    cands: &CandidatePairs,
    range: f64,
    variant: KernelVariant,
) -> Result<P2PResult> {
    check_range(range)?;
    let kernel = P2PKernel::new(features, variant)?;
    let input = RefineInput::new(points, grouped, features, cands)?;
    let slots = refine_partitioned(&input, &kernel, usize::MAX, 1)?;
    Ok(kernel.finish(&slots, range))
}

/// Nearest candidate polyline within `range` for every point, one point at a time.
pub fn p2p_scalar(
    points: &PointColumns,
    grouped: &CellGroupedPoints,
    features: &FeatureColumns,
    cands: &CandidatePairs,
    range: f64,
) -> Result<P2PResult> {
    run(points, grouped, features, cands, range, KernelVariant::Scalar)
}

/// Same as [`p2p_scalar`], processing each cell's points `lane_width` at a time.
pub fn p2p_lanes(
    points: &PointColumns,
    grouped: &CellGroupedPoints,
    features: &FeatureColumns,
    cands: &CandidatePairs,
    range: f64,
    lane_width: usize,
) -> Result<P2PResult> {
    run(
        points,
        grouped,
        features,
        cands,
        range,
        KernelVariant::lanes(lane_width)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::columnar::{build_feature_columns, Feature};
    use crate::filter::match_cells;
    use crate::geometry::Point2D;
    use crate::grid::{build_cell_feature_pairs, group_points, GridSpec};

    fn p(x: f64, y: f64) -> Point2D {
        Point2D::new(x, y)
    }

    struct Fixture {
        points: PointColumns,
        grouped: CellGroupedPoints,
        feats: FeatureColumns,
        cands: CandidatePairs,
    }

    fn fixture_with_cells(points: &[Point2D], lines: Vec<Feature>, range: f64, cell: f64) -> Fixture {
        let points = PointColumns::from_points(points).unwrap();
        let feats = build_feature_columns(FeatureKind::Polyline, &lines).unwrap();
        let grid = GridSpec::covering(&points, &feats, range, Some(cell)).unwrap();
        let grouped = group_points(&points, &grid).unwrap();
        let pairs = build_cell_feature_pairs(&feats, &grid, range).unwrap();
        let cands = match_cells(&grouped, &pairs);
        Fixture {
            points,
            grouped,
            feats,
            cands,
        }
    }

    fn fixture(points: &[Point2D], lines: Vec<Feature>, range: f64) -> Fixture {
        fixture_with_cells(points, lines, range, 1.0)
    }

    fn two_lines() -> Vec<Feature> {
        vec![
            Feature::new(10, vec![vec![p(0.0, 1.0), p(1.0, 1.0)]]),
            Feature::new(20, vec![vec![p(3.0, 0.0), p(4.0, 0.0)]]),
        ]
    }

    fn scalar(f: &Fixture, r: f64) -> P2PResult {
        p2p_scalar(&f.points, &f.grouped, &f.feats, &f.cands, r).unwrap()
    }

    #[test]
    fn nearest_within_range() {
        let f = fixture(&[p(0.0, 0.0)], two_lines(), 2.0);
        let r = scalar(&f, 2.0);
        assert_eq!(
            r.matches,
            vec![Some(NearestMatch {
                feature_id: 10,
                distance: 1.0
            })]
        );
    }

    #[test]
    fn nothing_within_range() {
        let f = fixture(&[p(0.0, 0.0)], two_lines(), 0.5);
        assert_eq!(scalar(&f, 0.5).matches, vec![None]);
    }

    #[test]
    fn point_on_polyline() {
        let f = fixture(&[p(3.5, 0.0)], two_lines(), 1.0);
        assert_eq!(
            scalar(&f, 1.0).matches,
            vec![Some(NearestMatch {
                feature_id: 20,
                distance: 0.0
            })]
        );
    }

    #[test]
    fn ties_go_to_first_candidate() {
        let lines = vec![
            Feature::new(7, vec![vec![p(0.0, 1.0), p(1.0, 1.0)]]),
            Feature::new(3, vec![vec![p(0.0, -1.0), p(1.0, -1.0)]]),
        ];
        let f = fixture(&[p(0.5, 0.0)], lines, 2.0);
        assert_eq!(scalar(&f, 2.0).matches[0].unwrap().feature_id, 7);
    }

    #[test]
    fn lanes_match_scalar_with_masked_tail() {
        // three points in one cell, four lanes: one masked lane
        let pts = [p(0.1, 0.2), p(0.5, 0.6), p(0.9, 0.3)];
        let lines = vec![
            Feature::new(1, vec![vec![p(0.0, 1.5), p(1.0, 1.4), p(2.0, 3.0)]]),
            Feature::new(2, vec![vec![p(0.5, -0.5)]]),
        ];
        let f = fixture_with_cells(&pts, lines, 2.0, 50.0);
        assert_eq!(f.cands.group_count(), 1);
        let want = scalar(&f, 2.0);
        for w in [1, 2, 3, 4, 8] {
            let got = p2p_lanes(&f.points, &f.grouped, &f.feats, &f.cands, 2.0, w).unwrap();
            assert!(got.bit_identical(&want), "lane width {w}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let f = fixture(&[p(0.0, 0.0)], two_lines(), 1.0);
        assert!(p2p_scalar(&f.points, &f.grouped, &f.feats, &f.cands, 0.0).is_err());
        assert!(p2p_lanes(&f.points, &f.grouped, &f.feats, &f.cands, 1.0, 0).is_err());
        let polys = build_feature_columns(
            FeatureKind::Polygon,
            &[Feature::new(1, vec![vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)]])],
        )
        .unwrap();
        assert!(matches!(
            p2p_scalar(&f.points, &f.grouped, &polys, &f.cands, 1.0),
            Err(JoinError::Usage(_))
        ));
        let fewer = PointColumns::default();
        assert!(p2p_scalar(&fewer, &f.grouped, &f.feats, &f.cands, 1.0).is_err());
    }
}
