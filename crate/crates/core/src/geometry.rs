//! Scalar geometry kernels shared by every refinement path.
//!
//! All arithmetic is carried out in `f64`. Columnar storage keeps `f32`
//! coordinates, so the `*_xy` variants widen on load and then call the same
//! inline edge/segment routines as the [`Point2D`] API. Scalar and lane-batched
//! refinement therefore execute the identical sequence of floating point
//! operations for every (point, edge) pair.

use crate::error::{JoinError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance_sq(&self, other: &Point2D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

impl From<(f64, f64)> for Point2D {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Axis-aligned minimum bounding box `(x1, y1, x2, y2)` with `x1 <= x2`, `y1 <= y2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mbb {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Mbb {
    pub const fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    pub fn of_point(p: Point2D) -> Self {
        Self::new(p.x, p.y, p.x, p.y)
    }

    pub fn include(&mut self, x: f64, y: f64) {
        self.x1 = self.x1.min(x);
        self.y1 = self.y1.min(y);
        self.x2 = self.x2.max(x);
        self.y2 = self.y2.max(y);
    }

    pub fn union(&self, other: &Mbb) -> Mbb {
        Mbb::new(
            self.x1.min(other.x1),
            self.y1.min(other.y1),
            self.x2.max(other.x2),
            self.y2.max(other.y2),
        )
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    /// Grow the box by `r` on every side.
    pub fn expand(&self, r: f64) -> Result<Mbb> {
        mbb_expand(self, r)
    }

    pub fn contains(&self, p: Point2D) -> bool {
        p.x >= self.x1 && p.x <= self.x2 && p.y >= self.y1 && p.y <= self.y2
    }
}

/// A segment with its endpoints in lexicographic order, so that every
/// distance computed from it is bit-identical under an endpoint swap.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    ax: f64,
    ay: f64,
    bx: f64,
    by: f64,
    dx: f64,
    dy: f64,
    len_sq: f64,
}

impl Segment {
    #[inline(always)]
    pub fn new(ax: f64, ay: f64, bx: f64, by: f64) -> Self {
        let ((ax, ay), (bx, by)) = if (ax, ay) <= (bx, by) {
            ((ax, ay), (bx, by))
        } else {
            ((bx, by), (ax, ay))
        };
        let dx = bx - ax;
        let dy = by - ay;
        Self {
            ax,
            ay,
            bx,
            by,
            dx,
            dy,
            len_sq: dx * dx + dy * dy,
        }
    }

    /// Squared distance from `(px, py)`: the projection parameter is clamped
    /// to the segment, and a zero-length segment degenerates to point distance.
    #[inline(always)]
    pub fn distance_sq(&self, px: f64, py: f64) -> f64 {
        let wx = px - self.ax;
        let wy = py - self.ay;
        let dot = wx * self.dx + wy * self.dy;
        if self.len_sq == 0.0 || dot <= 0.0 {
            return wx * wx + wy * wy;
        }
        if dot >= self.len_sq {
            let ux = px - self.bx;
            let uy = py - self.by;
            return ux * ux + uy * uy;
        }
        let t = dot / self.len_sq;
        let ex = wx - t * self.dx;
        let ey = wy - t * self.dy;
        ex * ex + ey * ey
    }

    /// [`Segment::distance_sq`] evaluating all three cases and selecting one,
    /// for lane loops. Returns the same bits.
    #[inline(always)]
    pub fn distance_sq_select(&self, px: f64, py: f64) -> f64 {
        let wx = px - self.ax;
        let wy = py - self.ay;
        let dot = wx * self.dx + wy * self.dy;
        let to_a = wx * wx + wy * wy;
        let ux = px - self.bx;
        let uy = py - self.by;
        let to_b = ux * ux + uy * uy;
        let t = dot / self.len_sq;
        let ex = wx - t * self.dx;
        let ey = wy - t * self.dy;
        let inner = ex * ex + ey * ey;
        let past_b = if dot >= self.len_sq { to_b } else { inner };
        if self.len_sq == 0.0 || dot <= 0.0 {
            to_a
        } else {
            past_b
        }
    }
}

/// Squared distance from `(px, py)` to the closed segment `a..b`.
#[inline(always)]
pub fn segment_distance_sq(px: f64, py: f64, ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    Segment::new(ax, ay, bx, by).distance_sq(px, py)
}

/// A ring edge prepared for horizontal ray tests, oriented from its lower
/// endpoint so the answer does not depend on edge direction.
#[derive(Debug, Clone, Copy)]
pub struct RayEdge {
    lx: f64,
    ly: f64,
    hy: f64,
    dx: f64,
    dy: f64,
}

impl RayEdge {
    #[inline(always)]
    pub fn new(ax: f64, ay: f64, bx: f64, by: f64) -> Self {
        let ((lx, ly), (hx, hy)) = if ay < by {
            ((ax, ay), (bx, by))
        } else {
            ((bx, by), (ax, ay))
        };
        Self {
            lx,
            ly,
            hy,
            dx: hx - lx,
            dy: hy - ly,
        }
    }

    /// Does the edge cross the ray leaving `(px, py)` towards +x?
    ///
    /// Half-open rule: exactly one endpoint strictly above `py`, and the
    /// edge's x at `py` strictly right of `px`.
    #[inline(always)]
    pub fn crosses(&self, px: f64, py: f64) -> bool {
        (self.ly > py) != (self.hy > py) && px < self.dx * (py - self.ly) / self.dy + self.lx
    }

    /// Can any point with y in `[y_lo, y_hi]` straddle this edge?
    #[inline(always)]
    pub fn spans(&self, y_lo: f64, y_hi: f64) -> bool {
        y_hi >= self.ly.min(self.hy) && y_lo < self.ly.max(self.hy)
    }

    /// [`RayEdge::crosses`] without the short circuit, for lane loops.
    #[inline(always)]
    pub fn crosses_select(&self, px: f64, py: f64) -> bool {
        ((self.ly > py) != (self.hy > py)) & (px < self.dx * (py - self.ly) / self.dy + self.lx)
    }
}

/// Does the edge `a..b` cross the horizontal ray leaving `(px, py)` towards +x?
#[inline(always)]
pub fn edge_crosses(px: f64, py: f64, ax: f64, ay: f64, bx: f64, by: f64) -> bool {
    RayEdge::new(ax, ay, bx, by).crosses(px, py)
}

pub fn point_segment_distance_sq(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    segment_distance_sq(p.x, p.y, a.x, a.y, b.x, b.y)
}

pub fn point_polyline_distance_sq(p: Point2D, vertices: &[Point2D]) -> Result<f64> {
    match vertices {
        [] => Err(JoinError::usage("polyline has no vertices")),
        [v] => Ok(p.distance_sq(v)),
        _ => Ok(vertices
            .windows(2)
            .map(|w| point_segment_distance_sq(p, w[0], w[1]))
            .fold(f64::INFINITY, min_strict)),
    }
}

/// Columnar counterpart of [`point_polyline_distance_sq`]. `xs` must be nonempty.
#[inline]
pub fn polyline_distance_sq_xy(px: f64, py: f64, xs: &[f32], ys: &[f32]) -> f64 {
    debug_assert!(!xs.is_empty() && xs.len() == ys.len());
    if xs.len() == 1 {
        let dx = px - xs[0] as f64;
        let dy = py - ys[0] as f64;
        return dx * dx + dy * dy;
    }
    let mut best = f64::INFINITY;
    for i in 1..xs.len() {
        let d = segment_distance_sq(px, py, xs[i - 1] as f64, ys[i - 1] as f64, xs[i] as f64, ys[i] as f64);
        best = min_strict(best, d);
    }
    best
}

/// `a` unless `b` is strictly smaller. Every path reduces with this helper.
#[inline(always)]
pub fn min_strict(a: f64, b: f64) -> f64 {
    if b < a {
        b
    } else {
        a
    }
}

/// Crossing parity of `p` against an implicitly closed ring: `true` when odd.
pub fn ray_crossing_ring(p: Point2D, ring: &[Point2D]) -> Result<bool> {
    if ring.len() < 3 {
        return Err(JoinError::usage(format!(
            "ring needs at least 3 vertices, got {}",
            ring.len()
        )));
    }
    let mut odd = false;
    let mut prev = ring[ring.len() - 1];
    for &v in ring {
        odd ^= edge_crosses(p.x, p.y, prev.x, prev.y, v.x, v.y);
        prev = v;
    }
    Ok(odd)
}

/// Columnar counterpart of [`ray_crossing_ring`]. The ring must have at least 3 vertices.
#[inline]
pub fn ring_parity_xy(px: f64, py: f64, xs: &[f32], ys: &[f32]) -> bool {
    debug_assert!(xs.len() >= 3 && xs.len() == ys.len());
    let n = xs.len();
    let mut odd = false;
    let (mut ax, mut ay) = (xs[n - 1] as f64, ys[n - 1] as f64);
    for i in 0..n {
        let (bx, by) = (xs[i] as f64, ys[i] as f64);
        odd ^= edge_crosses(px, py, ax, ay, bx, by);
        ax = bx;
        ay = by;
    }
    odd
}

/// Even-odd containment over all rings of a polygon (outer ring first, then holes).
pub fn point_in_polygon<R: AsRef<[Point2D]>>(p: Point2D, rings: &[R]) -> Result<bool> {
    let mut inside = false;
    for ring in rings {
        inside ^= ray_crossing_ring(p, ring.as_ref())?;
    }
    Ok(inside)
}

pub fn mbb_of(vertices: &[Point2D]) -> Result<Mbb> {
    let (first, rest) = vertices
        .split_first()
        .ok_or_else(|| JoinError::usage("cannot bound an empty vertex list"))?;
    let mut m = Mbb::of_point(*first);
    for v in rest {
        m.include(v.x, v.y);
    }
    Ok(m)
}

pub fn mbb_expand(m: &Mbb, r: f64) -> Result<Mbb> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(JoinError::usage(format!(
            "expansion range must be finite and non-negative, got {r}"
        )));
    }
    Ok(Mbb::new(m.x1 - r, m.y1 - r, m.x2 + r, m.y2 + r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2D {
        Point2D::new(x, y)
    }

    fn unit_square() -> Vec<Point2D> {
        vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]
    }

    fn square(lo: f64, hi: f64) -> Vec<Point2D> {
        vec![p(lo, lo), p(hi, lo), p(hi, hi), p(lo, hi)]
    }

    #[test]
    fn segment_distance_examples() {
        assert_eq!(point_segment_distance_sq(p(0.0, 0.5), p(1.0, 0.0), p(1.0, 1.0)), 1.0);
        assert_eq!(point_segment_distance_sq(p(2.0, 2.0), p(0.0, 0.0), p(1.0, 0.0)), 5.0);
        assert_eq!(point_segment_distance_sq(p(0.3, 0.0), p(0.0, 0.0), p(1.0, 0.0)), 0.0);
    }

    #[test]
    fn degenerate_segment_is_point_distance() {
        let a = p(1.0, 1.0);
        assert_eq!(point_segment_distance_sq(p(4.0, 5.0), a, a), 25.0);
    }

    #[test]
    fn polyline_distance_examples() {
        assert_eq!(point_polyline_distance_sq(p(0.0, 0.0), &[p(1.0, 0.0)]).unwrap(), 1.0);
        let l = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 2.0)];
        assert_eq!(point_polyline_distance_sq(p(0.5, 1.0), &l).unwrap(), 0.25);
        let l = [p(0.0, 0.0), p(1.0, 0.0)];
        assert_eq!(point_polyline_distance_sq(p(5.0, 5.0), &l).unwrap(), 41.0);
    }

    #[test]
    fn empty_polyline_is_usage_error() {
        assert!(matches!(
            point_polyline_distance_sq(p(0.0, 0.0), &[]),
            Err(JoinError::Usage(_))
        ));
    }

    #[test]
    fn ring_parity_examples() {
        let sq = unit_square();
        assert!(ray_crossing_ring(p(0.5, 0.5), &sq).unwrap());
        assert!(!ray_crossing_ring(p(2.0, 2.0), &sq).unwrap());
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert!(ray_crossing_ring(p(0.5, 0.5), &rev).unwrap());
    }

    #[test]
    fn short_ring_is_usage_error() {
        assert!(ray_crossing_ring(p(0.0, 0.0), &[p(0.0, 0.0), p(1.0, 1.0)]).is_err());
        assert!(point_in_polygon(p(0.0, 0.0), &[vec![p(0.0, 0.0)]]).is_err());
    }

    #[test]
    fn polygon_with_hole() {
        let outer = unit_square();
        let hole = square(0.25, 0.75);
        assert!(point_in_polygon(p(0.5, 0.5), std::slice::from_ref(&outer)).unwrap());
        assert!(!point_in_polygon(p(0.5, 0.5), &[outer.clone(), hole.clone()]).unwrap());
        assert!(point_in_polygon(p(0.1, 0.1), &[outer, hole]).unwrap());
    }

    #[test]
    fn columnar_variants_match_point_api() {
        let ring = [p(0.0, 0.0), p(4.0, 0.0), p(4.0, 3.0), p(1.0, 4.0)];
        let xs: Vec<f32> = ring.iter().map(|v| v.x as f32).collect();
        let ys: Vec<f32> = ring.iter().map(|v| v.y as f32).collect();
        for q in [p(1.0, 1.0), p(3.9, 3.5), p(-1.0, 2.0), p(2.0, 3.9)] {
            assert_eq!(ring_parity_xy(q.x, q.y, &xs, &ys), ray_crossing_ring(q, &ring).unwrap());
            assert_eq!(
                polyline_distance_sq_xy(q.x, q.y, &xs, &ys).to_bits(),
                point_polyline_distance_sq(q, &ring).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn mbb_examples() {
        assert_eq!(mbb_of(&[p(1.0, 2.0)]).unwrap(), Mbb::new(1.0, 2.0, 1.0, 2.0));
        assert_eq!(
            mbb_of(&[p(0.0, 0.0), p(3.0, 1.0), p(1.0, 4.0)]).unwrap(),
            Mbb::new(0.0, 0.0, 3.0, 4.0)
        );
        assert_eq!(
            mbb_of(&[p(-1.0, -1.0), p(-2.0, -3.0)]).unwrap(),
            Mbb::new(-2.0, -3.0, -1.0, -1.0)
        );
        assert!(mbb_of(&[]).is_err());
    }

    #[test]
    fn mbb_expand_examples() {
        let unit = Mbb::new(0.0, 0.0, 1.0, 1.0);
        assert_eq!(mbb_expand(&unit, 0.0).unwrap(), unit);
        assert_eq!(mbb_expand(&unit, 0.5).unwrap(), Mbb::new(-0.5, -0.5, 1.5, 1.5));
        assert_eq!(
            mbb_expand(&Mbb::new(2.0, 2.0, 2.0, 2.0), 1.0).unwrap(),
            Mbb::new(1.0, 1.0, 3.0, 3.0)
        );
        assert!(mbb_expand(&unit, -0.1).is_err());
        assert!(mbb_expand(&unit, f64::NAN).is_err());
    }

    #[test]
    fn mbb_expand_composes_on_representable_values() {
        let m = Mbb::new(-3.25, 1.5, 7.0, 9.75);
        let twice = mbb_expand(&mbb_expand(&m, 0.5).unwrap(), 1.25).unwrap();
        assert_eq!(twice, mbb_expand(&m, 1.75).unwrap());
    }

    proptest! {
        #[test]
        fn segment_distance_is_endpoint_symmetric(
            px in -1e3f64..1e3, py in -1e3f64..1e3,
            ax in -1e3f64..1e3, ay in -1e3f64..1e3,
            bx in -1e3f64..1e3, by in -1e3f64..1e3,
        ) {
            let d1 = segment_distance_sq(px, py, ax, ay, bx, by);
            let d2 = segment_distance_sq(px, py, bx, by, ax, ay);
            prop_assert_eq!(d1.to_bits(), d2.to_bits());
            let ends = ((px - ax).powi(2) + (py - ay).powi(2))
                .min((px - bx).powi(2) + (py - by).powi(2));
            prop_assert!(d1 <= ends * (1.0 + 1e-9));
        }

        #[test]
        fn select_variants_return_same_bits(
            px in -10f64..10.0, py in -10f64..10.0,
            ax in -10f64..10.0, ay in -10f64..10.0,
            bx in -10f64..10.0, by in -10f64..10.0,
            degenerate in any::<bool>(),
        ) {
            let (bx, by) = if degenerate { (ax, ay) } else { (bx, by) };
            let s = Segment::new(ax, ay, bx, by);
            prop_assert_eq!(s.distance_sq(px, py).to_bits(), s.distance_sq_select(px, py).to_bits());
            let e = RayEdge::new(ax, ay, bx, by);
            prop_assert_eq!(e.crosses(px, py), e.crosses_select(px, py));
            if e.crosses(px, py) {
                prop_assert!(e.spans(py, py) && e.spans(py - 1.0, py + 1.0));
            }
            // horizontal edge through the point's row never counts
            let h = RayEdge::new(ax, py, bx, py);
            prop_assert!(!h.crosses_select(px, py));
        }

        #[test]
        fn edge_crossing_ignores_direction(
            px in -10f64..10.0, py in -10f64..10.0,
            ax in -10f64..10.0, ay in -10f64..10.0,
            bx in -10f64..10.0, by in -10f64..10.0,
        ) {
            prop_assert_eq!(
                edge_crosses(px, py, ax, ay, bx, by),
                edge_crosses(px, py, bx, by, ax, ay)
            );
        }
    }
}
