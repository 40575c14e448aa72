//! Brute-force reference implementations shared by the integration tests.
//!
//! Nothing here goes through the grid, the filter or the columnar kernels:
//! every oracle walks all (point, feature) pairs over row-form features.

#![allow(dead_code)]

use gridjoin::{Feature, FeatureId, Point2D, PointColumns};

/// Squared distance from `p` to segment `a..b`.
///
/// Same closed-form as the library: endpoints in lexicographic order, the
/// projection clamped by comparing the dot product against the squared
/// length. Restated here so distance bits can be compared exactly.
pub fn seg_dist_sq(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let (a, b) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let (wx, wy) = (p.x - a.x, p.y - a.y);
    let len_sq = dx * dx + dy * dy;
    let dot = wx * dx + wy * dy;
    if len_sq == 0.0 || dot <= 0.0 {
        wx * wx + wy * wy
    } else if dot >= len_sq {
        let (ux, uy) = (p.x - b.x, p.y - b.y);
        ux * ux + uy * uy
    } else {
        let t = dot / len_sq;
        let (ex, ey) = (wx - t * dx, wy - t * dy);
        ex * ex + ey * ey
    }
}

pub fn polyline_dist_sq(p: Point2D, line: &[Point2D]) -> f64 {
    if line.len() == 1 {
        let (dx, dy) = (p.x - line[0].x, p.y - line[0].y);
        return dx * dx + dy * dy;
    }
    let mut best = f64::INFINITY;
    for w in line.windows(2) {
        let d = seg_dist_sq(p, w[0], w[1]);
        if d < best {
            best = d;
        }
    }
    best
}

/// Nearest polyline within `range` for one point, with every id at the exact
/// minimum distance.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleNearest {
    pub dist_sq: f64,
    pub tied_ids: Vec<FeatureId>,
}

impl OracleNearest {
    pub fn min_id(&self) -> FeatureId {
        *self.tied_ids.iter().min().expect("nonempty tie set")
    }
}

pub fn brute_p2p(points: &PointColumns, lines: &[Feature], range: f64) -> Vec<Option<OracleNearest>> {
    let range_sq = range * range;
    points
        .iter()
        .map(|p| {
            let mut best: Option<OracleNearest> = None;
            for f in lines {
                let d = polyline_dist_sq(p, &f.rings[0]);
                match &mut best {
                    Some(b) if d == b.dist_sq => b.tied_ids.push(f.id),
                    Some(b) if d > b.dist_sq => {}
                    _ => {
                        best = Some(OracleNearest {
                            dist_sq: d,
                            tied_ids: vec![f.id],
                        })
                    }
                }
            }
            best.filter(|b| b.dist_sq <= range_sq)
        })
        .collect()
}

/// Unbounded nearest squared distance per point.
pub fn nearest_dist_sq(points: &PointColumns, lines: &[Feature]) -> Vec<f64> {
    points
        .iter()
        .map(|p| {
            lines
                .iter()
                .map(|f| polyline_dist_sq(p, &f.rings[0]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Textbook even-odd crossing test over one ring.
pub fn ring_crossings(p: Point2D, ring: &[Point2D]) -> bool {
    let mut inside = false;
    let mut j = ring.len() - 1;
    for i in 0..ring.len() {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

pub fn polygon_contains(p: Point2D, poly: &Feature) -> bool {
    poly.rings.iter().fold(false, |acc, r| acc ^ ring_crossings(p, r))
}

fn bbox(poly: &Feature) -> (f64, f64, f64, f64) {
    poly.rings.iter().flatten().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(x1, y1, x2, y2), v| (x1.min(v.x), y1.min(v.y), x2.max(v.x), y2.max(v.y)),
    )
}

/// Minimum distance from `p` to any edge of any ring of `poly`.
pub fn edge_distance(p: Point2D, poly: &Feature) -> f64 {
    let mut best = f64::INFINITY;
    for ring in &poly.rings {
        for i in 0..ring.len() {
            let d = seg_dist_sq(p, ring[i], ring[(i + 1) % ring.len()]);
            best = best.min(d);
        }
    }
    best.sqrt()
}

/// Per point: smallest containing polygon id, and whether the point lies
/// within `eps` of some edge.
pub fn brute_pip(points: &PointColumns, polys: &[Feature], eps: f64) -> Vec<(Option<FeatureId>, bool)> {
    let boxes: Vec<_> = polys.iter().map(bbox).collect();
    points
        .iter()
        .map(|p| {
            let mut best: Option<FeatureId> = None;
            let mut near_edge = false;
            for (poly, &(x1, y1, x2, y2)) in polys.iter().zip(&boxes) {
                // a point outside the box by more than eps is neither inside nor near an edge
                if p.x < x1 - eps || p.x > x2 + eps || p.y < y1 - eps || p.y > y2 + eps {
                    continue;
                }
                near_edge |= edge_distance(p, poly) <= eps;
                if polygon_contains(p, poly) {
                    best = Some(best.map_or(poly.id, |b| b.min(poly.id)));
                }
            }
            (best, near_edge)
        })
        .collect()
}
