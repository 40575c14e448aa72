//! Structure-of-arrays containers for points and features, plus the scan and
//! sort-by-key primitives used to build them.

use std::collections::HashSet;
use std::ops::Range;

use crate::error::{JoinError, Result};
use crate::geometry::{Mbb, Point2D};

pub type FeatureId = u64;
pub type CellId = u64;

/// Point coordinates stored column-wise as `f32`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointColumns {
    xs: Vec<f32>,
    ys: Vec<f32>,
}

impl PointColumns {
    pub fn new(xs: Vec<f32>, ys: Vec<f32>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(JoinError::usage(format!(
                "coordinate columns differ in length ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        if let Some(i) = (0..xs.len()).find(|&i| !(xs[i].is_finite() && ys[i].is_finite())) {
            return Err(JoinError::validation(format!("point {i} has a non-finite coordinate")));
        }
        Ok(Self { xs, ys })
    }

    pub fn from_points(points: &[Point2D]) -> Result<Self> {
        let xs = points.iter().map(|p| p.x as f32).collect();
        let ys = points.iter().map(|p| p.y as f32).collect();
        Self::new(xs, ys)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f32] {
        &self.xs
    }

    pub fn ys(&self) -> &[f32] {
        &self.ys
    }

    pub fn point(&self, i: usize) -> Point2D {
        Point2D::new(self.xs[i] as f64, self.ys[i] as f64)
    }

    pub fn iter(&self) -> impl Iterator<Item = Point2D> + '_ {
        self.xs
            .iter()
            .zip(&self.ys)
            .map(|(&x, &y)| Point2D::new(x as f64, y as f64))
    }

    /// Bounding box of all points, `None` when empty.
    pub fn mbb(&self) -> Option<Mbb> {
        let mut it = self.iter();
        let mut m = Mbb::of_point(it.next()?);
        for p in it {
            m.include(p.x, p.y);
        }
        Some(m)
    }

    /// New columns holding `self[order[0]], self[order[1]], ...`.
    pub fn gather(&self, order: &[usize]) -> PointColumns {
        PointColumns {
            xs: order.iter().map(|&i| self.xs[i]).collect(),
            ys: order.iter().map(|&i| self.ys[i]).collect(),
        }
    }
}

/// `out[i] = counts[0] + ... + counts[i - 1]`.
pub fn exclusive_prefix_sum(counts: &[usize]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(counts.len());
    let mut acc = 0usize;
    for &c in counts {
        out.push(acc);
        acc = acc
            .checked_add(c)
            .ok_or_else(|| JoinError::Size("prefix sum overflowed".into()))?;
    }
    Ok(out)
}

/// Output of [`group_by_key`]: one segment per distinct key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyGroups {
    pub keys: Vec<u64>,
    pub starts: Vec<usize>,
    pub counts: Vec<usize>,
    pub values: Vec<usize>,
}

/// Stable sort-by-key followed by segment detection.
///
/// Values sharing a key keep their input relative order.
pub fn group_by_key(keys: &[u64], values: &[usize]) -> Result<KeyGroups> {
    if keys.len() != values.len() {
        return Err(JoinError::usage(format!(
            "group_by_key: {} keys but {} values",
            keys.len(),
            values.len()
        )));
    }
    // Sorting on (key, input position) is total, so an unstable sort yields
    // the stable order.
    let mut order: Vec<(u64, usize)> = keys.iter().copied().zip(0..).collect();
    order.sort_unstable();

    let mut out = KeyGroups {
        values: order.iter().map(|&(_, i)| values[i]).collect(),
        ..KeyGroups::default()
    };
    for (pos, &(key, _)) in order.iter().enumerate() {
        if out.keys.last() != Some(&key) {
            out.keys.push(key);
            out.starts.push(pos);
            out.counts.push(0);
        }
        *out.counts.last_mut().unwrap() += 1;
    }
    Ok(out)
}

/// Points bucketed by grid cell: distinct occupied cells in ascending order,
/// each owning a contiguous run of the cell-sorted point order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CellGroupedPoints {
    /// Distinct occupied cell ids, strictly increasing.
    pub cell_ids: Vec<CellId>,
    /// Start of each cell's run in the sorted order.
    pub starts: Vec<usize>,
    pub counts: Vec<usize>,
    /// Sorted position -> original point index.
    pub perm: Vec<usize>,
}

impl CellGroupedPoints {
    /// Group points by their cell. Points with `None` (outside the grid) are
    /// left out of every group.
    pub fn from_cells(cells: &[Option<CellId>]) -> Result<Self> {
        let (keys, idx): (Vec<CellId>, Vec<usize>) =
            cells.iter().enumerate().filter_map(|(i, c)| c.map(|c| (c, i))).unzip();
        let g = group_by_key(&keys, &idx)?;
        Ok(Self {
            cell_ids: g.keys,
            starts: g.starts,
            counts: g.counts,
            perm: g.values,
        })
    }

    pub fn group_count(&self) -> usize {
        self.cell_ids.len()
    }

    /// Number of points that landed inside the grid.
    pub fn point_count(&self) -> usize {
        self.perm.len()
    }

    /// Sorted-order positions owned by group `g`.
    pub fn group_range(&self, g: usize) -> Range<usize> {
        self.starts[g]..self.starts[g] + self.counts[g]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Polyline,
    Polygon,
}

impl FeatureKind {
    pub fn min_ring_vertices(self) -> usize {
        match self {
            FeatureKind::Polyline => 1,
            FeatureKind::Polygon => 3,
        }
    }
}

/// A feature in row form: the builder input and the reconstruction output.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub id: FeatureId,
    pub rings: Vec<Vec<Point2D>>,
}

impl Feature {
    pub fn new(id: FeatureId, rings: Vec<Vec<Point2D>>) -> Self {
        Self { id, rings }
    }
}

/// Polylines or polygons in flat columnar form.
///
/// Rings of feature `f` are `ring_offsets[f]..ring_offsets[f] + ring_counts[f]`;
/// vertices of ring `r` are `ring_starts[r]..ring_starts[r] + ring_vertex_counts[r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureColumns {
    kind: FeatureKind,
    pub feature_ids: Vec<FeatureId>,
    pub ring_counts: Vec<usize>,
    pub ring_vertex_counts: Vec<usize>,
    pub ring_starts: Vec<usize>,
    pub vxs: Vec<f32>,
    pub vys: Vec<f32>,
    ring_offsets: Vec<usize>,
}

impl FeatureColumns {
    pub fn empty(kind: FeatureKind) -> Self {
        Self {
            kind,
            feature_ids: Vec::new(),
            ring_counts: Vec::new(),
            ring_vertex_counts: Vec::new(),
            ring_starts: Vec::new(),
            vxs: Vec::new(),
            vys: Vec::new(),
            ring_offsets: Vec::new(),
        }
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feature_ids.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.vxs.len()
    }

    pub fn id(&self, pos: usize) -> FeatureId {
        self.feature_ids[pos]
    }

    pub fn ring_range(&self, pos: usize) -> Range<usize> {
        self.ring_offsets[pos]..self.ring_offsets[pos] + self.ring_counts[pos]
    }

    /// Vertex range spanning every ring of feature `pos`.
    pub fn vertex_range(&self, pos: usize) -> Range<usize> {
        let rings = self.ring_range(pos);
        let lo = self.ring_starts[rings.start];
        let last = rings.end - 1;
        lo..self.ring_starts[last] + self.ring_vertex_counts[last]
    }

    /// Coordinate slices of ring `r` (a global ring index).
    #[inline]
    pub fn ring(&self, r: usize) -> (&[f32], &[f32]) {
        let s = self.ring_starts[r];
        let e = s + self.ring_vertex_counts[r];
        (&self.vxs[s..e], &self.vys[s..e])
    }

    pub fn rings(&self, pos: usize) -> impl Iterator<Item = (&[f32], &[f32])> + '_ {
        self.ring_range(pos).map(move |r| self.ring(r))
    }

    /// Bounding box of all vertices of feature `pos`.
    pub fn mbb(&self, pos: usize) -> Mbb {
        let vr = self.vertex_range(pos);
        let mut m = Mbb::of_point(Point2D::new(self.vxs[vr.start] as f64, self.vys[vr.start] as f64));
        for i in vr {
            m.include(self.vxs[i] as f64, self.vys[i] as f64);
        }
        m
    }

    pub fn feature(&self, pos: usize) -> Feature {
        let rings = self
            .rings(pos)
            .map(|(xs, ys)| {
                xs.iter()
                    .zip(ys)
                    .map(|(&x, &y)| Point2D::new(x as f64, y as f64))
                    .collect()
            })
            .collect();
        Feature::new(self.id(pos), rings)
    }

    pub fn to_features(&self) -> Vec<Feature> {
        (0..self.len()).map(|pos| self.feature(pos)).collect()
    }
}

/// Flatten features into columns, validating ring minimums and id uniqueness.
///
/// Coordinates are narrowed to `f32`; reconstruction is exact for inputs that
/// are already `f32`-representable.
pub fn build_feature_columns(kind: FeatureKind, features: &[Feature]) -> Result<FeatureColumns> {
    let mut cols = FeatureColumns::empty(kind);
    let mut seen = HashSet::with_capacity(features.len());
    let min_vertices = kind.min_ring_vertices();

    for f in features {
        if !seen.insert(f.id) {
            return Err(JoinError::validation(format!("duplicate feature id {}", f.id)));
        }
        match (kind, f.rings.len()) {
            (_, 0) => {
                return Err(JoinError::validation(format!("feature {} has no rings", f.id)));
            }
            (FeatureKind::Polyline, n) if n != 1 => {
                return Err(JoinError::validation(format!(
                    "polyline {} must have exactly one ring, got {n}",
                    f.id
                )));
            }
            _ => {}
        }
        for (ri, ring) in f.rings.iter().enumerate() {
            if ring.len() < min_vertices {
                return Err(JoinError::validation(format!(
                    "feature {} ring {ri} has {} vertices, need at least {min_vertices}",
                    f.id,
                    ring.len()
                )));
            }
            for v in ring {
                let (x, y) = (v.x as f32, v.y as f32);
                if !(x.is_finite() && y.is_finite()) {
                    return Err(JoinError::validation(format!(
                        "feature {} has a non-finite vertex",
                        f.id
                    )));
                }
                cols.vxs.push(x);
                cols.vys.push(y);
            }
            cols.ring_vertex_counts.push(ring.len());
        }
        cols.feature_ids.push(f.id);
        cols.ring_counts.push(f.rings.len());
    }
    cols.ring_starts = exclusive_prefix_sum(&cols.ring_vertex_counts)?;
    cols.ring_offsets = exclusive_prefix_sum(&cols.ring_counts)?;
    Ok(cols)
}
