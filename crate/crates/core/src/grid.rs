//! Uniform grid tessellation: point bucketing, MBB rasterization and the
//! feature-side (cell, feature) pair list.

use std::ops::Range;

use crate::columnar::{CellGroupedPoints, CellId, FeatureColumns, PointColumns};
use crate::error::{JoinError, Result};
use crate::geometry::{mbb_expand, Mbb, Point2D};

/// Row-major uniform grid of square cells anchored at `(origin_x, origin_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub ncols: u64,
    pub nrows: u64,
}

impl GridSpec {
    pub fn new(origin_x: f64, origin_y: f64, cell_size: f64, ncols: u64, nrows: u64) -> Result<Self> {
        if !(origin_x.is_finite() && origin_y.is_finite()) {
            return Err(JoinError::usage("grid origin must be finite"));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(JoinError::usage(format!("cell size must be positive, got {cell_size}")));
        }
        if ncols == 0 || nrows == 0 {
            return Err(JoinError::usage("grid needs at least one row and one column"));
        }
        if ncols.checked_mul(nrows).is_none() {
            return Err(JoinError::Size(format!(
                "{ncols} x {nrows} cells overflow the cell id type"
            )));
        }
        Ok(Self {
            origin_x,
            origin_y,
            cell_size,
            ncols,
            nrows,
        })
    }

    /// Grid covering the points and every feature MBB expanded by `expand_r`,
    /// padded by one cell on each side.
    ///
    /// Without an explicit `cell_size`, cells are sized for roughly 16 points
    /// each: `sqrt(extent_area / max(points, 1)) * 4`.
    pub fn covering(
        points: &PointColumns,
        features: &FeatureColumns,
        expand_r: f64,
        cell_size: Option<f64>,
    ) -> Result<Self> {
        let mut extent = points.mbb();
        for pos in 0..features.len() {
            let m = mbb_expand(&features.mbb(pos), expand_r)?;
            extent = Some(extent.map_or(m, |e| e.union(&m)));
        }
        let extent = extent.unwrap_or(Mbb::new(0.0, 0.0, 0.0, 0.0));
        let cs = match cell_size {
            Some(cs) => cs,
            None => default_cell_size(&extent, points.len()),
        };
        if !(cs > 0.0 && cs.is_finite()) {
            return Err(JoinError::usage(format!("cell size must be positive, got {cs}")));
        }
        let origin_x = extent.x1 - cs;
        let origin_y = extent.y1 - cs;
        let span = |lo: f64, hi: f64| -> Result<u64> {
            let n = ((hi + cs - lo) / cs).ceil() + 1.0;
            if n >= u32::MAX as f64 {
                return Err(JoinError::Size(format!(
                    "{n} cells along one axis; raise the cell size"
                )));
            }
            Ok((n as u64).max(1))
        };
        let ncols = span(origin_x, extent.x2)?;
        let nrows = span(origin_y, extent.y2)?;
        Self::new(origin_x, origin_y, cs, ncols, nrows)
    }

    pub fn cell_count(&self) -> u64 {
        self.ncols * self.nrows
    }

    pub fn cell_id(&self, col: u64, row: u64) -> CellId {
        row * self.ncols + col
    }

    /// `(col, row)` of a cell id.
    pub fn cell_coords(&self, id: CellId) -> (u64, u64) {
        (id % self.ncols, id / self.ncols)
    }

    /// Closed square of a cell.
    pub fn cell_box(&self, id: CellId) -> Mbb {
        let (c, r) = self.cell_coords(id);
        let x1 = self.origin_x + c as f64 * self.cell_size;
        let y1 = self.origin_y + r as f64 * self.cell_size;
        Mbb::new(x1, y1, x1 + self.cell_size, y1 + self.cell_size)
    }

    #[inline]
    fn axis_index(q: f64, n: u64) -> Option<u64> {
        let f = q.floor();
        if f < 0.0 {
            None
        } else if f < n as f64 {
            Some(f as u64)
        } else if q == n as f64 {
            // exactly on the far boundary
            Some(n - 1)
        } else {
            None
        }
    }

    /// Cell containing `p`, or `None` outside the grid.
    pub fn cell_of(&self, p: Point2D) -> Option<CellId> {
        let col = Self::axis_index((p.x - self.origin_x) / self.cell_size, self.ncols)?;
        let row = Self::axis_index((p.y - self.origin_y) / self.cell_size, self.nrows)?;
        Some(self.cell_id(col, row))
    }

    /// Cells whose closed squares intersect the closed box `m`, clipped to the grid.
    pub fn rasterize_mbb(&self, m: &Mbb) -> CellRange {
        let axis = |lo: f64, hi: f64, origin: f64, n: u64| -> Range<u64> {
            let q_lo = (lo - origin) / self.cell_size;
            let q_hi = (hi - origin) / self.cell_size;
            let first = (q_lo.ceil() - 1.0).max(0.0);
            let last = q_hi.floor().min(n as f64 - 1.0);
            if last < first {
                0..0
            } else {
                first as u64..last as u64 + 1
            }
        };
        let cols = axis(m.x1, m.x2, self.origin_x, self.ncols);
        let rows = axis(m.y1, m.y2, self.origin_y, self.nrows);
        if cols.is_empty() || rows.is_empty() {
            CellRange {
                ncols: self.ncols,
                cols: 0..0,
                rows: 0..0,
            }
        } else {
            CellRange {
                ncols: self.ncols,
                cols,
                rows,
            }
        }
    }
}

fn default_cell_size(extent: &Mbb, point_count: usize) -> f64 {
    let n = point_count.max(1) as f64;
    let (w, h) = (extent.width(), extent.height());
    let area = w * h;
    if area > 0.0 {
        (area / n).sqrt() * 4.0
    } else if w.max(h) > 0.0 {
        w.max(h) * 4.0 / n
    } else {
        1.0
    }
}

/// Rectangular block of cells `cols x rows` (half-open ranges).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellRange {
    ncols: u64,
    pub cols: Range<u64>,
    pub rows: Range<u64>,
}

impl CellRange {
    pub fn is_empty(&self) -> bool {
        self.cols.is_empty() || self.rows.is_empty()
    }

    pub fn len(&self) -> u64 {
        (self.cols.end - self.cols.start) * (self.rows.end - self.rows.start)
    }

    pub fn contains(&self, id: CellId) -> bool {
        self.cols.contains(&(id % self.ncols)) && self.rows.contains(&(id / self.ncols))
    }

    /// Cell ids in ascending order.
    pub fn cell_ids(&self) -> impl Iterator<Item = CellId> + '_ {
        self.rows
            .clone()
            .flat_map(move |r| self.cols.clone().map(move |c| r * self.ncols + c))
    }
}

/// Assign every point to its cell and bucket them.
pub fn group_points(points: &PointColumns, grid: &GridSpec) -> Result<CellGroupedPoints> {
    let cells: Vec<Option<CellId>> = points.iter().map(|p| grid.cell_of(p)).collect();
    CellGroupedPoints::from_cells(&cells)
}

/// Feature side of the filter: one `(cell, feature_pos)` pair per cell covered
/// by a feature's (expanded) MBB, sorted by `(cell, feature_pos)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CellFeaturePairs {
    pub cells: Vec<CellId>,
    pub feature_pos: Vec<usize>,
}

impl CellFeaturePairs {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Build from raw pairs in any order.
    pub fn from_pairs(mut pairs: Vec<(CellId, usize)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let (cells, feature_pos) = pairs.into_iter().unzip();
        Self { cells, feature_pos }
    }
}

pub fn build_cell_feature_pairs(features: &FeatureColumns, grid: &GridSpec, expand_r: f64) -> Result<CellFeaturePairs> {
    let mut pairs = Vec::new();
    for pos in 0..features.len() {
        let m = mbb_expand(&features.mbb(pos), expand_r)?;
        pairs.extend(grid.rasterize_mbb(&m).cell_ids().map(|c| (c, pos)));
    }
    Ok(CellFeaturePairs::from_pairs(pairs))
}
