//! Spatial filtering: join occupied point cells against the feature-side pair
//! list by binary search on the sorted cell ids.

use std::ops::Range;

use crate::columnar::{CellGroupedPoints, CellId};
use crate::grid::CellFeaturePairs;

/// Filter output: one `(cell, {feature_pos})` group per point cell that has
/// at least one candidate feature.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidatePairs {
    pub cell_ids: Vec<CellId>,
    /// Index of each group's cell in [`CellGroupedPoints`].
    pub point_groups: Vec<usize>,
    /// Exclusive prefix sum of group sizes into `candidate_feature_pos`.
    pub group_starts: Vec<usize>,
    pub candidate_feature_pos: Vec<usize>,
}

impl CandidatePairs {
    pub fn group_count(&self) -> usize {
        self.cell_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_ids.is_empty()
    }

    pub fn candidate_range(&self, g: usize) -> Range<usize> {
        let end = self
            .group_starts
            .get(g + 1)
            .copied()
            .unwrap_or(self.candidate_feature_pos.len());
        self.group_starts[g]..end
    }

    /// Candidate feature positions of group `g`, ascending.
    pub fn candidates(&self, g: usize) -> &[usize] {
        &self.candidate_feature_pos[self.candidate_range(g)]
    }

    /// Number of (point, feature) pairs refinement will evaluate.
    pub fn point_feature_pairs(&self, points: &CellGroupedPoints) -> u64 {
        (0..self.group_count())
            .map(|g| (points.counts[self.point_groups[g]] * self.candidates(g).len()) as u64)
            .sum()
    }
}

/// Pair every occupied point cell with the features covering it.
///
/// Both inputs must come from the same grid; that cannot be checked here.
pub fn match_cells(points: &CellGroupedPoints, feats: &CellFeaturePairs) -> CandidatePairs {
    let mut out = CandidatePairs::default();
    for (g, &cell) in points.cell_ids.iter().enumerate() {
        let lo = feats.cells.partition_point(|&c| c < cell);
        let hi = lo + feats.cells[lo..].partition_point(|&c| c == cell);
        if lo == hi {
            continue;
        }
        let start = out.candidate_feature_pos.len();
        out.cell_ids.push(cell);
        out.point_groups.push(g);
        out.group_starts.push(start);
        for &f in &feats.feature_pos[lo..hi] {
            if out.candidate_feature_pos.len() == start || out.candidate_feature_pos.last() != Some(&f) {
                out.candidate_feature_pos.push(f);
            }
        }
    }
    out
}
