//! Two-phase spatial join over columnar points and polylines/polygons.
//!
//! Points and features are bucketed on a uniform grid. The filter phase pairs
//! each occupied point cell with the features whose (expanded) bounding boxes
//! cover it; the refine phase then computes, per point, either the nearest
//! polyline within a range or the containing polygon. Refinement runs under
//! four configurations (one or many workers, scalar or lane-batched kernels)
//! that all produce bit-identical output.

pub mod columnar;
pub mod error;
pub mod exec;
pub mod filter;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod refine;
pub mod synth;

pub use columnar::{
    build_feature_columns, exclusive_prefix_sum, group_by_key, CellGroupedPoints, CellId, Feature, FeatureColumns,
    FeatureId, FeatureKind, PointColumns,
};
pub use error::{JoinError, Result};
pub use exec::{run_join, speedup_matrix, ExecConfig, JoinOp, JoinOutput, Mode, SpeedupMatrix, TimingReport};
pub use filter::{match_cells, CandidatePairs};
pub use geometry::{Mbb, Point2D};
pub use grid::{build_cell_feature_pairs, CellFeaturePairs, GridSpec};
pub use refine::{P2PResult, PipResult};
