//! Discretized charts, complex tensor fields, finite differences and small
//! Hermitian linear algebra.

mod atlas;
mod fd;
mod field;
mod grid;
mod linalg;
pub mod sampling;
mod snapshot;

pub use atlas::{Cp1Atlas, GhostTransform, INTERP_NODES};
pub use fd::{
    apply_d1, apply_d2, apply_dd_bar, apply_mixed, fd_derivative, fd_mixed, FieldScalar, D1, D2,
};
pub use field::{HermitianMatrixField, Slot, TensorField};
pub use grid::{Axis, ChartGrid, Topology, CP1_HALF_WIDTH, OVERLAP_INNER, OVERLAP_OUTER};
pub use linalg::{
    eigen_pencil, hermitian_defect, hermitize, inverse, min_eigen_pencil, min_eigen_pencil_2x2,
    pair, positive_cholesky, Mat,
};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
