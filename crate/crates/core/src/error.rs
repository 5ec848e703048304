use thiserror::Error;

/// Every failure the numerical layers can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("axis {axis} out of range for a grid with {axes} real axes")]
    AxisOutOfRange { axis: usize, axes: usize },
    #[error("axis {axis} has {n} points; the stencil needs at least {need}")]
    GridTooSmall { axis: usize, n: usize, need: usize },
    #[error("non-finite value in {what} at grid index {index}")]
    NonFinite { what: String, index: usize },
    #[error("{what} not positive definite at grid index {index} (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite {
        what: String,
        index: usize,
        min_eig: f64,
    },
    #[error("pseudoconvexity failure: {0}")]
    Pseudoconvexity(String),
    #[error("base metric not Kähler: defect {defect:.3e} exceeds {tol:.3e}")]
    NotKahler { defect: f64, tol: f64 },
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("chart stitching inconsistency {defect:.3e} at {location}")]
    Stitching { defect: f64, location: String },
    #[error("metric collapsed at t = {t:.6}")]
    Collapse { t: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
