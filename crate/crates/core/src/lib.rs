//! Numerical laboratory for complex Finsler metrics on projectivized bundles.
//!
//! The crate is organised bottom-up:
//!
//! - [`gridcore`]: chart grids, complex tensor fields, fourth-order finite
//!   differences, the two-chart CP¹ atlas and small Hermitian linear algebra.
//! - [`finsler`]: Finsler metrics on E*, their jets, the Kobayashi curvature Ψ,
//!   the fiber Fubini-Study form and the identities relating them.
//! - [`curvature`]: Chern, Ricci and Gaussian curvature, positivity probes and
//!   the horizontal T-form.
//! - [`flows`]: the Finsler flow on P(E*), its Hermitian-Yang-Mills and
//!   Kähler-Ricci reductions, the tensor maximum-principle simulator, presets
//!   and run persistence.

pub mod curvature;
pub mod error;
pub mod finsler;
pub mod flows;
pub mod gridcore;
pub mod metrics;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
