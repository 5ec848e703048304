//! Closed-form metric fields used by presets, suites and tests.

use std::f64::consts::TAU;

use crate::gridcore::{ChartGrid, HermitianMatrixField, Mat};
use crate::{Result, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn diag2(a: f64, b: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(b, 0.0)])
}

/// The same constant matrix at every node.
pub fn flat(grid: &ChartGrid, m: &Mat) -> Result<HermitianMatrixField> {
    HermitianMatrixField::constant(grid, m)
}

/// A fixed positive 2×2 matrix with nontrivial off-diagonal entries.
pub fn flat_rank2_matrix() -> Mat {
    Mat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.5, 0.5), c(0.5, -0.5), c(1.0, 0.0)])
}

/// Line bundle h = e^{−φ} with φ = amp·cos(2πx/L) on a torus of period L.
pub fn line_bundle(grid: &ChartGrid, amp: f64) -> Result<HermitianMatrixField> {
    let l = grid.axes[0].period().unwrap_or(1.0);
    HermitianMatrixField::from_fn(grid, 1, |p| {
        Mat::from_element(1, 1, c((-amp * (TAU * p[0] / l).cos()).exp(), 0.0))
    })
}

/// diag(e^{−φ}, e^{φ}), φ = amp·cos(2πx/L): one positive and one negative summand.
pub fn mixed_sign(grid: &ChartGrid, amp: f64) -> Result<HermitianMatrixField> {
    let l = grid.axes[0].period().unwrap_or(1.0);
    HermitianMatrixField::from_fn(grid, 2, |p| {
        let phi = amp * (TAU * p[0] / l).cos();
        diag2((-phi).exp(), phi.exp())
    })
}

/// diag(e^{−φ}, e^{−φ}), two identical line bundles.
pub fn doubled_line(grid: &ChartGrid, amp: f64) -> Result<HermitianMatrixField> {
    let l = grid.axes[0].period().unwrap_or(1.0);
    HermitianMatrixField::from_fn(grid, 2, |p| {
        let phi = amp * (TAU * p[0] / l).cos();
        diag2((-phi).exp(), (-phi).exp())
    })
}

fn curved_rank2_at(q: &[f64], t: f64, a: f64, b: f64) -> Mat {
    let (x, y) = (t * q[0], t * q[1]);
    let off = c(b * y.cos(), b * x.sin());
    Mat::from_row_slice(
        2,
        2,
        &[
            c((a * x.cos()).exp(), 0.0),
            off,
            off.conj(),
            c((a * y.sin()).exp(), 0.0),
        ],
    )
}

/// A rank-2 metric over a torus curve with every entry varying:
/// [[e^{a cos θx}, b(cos θy + i sin θx)], [conj, e^{a sin θy}]], θ = 2π/L.
pub fn curved_rank2(grid: &ChartGrid, a: f64, b: f64) -> Result<HermitianMatrixField> {
    let t = TAU / grid.axes[0].period().unwrap_or(1.0);
    HermitianMatrixField::from_fn(grid, 2, |q| curved_rank2_at(q, t, a, b))
}

/// `curved_rank2` conjugated by diag(√2, 1/√2), so the dual metric is strongly
/// anisotropic and the quartic perturbation loses pseudoconvexity early.
pub fn anisotropic_rank2(grid: &ChartGrid, a: f64, b: f64) -> Result<HermitianMatrixField> {
    let t = TAU / grid.axes[0].period().unwrap_or(1.0);
    let s = diag2(2f64.sqrt(), 0.5f64.sqrt());
    HermitianMatrixField::from_fn(grid, 2, |q| &s * curved_rank2_at(q, t, a, b) * &s)
}

/// Relative amplitude margin of `TwistedParams::semipositive`.
pub const TOUCH_MARGIN: f64 = 1e-3;

/// Parameters of the twisted semipositive rank-2 bundle over a torus curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistedParams {
    /// Constant curvature density of the background line bundle.
    pub kappa: f64,
    /// Amplitude of ψ₁ = a·cos θx; a = 4κ/θ² makes the first summand touch zero.
    pub a: f64,
    /// Amplitude of ψ₂ = b·cos θy.
    pub b: f64,
    /// Off-diagonal entry of the constant frame change S = [[1, s], [0, 1]].
    pub mix: C64,
}

impl TwistedParams {
    /// Griffiths-semipositive, touching zero up to a relative margin of
    /// TOUCH_MARGIN (minimum κ·TOUCH_MARGIN), so the fourth-order curvature
    /// stencils cannot push the discrete minimum below zero.
    pub fn semipositive(period: f64) -> Self {
        let p = Self::touching(period);
        TwistedParams {
            a: p.a * (1.0 - TOUCH_MARGIN),
            ..p
        }
    }

    /// First summand with minimum exactly zero in the continuum.
    pub fn touching(period: f64) -> Self {
        let theta = TAU / period;
        let kappa = 0.05;
        TwistedParams {
            kappa,
            a: 4.0 * kappa / (theta * theta),
            b: 2.0 * kappa / (theta * theta),
            mix: c(0.3, 0.2),
        }
    }

    /// Strictly Griffiths-positive.
    pub fn positive(period: f64) -> Self {
        let theta = TAU / period;
        let kappa = 0.05;
        TwistedParams {
            kappa,
            a: 2.0 * kappa / (theta * theta),
            b: 2.0 * kappa / (theta * theta),
            mix: c(0.3, 0.2),
        }
    }
}

/// h = e^{−φ_bg} S†·diag(e^{−ψ₁}, e^{−ψ₂})·S with ∂∂̄φ_bg = κ. Summand k has
/// normalized curvature κ + ∂∂̄ψ_k = κ − (θ²/4)·amp_k·cos(·), so the bundle is
/// semipositive when both amplitudes are at most 4κ/θ².
pub fn twisted(grid: &ChartGrid, p: TwistedParams) -> Result<HermitianMatrixField> {
    let l = grid.axes[0].period().unwrap_or(1.0);
    let t = TAU / l;
    let s = Mat::from_row_slice(2, 2, &[c(1.0, 0.0), p.mix, c(0.0, 0.0), c(1.0, 0.0)]);
    let h = HermitianMatrixField::from_fn(grid, 2, |q| {
        let d = diag2(
            (-p.a * (t * q[0]).cos()).exp(),
            (-p.b * (t * q[1]).cos()).exp(),
        );
        s.adjoint() * d * &s
    })?;
    Ok(h.with_twist(Mat::from_element(1, 1, c(p.kappa, 0.0))))
}

/// Fubini-Study metric (1 + |z|²)^{−2} on one affine chart of CP¹.
pub fn fubini_study(grid: &ChartGrid) -> Result<HermitianMatrixField> {
    HermitianMatrixField::from_fn(grid, 1, |p| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        Mat::from_element(1, 1, c(1.0 / ((1.0 + r2) * (1.0 + r2)), 0.0))
    })
}

/// Scalar metric e^{amp·cos(2πx/L)} on a torus curve.
pub fn conformal_torus(grid: &ChartGrid, amp: f64) -> Result<HermitianMatrixField> {
    let l = grid.axes[0].period().unwrap_or(1.0);
    HermitianMatrixField::from_fn(grid, 1, |p| {
        Mat::from_element(1, 1, c((amp * (TAU * p[0] / l).cos()).exp(), 0.0))
    })
}

/// Product metric diag(g₁(z¹), g₂(z²)) on a torus surface, g_k = e^{amp·cos x_k}.
pub fn product_torus(grid: &ChartGrid, amp: f64) -> Result<HermitianMatrixField> {
    let l = grid.axes[0].period().unwrap_or(1.0);
    let t = TAU / l;
    HermitianMatrixField::from_fn(grid, 2, |p| {
        diag2(
            (amp * (t * p[0]).cos()).exp(),
            (amp * (t * p[2]).cos()).exp(),
        )
    })
}
