use std::ops::{Add, Mul, Sub};

use super::field::TensorField;
use super::grid::ChartGrid;
use crate::{Error, Result, C64};

/// Fourth-order central first-derivative weights for offsets -2..=2 (divide by h).
pub const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
/// Fourth-order central second-derivative weights for offsets -2..=2 (divide by h²).
pub const D2: [f64; 5] = [
    -1.0 / 12.0,
    16.0 / 12.0,
    -30.0 / 12.0,
    16.0 / 12.0,
    -1.0 / 12.0,
];

/// Values a stencil can be applied to.
pub trait FieldScalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
}
impl FieldScalar for f64 {}
impl FieldScalar for C64 {}

fn for_each_point<F: FnMut(usize, &[usize])>(grid: &ChartGrid, mut f: F) {
    let shape = grid.shape();
    let mut coords = vec![0usize; shape.len()];
    for idx in 0..grid.len() {
        f(idx, &coords);
        for k in (0..shape.len()).rev() {
            coords[k] += 1;
            if coords[k] < shape[k] {
                break;
            }
            coords[k] = 0;
        }
    }
}

/// First derivative along `axis` of interleaved data with `ncomp` components
/// per node. Nodes whose stencil leaves a bounded axis get zero.
pub fn apply_d1<T: FieldScalar>(grid: &ChartGrid, data: &[T], ncomp: usize, axis: usize) -> Vec<T> {
    let strides = grid.strides();
    let inv_h = 1.0 / grid.axes[axis].spacing;
    let mut out = vec![T::default(); data.len()];
    for_each_point(grid, |idx, coords| {
        if let Some(off) = grid.stencil_offsets(coords, axis, &strides) {
            for c in 0..ncomp {
                let mut acc = T::default();
                for k in [0, 1, 3, 4] {
                    acc = acc + data[((idx as isize + off[k]) as usize) * ncomp + c] * D1[k];
                }
                out[idx * ncomp + c] = acc * inv_h;
            }
        }
    });
    out
}

/// Second derivative along one axis.
pub fn apply_d2<T: FieldScalar>(grid: &ChartGrid, data: &[T], ncomp: usize, axis: usize) -> Vec<T> {
    let strides = grid.strides();
    let h = grid.axes[axis].spacing;
    let inv_h2 = 1.0 / (h * h);
    let mut out = vec![T::default(); data.len()];
    for_each_point(grid, |idx, coords| {
        if let Some(off) = grid.stencil_offsets(coords, axis, &strides) {
            for c in 0..ncomp {
                let mut acc = T::default();
                for k in 0..5 {
                    acc = acc + data[((idx as isize + off[k]) as usize) * ncomp + c] * D2[k];
                }
                out[idx * ncomp + c] = acc * inv_h2;
            }
        }
    });
    out
}

/// Mixed second derivative along two distinct axes (tensor product of first-derivative stencils).
pub fn apply_mixed<T: FieldScalar>(
    grid: &ChartGrid,
    data: &[T],
    ncomp: usize,
    a1: usize,
    a2: usize,
) -> Vec<T> {
    if a1 == a2 {
        return apply_d2(grid, data, ncomp, a1);
    }
    let strides = grid.strides();
    let scale = 1.0 / (grid.axes[a1].spacing * grid.axes[a2].spacing);
    let mut out = vec![T::default(); data.len()];
    for_each_point(grid, |idx, coords| {
        let (Some(o1), Some(o2)) = (
            grid.stencil_offsets(coords, a1, &strides),
            grid.stencil_offsets(coords, a2, &strides),
        ) else {
            return;
        };
        for c in 0..ncomp {
            let mut acc = T::default();
            for k1 in [0, 1, 3, 4] {
                for k2 in [0, 1, 3, 4] {
                    let j = (idx as isize + o1[k1] + o2[k2]) as usize;
                    acc = acc + data[j * ncomp + c] * (D1[k1] * D1[k2]);
                }
            }
            out[idx * ncomp + c] = acc * scale;
        }
    });
    out
}

/// ∂²/∂z^α∂z̄^β of complex interleaved data:
/// ¼(∂x_α∂x_β + ∂y_α∂y_β + i(∂x_α∂y_β − ∂y_α∂x_β)).
pub fn apply_dd_bar(
    grid: &ChartGrid,
    data: &[C64],
    ncomp: usize,
    alpha: usize,
    beta: usize,
) -> Vec<C64> {
    let (xa, ya, xb, yb) = (2 * alpha, 2 * alpha + 1, 2 * beta, 2 * beta + 1);
    if alpha == beta {
        let fxx = apply_d2(grid, data, ncomp, xa);
        let fyy = apply_d2(grid, data, ncomp, ya);
        return fxx.iter().zip(&fyy).map(|(a, b)| (a + b) * 0.25).collect();
    }
    let p = apply_mixed(grid, data, ncomp, xa, xb);
    let q = apply_mixed(grid, data, ncomp, ya, yb);
    let r = apply_mixed(grid, data, ncomp, xa, yb);
    let s = apply_mixed(grid, data, ncomp, ya, xb);
    (0..data.len())
        .map(|k| (p[k] + q[k] + C64::i() * (r[k] - s[k])) * 0.25)
        .collect()
}

/// Finite-difference derivative of a tensor field along one real axis.
pub fn fd_derivative(field: &TensorField, axis: usize, order: usize) -> Result<TensorField> {
    field.grid.check_axis(axis)?;
    let ncomp = field.ncomp();
    let values = match order {
        1 => apply_d1(&field.grid, &field.values, ncomp, axis),
        2 => apply_d2(&field.grid, &field.values, ncomp, axis),
        _ => {
            return Err(Error::Shape(format!(
                "derivative order must be 1 or 2, got {order}"
            )))
        }
    };
    Ok(field.with_values(values))
}

/// Mixed second derivative of a tensor field along two real axes.
pub fn fd_mixed(field: &TensorField, a1: usize, a2: usize) -> Result<TensorField> {
    field.grid.check_axis(a1)?;
    field.grid.check_axis(a2)?;
    Ok(field.with_values(apply_mixed(
        &field.grid,
        &field.values,
        field.ncomp(),
        a1,
        a2,
    )))
}

impl TensorField {
    /// Holomorphic derivative ∂/∂z^k = (∂x − i∂y)/2.
    pub fn d_hol(&self, k: usize) -> Result<TensorField> {
        self.wirtinger(k, -1.0)
    }

    /// Antiholomorphic derivative ∂/∂z̄^k = (∂x + i∂y)/2.
    pub fn d_antihol(&self, k: usize) -> Result<TensorField> {
        self.wirtinger(k, 1.0)
    }

    fn wirtinger(&self, k: usize, sign: f64) -> Result<TensorField> {
        self.grid.check_axis(2 * k + 1)?;
        self.grid.check_axis(2 * k)?;
        let n = self.ncomp();
        let dx = apply_d1(&self.grid, &self.values, n, 2 * k);
        let dy = apply_d1(&self.grid, &self.values, n, 2 * k + 1);
        let i = C64::new(0.0, sign);
        Ok(self.with_values(dx.iter().zip(&dy).map(|(a, b)| (a + i * b) * 0.5).collect()))
    }

    /// ∂²/∂z^α∂z̄^β.
    pub fn dd_bar(&self, alpha: usize, beta: usize) -> Result<TensorField> {
        self.grid.check_axis(2 * alpha + 1)?;
        self.grid.check_axis(2 * beta + 1)?;
        Ok(self.with_values(apply_dd_bar(
            &self.grid,
            &self.values,
            self.ncomp(),
            alpha,
            beta,
        )))
    }
}
