use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::grid::ChartGrid;
use super::linalg::{hermitian_defect, min_eigen_pencil, positive_cholesky, Mat};
use crate::{Error, Result, C64};

/// Index kind of one tensor slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    BaseHol,
    BaseAnti,
    FiberHol,
    FiberAnti,
}

/// Complex tensor values on a chart grid, `ncomp` entries per node stored
/// contiguously (row-major over the slot indices).
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    pub grid: ChartGrid,
    pub slots: Vec<Slot>,
    pub dims: Vec<usize>,
    pub values: Vec<C64>,
}

impl TensorField {
    pub fn zeros(grid: &ChartGrid, slots: Vec<Slot>, dims: Vec<usize>) -> Result<Self> {
        if slots.len() != dims.len() {
            return Err(Error::Shape(format!(
                "{} slots but {} dimensions",
                slots.len(),
                dims.len()
            )));
        }
        let ncomp: usize = dims.iter().product();
        Ok(TensorField {
            grid: grid.clone(),
            slots,
            dims,
            values: vec![C64::new(0.0, 0.0); grid.len() * ncomp],
        })
    }

    /// Scalar field sampled from a function of the real node coordinates.
    pub fn scalar_from_fn(grid: &ChartGrid, f: impl Fn(&[f64]) -> C64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        TensorField {
            grid: grid.clone(),
            slots: vec![],
            dims: vec![],
            values,
        }
    }

    pub fn ncomp(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn at(&self, index: usize) -> &[C64] {
        let n = self.ncomp();
        &self.values[index * n..(index + 1) * n]
    }

    pub fn at_mut(&mut self, index: usize) -> &mut [C64] {
        let n = self.ncomp();
        &mut self.values[index * n..(index + 1) * n]
    }

    /// Same grid and slot signature, new values.
    pub fn with_values(&self, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        TensorField {
            grid: self.grid.clone(),
            slots: self.slots.clone(),
            dims: self.dims.clone(),
            values,
        }
    }

    /// Fails with the first node holding a NaN or infinity.
    pub fn check_finite(&self, what: &str) -> Result<()> {
        let n = self.ncomp().max(1);
        match self
            .values
            .iter()
            .position(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            Some(k) => Err(Error::NonFinite {
                what: what.to_string(),
                index: k / n,
            }),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Field of r×r Hermitian positive matrices, optionally twisted by a flat-torus
/// background line bundle whose weight φ has constant ∂²φ/∂z^α∂z̄^β = `twist`.
/// The represented metric is e^{−φ}·h; curvature gains `twist ⊗ h`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrixField {
    pub field: TensorField,
    pub twist: Option<Mat>,
}

impl HermitianMatrixField {
    pub fn from_fn(grid: &ChartGrid, rank: usize, f: impl Fn(&[f64]) -> Mat) -> Result<Self> {
        let mut field = TensorField::zeros(
            grid,
            vec![Slot::FiberHol, Slot::FiberAnti],
            vec![rank, rank],
        )?;
        for i in 0..grid.len() {
            let m = f(&grid.position(i));
            if m.nrows() != rank || m.ncols() != rank {
                return Err(Error::Shape(format!(
                    "expected {rank}x{rank} matrix at node {i}"
                )));
            }
            field.at_mut(i).copy_from_slice(m.transpose().as_slice());
        }
        let mut h = HermitianMatrixField { field, twist: None };
        h.hermitize();
        h.field.check_finite("hermitian matrix field")?;
        Ok(h)
    }

    pub fn constant(grid: &ChartGrid, m: &Mat) -> Result<Self> {
        Self::from_fn(grid, m.nrows(), |_| m.clone())
    }

    pub fn with_twist(mut self, twist: Mat) -> Self {
        self.twist = Some(twist);
        self
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.field.grid
    }

    pub fn rank(&self) -> usize {
        self.field.dims[0]
    }

    pub fn matrix(&self, index: usize) -> Mat {
        let r = self.rank();
        DMatrix::from_row_slice(r, r, self.field.at(index))
    }

    /// Real determinant at a node; closed form for rank ≤ 2.
    pub fn determinant(&self, index: usize) -> f64 {
        let v = self.field.at(index);
        match self.rank() {
            1 => v[0].re,
            2 => v[0].re * v[3].re - v[1].norm_sqr(),
            _ => self.matrix(index).determinant().re,
        }
    }

    pub fn set_matrix(&mut self, index: usize, m: &Mat) {
        self.field
            .at_mut(index)
            .copy_from_slice(m.transpose().as_slice());
    }

    /// Replaces each matrix by (M + M†)/2, making the symmetry exact.
    pub fn hermitize(&mut self) {
        let r = self.rank();
        for i in 0..self.field.grid.len() {
            let v = self.field.at_mut(i);
            for a in 0..r {
                v[a * r + a].im = 0.0;
                for b in a + 1..r {
                    let m = (v[a * r + b] + v[b * r + a].conj()) * 0.5;
                    v[a * r + b] = m;
                    v[b * r + a] = m.conj();
                }
            }
        }
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        (0..self.field.grid.len())
            .map(|i| hermitian_defect(&self.matrix(i)))
            .fold(0.0, f64::max)
    }

    /// Positive-definiteness at every node (all nodes, ghosts included).
    pub fn check_positive_definite(&self, what: &str) -> Result<()> {
        self.field.check_finite(what)?;
        let id = Mat::identity(self.rank(), self.rank());
        for i in 0..self.field.grid.len() {
            let m = self.matrix(i);
            let ok = positive_cholesky(&m).is_some();
            if !ok {
                let min_eig = min_eigen_pencil(&m, &id).unwrap_or(f64::NAN);
                return Err(Error::NotPositiveDefinite {
                    what: what.to_string(),
                    index: i,
                    min_eig,
                });
            }
        }
        Ok(())
    }
}
