use std::sync::OnceLock;

use super::dual::Dual;
use crate::curvature::{chern_curvature, ChernCurvatureField};
use crate::gridcore::sampling::{halton, sphere_direction};
use crate::gridcore::{
    apply_d1, apply_dd_bar, inverse, min_eigen_pencil, ChartGrid, HermitianMatrixField, Mat,
};
use crate::{Error, Result, C64};

/// Default quartic weight of the perturbed family.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Startup scan threshold on min eig(G_{ij̄}) for perturbed metrics.
pub const PSEUDOCONVEXITY_FLOOR: f64 = 0.1;
/// Number of (node, direction) samples in the startup scan.
pub const PSEUDOCONVEXITY_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricFamily {
    /// G = h^{ij̄} v_i v̄_j.
    HermitianInduced,
    /// G = H + ε Σ|v_i|⁴ / H with H the Hermitian-induced value.
    PerturbedHermitian { epsilon: f64 },
}

/// A complex Finsler metric on E* built from a Hermitian metric field h on E.
///
/// The dual matrix P = conj(h⁻¹) satisfies G = Σ P_{ij} v_i v̄_j for the
/// Hermitian-induced family. Its base derivatives ∂P, ∂̄P and ∂∂̄P are taken by
/// finite differences once at construction; fiber derivatives are exact.
#[derive(Debug)]
pub struct FinslerMetricSpec {
    pub family: MetricFamily,
    pub h: HermitianMatrixField,
    p: Vec<C64>,
    dp: Vec<Vec<C64>>,
    dbp: Vec<Vec<C64>>,
    ddp: Vec<Vec<C64>>,
    interior: Vec<bool>,
    dual_curvature: OnceLock<ChernCurvatureField>,
}

/// Which dual slots carry the base derivatives ∂/∂z^α and ∂/∂z̄^β.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct BaseSeeds {
    pub z: Option<(usize, usize)>,
    pub zb: Option<(usize, usize)>,
}

impl FinslerMetricSpec {
    pub fn hermitian_induced(h: HermitianMatrixField) -> Result<Self> {
        Self::build(MetricFamily::HermitianInduced, h)
    }

    /// Perturbed family with the startup pseudoconvexity scan.
    pub fn perturbed_hermitian(h: HermitianMatrixField, epsilon: f64) -> Result<Self> {
        let spec = Self::build(MetricFamily::PerturbedHermitian { epsilon }, h)?;
        let min = spec.pseudoconvexity_scan(PSEUDOCONVEXITY_SAMPLES)?;
        if !(min > PSEUDOCONVEXITY_FLOOR) {
            return Err(Error::Pseudoconvexity(format!(
                "epsilon = {epsilon}: min eig(G_ij) = {min:.4} over {PSEUDOCONVEXITY_SAMPLES} samples, need > {PSEUDOCONVEXITY_FLOOR}"
            )));
        }
        Ok(spec)
    }

    /// Perturbed family without the scan, for probing broken metrics.
    pub fn perturbed_hermitian_unchecked(h: HermitianMatrixField, epsilon: f64) -> Result<Self> {
        Self::build(MetricFamily::PerturbedHermitian { epsilon }, h)
    }

    fn build(family: MetricFamily, h: HermitianMatrixField) -> Result<Self> {
        h.check_positive_definite("h")?;
        let grid = h.grid().clone();
        let r = h.rank();
        let n = grid.complex_dim;
        let mut p = Vec::with_capacity(grid.len() * r * r);
        for i in 0..grid.len() {
            let inv = inverse(&h.matrix(i))?;
            for a in 0..r {
                for b in 0..r {
                    p.push(inv[(a, b)].conj());
                }
            }
        }
        let nc = r * r;
        let wirt = |k: usize, sign: f64| -> Vec<C64> {
            let dx = apply_d1(&grid, &p, nc, 2 * k);
            let dy = apply_d1(&grid, &p, nc, 2 * k + 1);
            dx.iter()
                .zip(&dy)
                .map(|(a, b)| (a + C64::new(0.0, sign) * b) * 0.5)
                .collect()
        };
        let dp = (0..n).map(|k| wirt(k, -1.0)).collect();
        let dbp = (0..n).map(|k| wirt(k, 1.0)).collect();
        let mut ddp = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                ddp.push(apply_dd_bar(&grid, &p, nc, a, b));
            }
        }
        let strides = grid.strides();
        let interior = (0..grid.len())
            .map(|i| {
                let c = grid.coords(i);
                (0..grid.axes.len()).all(|ax| grid.stencil_offsets(&c, ax, &strides).is_some())
            })
            .collect();
        Ok(FinslerMetricSpec {
            family,
            h,
            p,
            dp,
            dbp,
            ddp,
            interior,
            dual_curvature: OnceLock::new(),
        })
    }

    pub fn rank(&self) -> usize {
        self.h.rank()
    }

    pub fn base_dim(&self) -> usize {
        self.grid().complex_dim
    }

    pub fn grid(&self) -> &ChartGrid {
        self.h.grid()
    }

    pub fn twist(&self) -> Option<&Mat> {
        self.h.twist.as_ref()
    }

    pub fn epsilon(&self) -> f64 {
        match self.family {
            MetricFamily::HermitianInduced => 0.0,
            MetricFamily::PerturbedHermitian { epsilon } => epsilon,
        }
    }

    /// Dual matrix P at a node.
    pub fn dual_matrix(&self, node: usize) -> Mat {
        let r = self.rank();
        Mat::from_row_slice(r, r, &self.p[node * r * r..(node + 1) * r * r])
    }

    /// Chern curvature of h (twist included), computed once on demand.
    pub fn dual_curvature(&self) -> Result<&ChernCurvatureField> {
        if let Some(c) = self.dual_curvature.get() {
            return Ok(c);
        }
        let c = chern_curvature(&self.h)?;
        Ok(self.dual_curvature.get_or_init(|| c))
    }

    pub(crate) fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.grid().len() {
            return Err(Error::InvalidPoint(format!(
                "base node {node} outside a grid of {}",
                self.grid().len()
            )));
        }
        if !self.interior[node] {
            return Err(Error::InvalidPoint(format!(
                "base node {node} is not a chart interior point"
            )));
        }
        Ok(())
    }

    /// G(z, v) at a base node.
    pub fn g(&self, node: usize, v: &[C64]) -> f64 {
        let vd: Vec<Dual<1>> = v.iter().map(|&x| Dual::constant(x)).collect();
        let vb: Vec<Dual<1>> = v.iter().map(|&x| Dual::constant(x.conj())).collect();
        self.eval(node, &vd, &vb, BaseSeeds::default()).value().re
    }

    /// Evaluates G on dual inputs. Base derivatives enter through the P-jet
    /// assembled from the seeds; the twist weight is taken in the gauge where
    /// its 1-jet vanishes at the node, so only its ∂∂̄ part appears.
    pub(crate) fn eval<const N: usize>(
        &self,
        node: usize,
        v: &[Dual<N>],
        vb: &[Dual<N>],
        seeds: BaseSeeds,
    ) -> Dual<N> {
        let r = self.rank();
        let n = self.base_dim();
        let off = node * r * r;
        let mut h = Dual::<N>::real(0.0);
        for i in 0..r {
            for j in 0..r {
                let k = off + i * r + j;
                let mut pij = Dual::<N>::constant(self.p[k]);
                if let Some((s, a)) = seeds.z {
                    pij.add_term(1 << s, self.dp[a][k]);
                }
                if let Some((t, b)) = seeds.zb {
                    pij.add_term(1 << t, self.dbp[b][k]);
                }
                if let (Some((s, a)), Some((t, b))) = (seeds.z, seeds.zb) {
                    pij.add_term((1 << s) | (1 << t), self.ddp[a * n + b][k]);
                }
                h = h + pij * v[i] * vb[j];
            }
        }
        let mut g = match self.family {
            MetricFamily::HermitianInduced => h,
            MetricFamily::PerturbedHermitian { epsilon } => {
                let mut q = Dual::<N>::real(0.0);
                for i in 0..r {
                    q = q + v[i] * v[i] * vb[i] * vb[i];
                }
                h + (q / h).scale(C64::new(epsilon, 0.0))
            }
        };
        if let (Some(kappa), Some((s, a)), Some((t, b))) = (self.twist(), seeds.z, seeds.zb) {
            let mut w = Dual::<N>::real(1.0);
            w.add_term((1 << s) | (1 << t), kappa[(a, b)]);
            g = g * w;
        }
        g
    }

    /// Minimum eigenvalue of (G_{ij̄}) over deterministic samples of base
    /// nodes and unit fiber directions.
    pub fn pseudoconvexity_scan(&self, samples: usize) -> Result<f64> {
        let nodes: Vec<usize> = (0..self.grid().len())
            .filter(|&i| self.interior[i])
            .collect();
        if nodes.is_empty() {
            return Err(Error::InvalidPoint("no interior base nodes".into()));
        }
        let r = self.rank();
        let id = Mat::identity(r, r);
        let mut min = f64::INFINITY;
        for s in 0..samples {
            let node = nodes
                [((halton(s as u64 + 1, 2) * nodes.len() as f64) as usize).min(nodes.len() - 1)];
            let v = sphere_direction(s as u64, r, 1);
            let m = super::jet::fiber_hessian(self, node, &v);
            min = min.min(min_eigen_pencil(&m, &id)?);
        }
        Ok(min)
    }
}
