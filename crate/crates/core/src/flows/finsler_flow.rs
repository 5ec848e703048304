use nalgebra::{DMatrix, DVector};

use super::integrator::{advance, Scheme};
use crate::curvature::{Argmin, PositivityReport, ProbeKind};
use crate::finsler::{chart_log_hessian, FinslerMetricSpec, MetricFamily, ProjectivePoint};
use crate::gridcore::{
    eigen_pencil, min_eigen_pencil_2x2, ChartGrid, Cp1Atlas, GhostTransform, HermitianMatrixField,
    Mat, TensorField, Topology, CP1_HALF_WIDTH, D1, D2, INTERP_NODES,
};
use crate::{Error, Result, C64};

/// Chart-stitching tolerance of the fiber atlas.
pub const STITCHING_TOL: f64 = 1e-4;

/// The flow ∂u/∂t = tr_ω(−Ψ[e^u G₀]) + 1 for G(t) = e^{u} G₀ on P(E*), with
/// E trivial of rank 2 over a torus curve. P(E*) is gridded as the base torus
/// times the two-chart atlas of CP¹; chart c uses the pivot v_{1−c} = 1, so
/// chart 0 holds v = (w, 1) and chart 1 holds v = (1, w).
///
/// u is stored `[chart][base node][fiber node]`.
#[derive(Clone, Debug)]
pub struct FinslerFlow {
    pub base: ChartGrid,
    pub atlas: Cp1Atlas,
    /// Base metric coefficient g_{zz̄} per base node.
    pub g: Vec<f64>,
    active: Vec<usize>,
    f0_zz: Vec<f64>,
    f0_zw: Vec<C64>,
    f0_ww: Vec<f64>,
    g0: Vec<f64>,
    hermitian: bool,
}

/// Chart-coordinate Hessian of log G at one point of P(E*).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartHessian {
    pub zz: f64,
    pub zw: C64,
    pub ww: f64,
}

impl ChartHessian {
    /// Coefficient of −Ψ: ∂_z∂_z̄ log G − |∂_z∂_w̄ log G|² / ∂_w∂_w̄ log G.
    pub fn minus_psi(&self) -> f64 {
        self.zz - self.zw.norm_sqr() / self.ww
    }

    pub fn matrix(&self) -> Mat {
        Mat::from_row_slice(
            2,
            2,
            &[
                C64::new(self.zz, 0.0),
                self.zw,
                self.zw.conj(),
                C64::new(self.ww, 0.0),
            ],
        )
    }

    /// The reference form Ω for base metric g.
    pub fn reference(&self, g: f64) -> Mat {
        let horiz = g + self.zw.norm_sqr() / self.ww;
        Mat::from_row_slice(
            2,
            2,
            &[
                C64::new(horiz, 0.0),
                self.zw,
                self.zw.conj(),
                C64::new(self.ww, 0.0),
            ],
        )
    }
}

impl FinslerFlow {
    /// Precomputes the chart Hessian of log G₀ at every active point.
    pub fn new(spec: &FinslerMetricSpec, g: &HermitianMatrixField, fiber_n: usize) -> Result<Self> {
        let base = spec.grid().clone();
        if spec.rank() != 2
            || base.complex_dim != 1
            || base.axes.iter().any(|a| a.topology != Topology::Periodic)
        {
            return Err(Error::Shape(
                "the Finsler flow needs rank 2 over a periodic curve".into(),
            ));
        }
        if g.rank() != 1 || g.grid().len() != base.len() {
            return Err(Error::Shape(
                "base metric must be scalar on the base grid".into(),
            ));
        }
        let atlas = Cp1Atlas::new(fiber_n, CP1_HALF_WIDTH, INTERP_NODES)?;
        let fiber = atlas.grid().clone();
        let active: Vec<usize> = (0..fiber.len()).filter(|&q| fiber.is_active(q)).collect();
        let np = fiber.len();
        let nb = base.len();
        let total = 2 * nb * np;
        let mut flow = FinslerFlow {
            g: (0..nb).map(|b| g.matrix(b)[(0, 0)].re).collect(),
            base,
            atlas,
            active,
            f0_zz: vec![0.0; total],
            f0_zw: vec![C64::default(); total],
            f0_ww: vec![0.0; total],
            g0: vec![0.0; total],
            hermitian: spec.family == MetricFamily::HermitianInduced,
        };
        for c in 0..2 {
            for b in 0..nb {
                for &q in &flow.active {
                    let w = fiber.complex_coord(q, 0);
                    let point = ProjectivePoint::in_chart(b, 1 - c, vec![w])?;
                    let m = chart_log_hessian(spec, &point)?;
                    let idx = flow.index(c, b, q);
                    flow.f0_zz[idx] = m[(0, 0)].re;
                    flow.f0_zw[idx] = m[(0, 1)];
                    flow.f0_ww[idx] = m[(1, 1)].re;
                    flow.g0[idx] = spec.g(b, &point.vector());
                    if !(flow.f0_ww[idx] > 0.0) {
                        return Err(Error::Pseudoconvexity(format!(
                            "initial ω_FS ≤ 0 at chart {c}, base {b}, fiber {q}"
                        )));
                    }
                }
            }
        }
        Ok(flow)
    }

    pub fn len(&self) -> usize {
        2 * self.base.len() * self.atlas.points_per_chart()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, chart: usize, base: usize, fiber: usize) -> usize {
        let np = self.atlas.points_per_chart();
        (chart * self.base.len() + base) * np + fiber
    }

    /// (chart, base node, fiber node) of a linear index.
    pub fn split(&self, index: usize) -> (usize, usize, usize) {
        let np = self.atlas.points_per_chart();
        let nb = self.base.len();
        (index / (nb * np), (index / np) % nb, index % np)
    }

    pub fn is_active(&self, index: usize) -> bool {
        self.atlas
            .grid()
            .is_active(index % self.atlas.points_per_chart())
    }

    /// The chart representative v of a point.
    pub fn vector(&self, index: usize) -> Vec<C64> {
        let (c, _, q) = self.split(index);
        let w = self.atlas.grid().complex_coord(q, 0);
        let one = C64::new(1.0, 0.0);
        if c == 0 {
            vec![w, one]
        } else {
            vec![one, w]
        }
    }

    /// G₀ at the chart representative.
    pub fn g0(&self, index: usize) -> f64 {
        self.g0[index]
    }

    pub fn initial_state(&self) -> Vec<f64> {
        vec![0.0; self.len()]
    }

    /// Base neighbours along x and y at offsets −2..=2.
    fn base_stencils(&self, b: usize) -> ([usize; 5], [usize; 5]) {
        let nx = self.base.axes[0].n;
        let ny = self.base.axes[1].n;
        let (ix, iy) = (b / ny, b % ny);
        let mut sx = [0; 5];
        let mut sy = [0; 5];
        for k in 0..5 {
            sx[k] = ((ix + nx + k - 2) % nx) * ny + iy;
            sy[k] = ix * ny + (iy + ny + k - 2) % ny;
        }
        (sx, sy)
    }

    /// Chart Hessian of log(e^u G₀) at an active point.
    pub fn hessian(&self, u: &[f64], index: usize) -> ChartHessian {
        let (c, b, q) = self.split(index);
        let (sx, sy) = self.base_stencils(b);
        self.hessian_with(u, c, b, q, &sx, &sy)
    }

    fn hessian_with(
        &self,
        u: &[f64],
        c: usize,
        b: usize,
        q: usize,
        sx: &[usize; 5],
        sy: &[usize; 5],
    ) -> ChartHessian {
        let np = self.atlas.points_per_chart();
        let nf = self.atlas.grid().axes[1].n as isize;
        let hx = self.base.axes[0].spacing;
        let hy = self.base.axes[1].spacing;
        let hf = self.atlas.grid().axes[0].spacing;
        let cb = c * self.base.len();
        let at = |bb: usize, qq: isize| u[(cb + bb) * np + qq as usize];
        let q = q as isize;
        let (mut uxx, mut uyy, mut uaa, mut ubb) = (0.0, 0.0, 0.0, 0.0);
        let (mut uxa, mut uxb, mut uya, mut uyb) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..5 {
            let o = k as isize - 2;
            uxx += D2[k] * at(sx[k], q);
            uyy += D2[k] * at(sy[k], q);
            uaa += D2[k] * at(b, q + o * nf);
            ubb += D2[k] * at(b, q + o);
            if D1[k] == 0.0 {
                continue;
            }
            for j in 0..5 {
                if D1[j] == 0.0 {
                    continue;
                }
                let w = D1[k] * D1[j];
                let p = j as isize - 2;
                uxa += w * at(sx[k], q + p * nf);
                uxb += w * at(sx[k], q + p);
                uya += w * at(sy[k], q + p * nf);
                uyb += w * at(sy[k], q + p);
            }
        }
        let u_zz = 0.25 * (uxx / (hx * hx) + uyy / (hy * hy));
        let u_ww = 0.25 * (uaa + ubb) / (hf * hf);
        let u_zw = C64::new(
            uxa / (hx * hf) + uyb / (hy * hf),
            uxb / (hx * hf) - uya / (hy * hf),
        ) * 0.25;
        let idx = (cb + b) * np + q as usize;
        ChartHessian {
            zz: self.f0_zz[idx] + u_zz,
            zw: self.f0_zw[idx] + u_zw,
            ww: self.f0_ww[idx] + u_ww,
        }
    }

    /// ∂u/∂t at every active point; zero at ghosts.
    pub fn rhs(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; u.len()];
        for c in 0..2 {
            for b in 0..self.base.len() {
                let (sx, sy) = self.base_stencils(b);
                for &q in &self.active {
                    let m = self.hessian_with(u, c, b, q, &sx, &sy);
                    if !(m.ww > 0.0) {
                        return Err(Error::Pseudoconvexity(format!(
                            "ω_FS ≤ 0 at chart {c}, base node {b}, fiber node {q}"
                        )));
                    }
                    out[self.index(c, b, q)] = m.minus_psi() / self.g[b] + 1.0;
                }
            }
        }
        if let Some(k) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "finsler flow rhs".into(),
                index: k,
            });
        }
        Ok(out)
    }

    pub fn fill_ghosts(&self, u: &mut [f64]) {
        self.atlas
            .fill_ghosts(u, 1, self.base.len(), GhostTransform::Scalar);
    }

    /// Largest disagreement of the two charts on their overlap.
    pub fn stitching_defect(&self, u: &[f64]) -> (f64, String) {
        let (d, (c, b, q)) = self
            .atlas
            .overlap_defect(u, self.base.len(), GhostTransform::Scalar);
        (d, format!("chart {c}, base node {b}, fiber node {q}"))
    }

    /// One explicit step; ghosts refreshed at every stage, stitching verified.
    pub fn step(&self, u: &[f64], dt: f64, scheme: Scheme) -> Result<Vec<f64>> {
        let out = advance(u, dt, scheme, |_, y| self.rhs(y), |y| self.fill_ghosts(y))?;
        let (defect, location) = self.stitching_defect(&out);
        if defect > STITCHING_TOL {
            return Err(Error::Stitching { defect, location });
        }
        Ok(out)
    }

    /// Smallest eigenvalue of √−1∂∂̄log G against Ω at one point.
    pub fn oneone_at(&self, u: &[f64], index: usize) -> Result<f64> {
        let (_, b, _) = self.split(index);
        let m = self.hessian(u, index);
        min_eigen_pencil_2x2(
            [m.zz, m.ww],
            m.zw,
            [self.g[b] + m.zw.norm_sqr() / m.ww, m.ww],
            m.zw,
        )
    }

    /// Minimum over every active grid point of the pencil eigenvalues of
    /// √−1∂∂̄log G against Ω, re-evaluated at the argmin.
    pub fn oneone_min(&self, u: &[f64]) -> Result<PositivityReport> {
        let mut best = (f64::INFINITY, usize::MAX);
        let mut scale: f64 = 0.0;
        let mut samples = 0;
        for c in 0..2 {
            for b in 0..self.base.len() {
                let (sx, sy) = self.base_stencils(b);
                for &q in &self.active {
                    let m = self.hessian_with(u, c, b, q, &sx, &sy);
                    if !(m.ww > 0.0) {
                        return Err(Error::Pseudoconvexity(format!(
                            "ω_FS ≤ 0 at chart {c}, base node {b}, fiber node {q}"
                        )));
                    }
                    scale = scale.max(m.zz.abs()).max(m.zw.norm()).max(m.ww.abs());
                    let v = min_eigen_pencil_2x2(
                        [m.zz, m.ww],
                        m.zw,
                        [self.g[b] + m.zw.norm_sqr() / m.ww, m.ww],
                        m.zw,
                    )?;
                    samples += 1;
                    if v < best.0 {
                        best = (v, self.index(c, b, q));
                    }
                }
            }
        }
        let index = best.1;
        let min_value = self.oneone_at(u, index)?;
        let (c, b, _) = self.split(index);
        let m = self.hessian(u, index);
        let (_, vecs) = eigen_pencil(&m.matrix(), &m.reference(self.g[b]))?;
        let argmin = Argmin {
            chart: format!("{}x{}", self.base.chart_id, self.atlas.charts[c].chart_id),
            chart_index: c,
            node: index,
            x: self.vector(index),
            y: vecs.column(0).iter().copied().collect(),
        };
        Ok(PositivityReport {
            probe: ProbeKind::OneoneForm,
            samples,
            min_value,
            argmin,
            field_scale: scale,
            time: None,
        })
    }

    /// Largest relative deviation of G(t) = e^u G₀ from the best Hermitian
    /// quadratic form in v, fitted separately over each base node.
    pub fn hermitian_fit_deviation(&self, u: &[f64]) -> Result<f64> {
        let npts = 2 * self.active.len();
        let mut worst: f64 = 0.0;
        for b in 0..self.base.len() {
            let mut a = DMatrix::<f64>::zeros(npts, 4);
            let mut rhs = DVector::<f64>::zeros(npts);
            let mut row = 0;
            for c in 0..2 {
                for &q in &self.active {
                    let idx = self.index(c, b, q);
                    let v = self.vector(idx);
                    let z = v[0] * v[1].conj();
                    let gval = u[idx].exp() * self.g0[idx];
                    // Rows are scaled by 1/G so the fit minimizes relative error.
                    let s = 1.0 / gval;
                    a[(row, 0)] = v[0].norm_sqr() * s;
                    a[(row, 1)] = v[1].norm_sqr() * s;
                    a[(row, 2)] = 2.0 * z.re * s;
                    a[(row, 3)] = -2.0 * z.im * s;
                    rhs[row] = 1.0;
                    row += 1;
                }
            }
            let coef = a
                .clone()
                .svd(true, true)
                .solve(&rhs, 1e-14)
                .map_err(|e| Error::Shape(format!("hermitian fit: {e}")))?;
            let resid = &a * coef - rhs;
            worst = worst.max(resid.amax());
        }
        Ok(worst)
    }

    /// Largest relative gap between e^u G₀ and the Hermitian-induced metric
    /// of a bundle metric h on the base grid.
    pub fn hermitian_gap(&self, u: &[f64], h: &HermitianMatrixField) -> Result<f64> {
        if !self.hermitian {
            return Err(Error::Config(
                "the Hermitian comparison needs Hermitian-induced initial data".into(),
            ));
        }
        let mut worst: f64 = 0.0;
        for b in 0..self.base.len() {
            let hinv = crate::gridcore::inverse(&h.matrix(b))?;
            for c in 0..2 {
                for &q in &self.active {
                    let idx = self.index(c, b, q);
                    let v = self.vector(idx);
                    // G = Σ conj(h⁻¹)_{ij} v_i v̄_j = v†h⁻¹v.
                    let mut gh = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            gh += (hinv[(i, j)].conj() * v[i] * v[j].conj()).re;
                        }
                    }
                    worst = worst.max((u[idx].exp() * self.g0[idx] / gh - 1.0).abs());
                }
            }
        }
        Ok(worst)
    }

    /// u as one real scalar field per fiber chart on the product grid.
    pub fn to_fields(&self, u: &[f64]) -> Result<Vec<(String, TensorField)>> {
        let chart_len = self.base.len() * self.atlas.points_per_chart();
        (0..2)
            .map(|c| {
                let grid = ChartGrid::product(&self.base, &self.atlas.charts[c])?;
                let values = u[c * chart_len..(c + 1) * chart_len]
                    .iter()
                    .map(|&x| C64::new(x, 0.0))
                    .collect();
                Ok((
                    format!("u:{}", grid.chart_id),
                    TensorField {
                        grid,
                        slots: vec![],
                        dims: vec![],
                        values,
                    },
                ))
            })
            .collect()
    }

    /// Minimum fiber spacing, which limits the stable step.
    pub fn min_spacing(&self) -> f64 {
        self.base.min_spacing().min(self.atlas.grid().min_spacing())
    }
}
