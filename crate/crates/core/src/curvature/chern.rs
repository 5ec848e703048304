use crate::gridcore::{
    apply_d1, apply_d2, apply_dd_bar, apply_mixed, inverse, ChartGrid, HermitianMatrixField, Mat,
    Slot, TensorField,
};
use crate::{Error, Result, C64};

/// R_{ij̄αβ̄} on a grid: per node, n·n blocks (α, β) of r×r matrices (i, j).
#[derive(Clone, Debug)]
pub struct ChernCurvatureField {
    pub grid: ChartGrid,
    pub rank: usize,
    pub base_dim: usize,
    pub values: Vec<C64>,
    /// Nodes whose stencils stay on the grid; other nodes hold zeros.
    pub valid: Vec<bool>,
}

impl ChernCurvatureField {
    fn stride(&self) -> usize {
        self.rank * self.rank * self.base_dim * self.base_dim
    }

    /// The r×r block R_{··αβ̄} at a node.
    pub fn block(&self, node: usize, alpha: usize, beta: usize) -> Mat {
        let r = self.rank;
        let off = node * self.stride() + (alpha * self.base_dim + beta) * r * r;
        Mat::from_row_slice(r, r, &self.values[off..off + r * r])
    }

    fn set_block(&mut self, node: usize, alpha: usize, beta: usize, m: &Mat) {
        let r = self.rank;
        let off = node * self.stride() + (alpha * self.base_dim + beta) * r * r;
        self.values[off..off + r * r].copy_from_slice(m.transpose().as_slice());
    }

    /// R(X, X̄, Y, Ȳ) = Σ R_{ij̄αβ̄} X^i X̄^j Y^α Ȳ^β.
    pub fn pairing(&self, node: usize, x: &[C64], y: &[C64]) -> C64 {
        let mut s = C64::default();
        for a in 0..self.base_dim {
            for b in 0..self.base_dim {
                s += crate::gridcore::pair(&self.block(node, a, b), x, x) * y[a] * y[b].conj();
            }
        }
        s
    }

    /// Largest |R_{ij̄αβ̄} − conj(R_{jīβᾱ})|.
    pub fn max_symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for node in 0..self.grid.len() {
            for a in 0..self.base_dim {
                for b in 0..self.base_dim {
                    let m = self.block(node, a, b) - self.block(node, b, a).adjoint();
                    d = d.max(m.iter().map(|z| z.norm()).fold(0.0, f64::max));
                }
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn valid_nodes(grid: &ChartGrid) -> Vec<bool> {
    let strides = grid.strides();
    (0..grid.len())
        .map(|i| {
            let c = grid.coords(i);
            (0..grid.axes.len()).all(|ax| grid.stencil_offsets(&c, ax, &strides).is_some())
        })
        .collect()
}

fn wirtinger(grid: &ChartGrid, data: &[C64], nc: usize, k: usize, sign: f64) -> Vec<C64> {
    let dx = apply_d1(grid, data, nc, 2 * k);
    let dy = apply_d1(grid, data, nc, 2 * k + 1);
    dx.iter()
        .zip(&dy)
        .map(|(a, b)| (a + C64::new(0.0, sign) * b) * 0.5)
        .collect()
}

/// Chern curvature R_{αβ̄} = −∂_α∂̄_β h + ∂_α h · h⁻¹ · ∂̄_β h (+ twist_{αβ̄} h),
/// with the pairing symmetry enforced by averaging.
pub fn chern_curvature(h: &HermitianMatrixField) -> Result<ChernCurvatureField> {
    h.check_positive_definite("h")?;
    let grid = h.grid();
    let r = h.rank();
    let n = grid.complex_dim;
    let nc = r * r;
    let data = &h.field.values;
    let d: Vec<Vec<C64>> = (0..n).map(|k| wirtinger(grid, data, nc, k, -1.0)).collect();
    let db: Vec<Vec<C64>> = (0..n).map(|k| wirtinger(grid, data, nc, k, 1.0)).collect();
    let mut dd = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            dd.push(apply_dd_bar(grid, data, nc, a, b));
        }
    }
    let valid = valid_nodes(grid);
    let mut out = ChernCurvatureField {
        grid: grid.clone(),
        rank: r,
        base_dim: n,
        values: vec![C64::default(); grid.len() * nc * n * n],
        valid: valid.clone(),
    };
    let m = |v: &[C64], node: usize| Mat::from_row_slice(r, r, &v[node * nc..(node + 1) * nc]);
    for node in 0..grid.len() {
        if !valid[node] {
            continue;
        }
        let hm = h.matrix(node);
        let hinv = inverse(&hm)?;
        let mut blocks = vec![Mat::zeros(r, r); n * n];
        for a in 0..n {
            for b in 0..n {
                let mut rb = -m(&dd[a * n + b], node) + m(&d[a], node) * &hinv * m(&db[b], node);
                if let Some(kappa) = &h.twist {
                    rb += &hm * kappa[(a, b)];
                }
                blocks[a * n + b] = rb;
            }
        }
        for a in 0..n {
            for b in 0..n {
                let sym = (&blocks[a * n + b] + blocks[b * n + a].adjoint()) * C64::new(0.5, 0.0);
                out.set_block(node, a, b, &sym);
            }
        }
    }
    let f = TensorField {
        grid: grid.clone(),
        slots: vec![],
        dims: vec![out.stride()],
        values: out.values.clone(),
    };
    f.check_finite("chern curvature")?;
    Ok(out)
}

/// log det g per node (zero where not positive).
fn log_det_field(g: &HermitianMatrixField) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(g.grid().len());
    for node in 0..g.grid().len() {
        let det = g.determinant(node);
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::NotPositiveDefinite {
                what: "metric determinant".into(),
                index: node,
                min_eig: det,
            });
        }
        out.push(det.ln());
    }
    Ok(out)
}

/// Ric_{αβ̄} = −∂_α∂̄_β log det g for a metric g on TM. log det g is real, so
/// only α ≤ β is differentiated and the rest follows by conjugation.
pub fn ricci_form(g: &HermitianMatrixField) -> Result<TensorField> {
    let grid = g.grid();
    let n = grid.complex_dim;
    if g.rank() != n {
        return Err(Error::Shape(format!(
            "metric on TM must be {n}x{n}, got rank {}",
            g.rank()
        )));
    }
    let ld = log_det_field(g)?;
    let mut out = TensorField::zeros(grid, vec![Slot::BaseHol, Slot::BaseAnti], vec![n, n])?;
    for a in 0..n {
        for b in a..n {
            let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
            let v: Vec<C64> = if a == b {
                let fxx = apply_d2(grid, &ld, 1, xa);
                let fyy = apply_d2(grid, &ld, 1, ya);
                fxx.iter()
                    .zip(&fyy)
                    .map(|(p, q)| C64::new(0.25 * (p + q), 0.0))
                    .collect()
            } else {
                let p = apply_mixed(grid, &ld, 1, xa, xb);
                let q = apply_mixed(grid, &ld, 1, ya, yb);
                let r = apply_mixed(grid, &ld, 1, xa, yb);
                let s = apply_mixed(grid, &ld, 1, ya, xb);
                (0..ld.len())
                    .map(|k| C64::new(0.25 * (p[k] + q[k]), 0.25 * (r[k] - s[k])))
                    .collect()
            };
            for node in 0..grid.len() {
                out.values[node * n * n + a * n + b] = -v[node];
                out.values[node * n * n + b * n + a] = -v[node].conj();
            }
        }
    }
    out.check_finite("ricci form")?;
    Ok(out)
}

/// K = −(1/g) ∂²log g/∂z∂z̄ for a metric on a curve.
pub fn gaussian_curvature(g: &HermitianMatrixField) -> Result<TensorField> {
    if g.rank() != 1 || g.grid().complex_dim != 1 {
        return Err(Error::Shape(
            "gaussian curvature needs a scalar metric on a curve".into(),
        ));
    }
    let ric = ricci_form(g)?;
    let values = (0..g.grid().len())
        .map(|i| ric.values[i] / g.field.values[i].re)
        .collect();
    Ok(TensorField {
        grid: g.grid().clone(),
        slots: vec![],
        dims: vec![],
        values,
    })
}

/// Largest |∂_α g_{γβ̄} − ∂_γ g_{αβ̄}| over nodes with full stencils.
pub fn kahler_defect(g: &HermitianMatrixField) -> f64 {
    let grid = g.grid();
    let n = grid.complex_dim;
    if n < 2 || g.rank() != n {
        return 0.0;
    }
    let d: Vec<Vec<C64>> = (0..n)
        .map(|k| wirtinger(grid, &g.field.values, n * n, k, -1.0))
        .collect();
    let valid = valid_nodes(grid);
    let mut worst: f64 = 0.0;
    for node in (0..grid.len()).filter(|&i| valid[i]) {
        for a in 0..n {
            for c in 0..n {
                for b in 0..n {
                    let x = d[a][node * n * n + c * n + b] - d[c][node * n * n + a * n + b];
                    worst = worst.max(x.norm());
                }
            }
        }
    }
    worst
}

/// Kählerity tolerance for base metrics.
pub const KAHLER_TOL: f64 = 1e-6;

pub fn check_kahler(g: &HermitianMatrixField) -> Result<()> {
    let defect = kahler_defect(g);
    if defect > KAHLER_TOL {
        return Err(Error::NotKahler {
            defect,
            tol: KAHLER_TOL,
        });
    }
    Ok(())
}
