use super::forms::{decomposition_forms, kobayashi_curvature, log_fiber_hessian};
use super::jet::{chart_log_hessian, jet, FinslerJet, ProjectivePoint};
use super::spec::{BaseSeeds, FinslerMetricSpec};
use crate::gridcore::{inverse, Mat, Topology, D1, D2};
use crate::{Error, Result, C64};

/// Step of the continuous finite differences taken in fiber coordinates.
pub const FIBER_FD_STEP: f64 = 1e-2;

/// Residuals of the homogeneity identities of a jet.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JetIdentityResiduals {
    /// |G_i v_i − G|
    pub euler_hol: f64,
    /// |G_j̄ v̄_j − G|
    pub euler_anti: f64,
    /// |G_{ij̄} v_i v̄_j − G|
    pub quadratic: f64,
    /// max_j |G_{ij} v_i|
    pub hol_hessian: f64,
    /// max_{j,k} |G_{ij̄k} v_i|
    pub third_hol: f64,
    /// max_{i,k} |G_{ij̄k̄} v̄_j|
    pub third_anti: f64,
}

impl JetIdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.euler_hol,
            self.euler_anti,
            self.quadratic,
            self.hol_hessian,
            self.third_hol,
            self.third_anti,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn jet_identity_residuals(j: &FinslerJet) -> JetIdentityResiduals {
    let v = &j.v;
    let r = v.len();
    let g = C64::new(j.g, 0.0);
    let euler_hol = ((0..r).map(|i| j.g_i[i] * v[i]).sum::<C64>() - g).norm();
    let euler_anti = ((0..r).map(|i| j.g_jb[i] * v[i].conj()).sum::<C64>() - g).norm();
    let quadratic = (crate::gridcore::pair(&j.g_ijb, v, v) - g).norm();
    let mut hol_hessian: f64 = 0.0;
    let mut third_hol: f64 = 0.0;
    let mut third_anti: f64 = 0.0;
    for b in 0..r {
        hol_hessian = hol_hessian.max((0..r).map(|i| j.g_ij[(i, b)] * v[i]).sum::<C64>().norm());
        for k in 0..r {
            third_hol = third_hol.max(
                (0..r)
                    .map(|i| j.g_ijb_k[k][(i, b)] * v[i])
                    .sum::<C64>()
                    .norm(),
            );
            third_anti = third_anti.max(
                (0..r)
                    .map(|jj| j.g_ijb_kb[k][(b, jj)] * v[jj].conj())
                    .sum::<C64>()
                    .norm(),
            );
        }
    }
    JetIdentityResiduals {
        euler_hol,
        euler_anti,
        quadratic,
        hol_hessian,
        third_hol,
        third_anti,
    }
}

/// Relative defects of G(z, λv) = |λ|²G(z, v) and G_i(z, λv) = λ̄ G_i(z, v).
pub fn homogeneity_residuals(
    spec: &FinslerMetricSpec,
    node: usize,
    v: &[C64],
    lambda: C64,
) -> Result<(f64, f64)> {
    let lv: Vec<C64> = v.iter().map(|x| x * lambda).collect();
    let g0 = spec.g(node, v);
    let g1 = spec.g(node, &lv);
    let rel_g = (g1 - lambda.norm_sqr() * g0).abs() / (lambda.norm_sqr() * g0);
    let j0 = jet(spec, node, v)?;
    let j1 = jet(spec, node, &lv)?;
    let scale = j0.g_i.iter().map(|z| z.norm()).fold(0.0, f64::max) * lambda.norm();
    let d = j0
        .g_i
        .iter()
        .zip(&j1.g_i)
        .map(|(a, b)| (b - lambda.conj() * a).norm())
        .fold(0.0, f64::max);
    Ok((rel_g, d / scale.max(f64::MIN_POSITIVE)))
}

/// Finite differences of functions on P(E*) in chart coordinates. Real axes
/// `0..2n` are base grid axes (grid stencils); the following `2(r−1)` axes are
/// the real and imaginary parts of w (continuous step).
struct ChartFd<'a> {
    spec: &'a FinslerMetricSpec,
    point: &'a ProjectivePoint,
    step: f64,
}

impl ChartFd<'_> {
    fn base_axes(&self) -> usize {
        2 * self.spec.base_dim()
    }

    fn spacing(&self, axis: usize) -> f64 {
        if axis < self.base_axes() {
            self.spec.grid().axes[axis].spacing
        } else {
            self.step
        }
    }

    fn shifted(&self, shifts: &[(usize, isize)]) -> Result<ProjectivePoint> {
        let grid = self.spec.grid();
        let mut coords = grid.coords(self.point.base);
        let mut w = self.point.w.clone();
        for &(axis, k) in shifts {
            if axis < self.base_axes() {
                let a = &grid.axes[axis];
                let j = coords[axis] as isize + k;
                coords[axis] = match a.topology {
                    Topology::Periodic => j.rem_euclid(a.n as isize) as usize,
                    Topology::Bounded => {
                        if j < 0 || j >= a.n as isize {
                            return Err(Error::InvalidPoint(
                                "stencil leaves the base chart".into(),
                            ));
                        }
                        j as usize
                    }
                };
            } else {
                let f = axis - self.base_axes();
                let d = k as f64 * self.step;
                w[f / 2] += if f.is_multiple_of(2) {
                    C64::new(d, 0.0)
                } else {
                    C64::new(0.0, d)
                };
            }
        }
        Ok(ProjectivePoint {
            base: grid.index(&coords),
            pivot: self.point.pivot,
            w,
        })
    }

    fn d1<F: Fn(&ProjectivePoint) -> Result<C64>>(&self, f: &F, axis: usize) -> Result<C64> {
        let mut acc = C64::default();
        for (k, &wk) in D1.iter().enumerate() {
            if wk != 0.0 {
                acc += f(&self.shifted(&[(axis, k as isize - 2)])?)? * wk;
            }
        }
        Ok(acc / self.spacing(axis))
    }

    fn d2<F: Fn(&ProjectivePoint) -> Result<C64>>(
        &self,
        f: &F,
        a1: usize,
        a2: usize,
    ) -> Result<C64> {
        let mut acc = C64::default();
        if a1 == a2 {
            for (k, &wk) in D2.iter().enumerate() {
                acc += f(&self.shifted(&[(a1, k as isize - 2)])?)? * wk;
            }
            let h = self.spacing(a1);
            return Ok(acc / (h * h));
        }
        for (k1, &w1) in D1.iter().enumerate() {
            for (k2, &w2) in D1.iter().enumerate() {
                if w1 != 0.0 && w2 != 0.0 {
                    acc += f(&self.shifted(&[(a1, k1 as isize - 2), (a2, k2 as isize - 2)])?)?
                        * (w1 * w2);
                }
            }
        }
        Ok(acc / (self.spacing(a1) * self.spacing(a2)))
    }

    /// ∂/∂ξ^A (sign −1) or ∂/∂ξ̄^A (sign +1) for complex chart coordinate A.
    fn wirtinger<F: Fn(&ProjectivePoint) -> Result<C64>>(
        &self,
        f: &F,
        cplx: usize,
        sign: f64,
    ) -> Result<C64> {
        let dx = self.d1(f, 2 * cplx)?;
        let dy = self.d1(f, 2 * cplx + 1)?;
        Ok((dx + C64::new(0.0, sign) * dy) * 0.5)
    }

    /// ∂²f/∂ξ^A∂ξ̄^B.
    fn dd_bar<F: Fn(&ProjectivePoint) -> Result<C64>>(
        &self,
        f: &F,
        a: usize,
        b: usize,
    ) -> Result<C64> {
        let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        let p = self.d2(f, xa, xb)?;
        let q = self.d2(f, ya, yb)?;
        let r = self.d2(f, xa, yb)?;
        let s = self.d2(f, ya, xb)?;
        Ok((p + q + C64::i() * (r - s)) * 0.25)
    }
}

/// Exact fiber block ∂²log G/∂w^a∂w̄^b at a chart point (no base derivatives).
pub fn fiber_log_hessian(spec: &FinslerMetricSpec, point: &ProjectivePoint) -> Mat {
    let r = spec.rank();
    let v = point.vector();
    Mat::from_fn(r - 1, r - 1, |a, b| {
        let mut vd: Vec<super::Dual<4>> = v.iter().map(|&x| super::Dual::constant(x)).collect();
        let mut vb: Vec<super::Dual<4>> =
            v.iter().map(|&x| super::Dual::constant(x.conj())).collect();
        vd[point.fiber_index(a)].add_term(1, C64::new(1.0, 0.0));
        vb[point.fiber_index(b)].add_term(2, C64::new(1.0, 0.0));
        spec.eval(point.base, &vd, &vb, BaseSeeds::default())
            .ln()
            .part(3)
    })
}

fn log_g(spec: &FinslerMetricSpec, p: &ProjectivePoint) -> Result<C64> {
    Ok(C64::new(spec.g(p.base, &p.vector()).ln(), 0.0))
}

fn max_entry(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The coefficient matrix of √−1∂∂̄log G in (z, w) coordinates by finite
/// differences of log G alone. The twist weight contributes its constant ∂∂̄.
pub fn log_hessian_fd(spec: &FinslerMetricSpec, point: &ProjectivePoint) -> Result<Mat> {
    spec.check_node(point.base)?;
    let n = spec.base_dim();
    let dim = n + spec.rank() - 1;
    let fd = ChartFd {
        spec,
        point,
        step: FIBER_FD_STEP,
    };
    let f = |p: &ProjectivePoint| log_g(spec, p);
    let mut m = Mat::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            m[(a, b)] = fd.dd_bar(&f, a, b)?;
        }
    }
    if let Some(k) = spec.twist() {
        for a in 0..n {
            for b in 0..n {
                m[(a, b)] += k[(a, b)];
            }
        }
    }
    Ok(m)
}

/// Max entrywise gap between the finite-difference ∂∂̄log G and −Ψ + ω_FS
/// assembled in the horizontal frame and carried to coordinates.
pub fn decomposition_residual(spec: &FinslerMetricSpec, point: &ProjectivePoint) -> Result<f64> {
    let oracle = log_hessian_fd(spec, point)?;
    let forms = decomposition_forms(spec, point)?;
    Ok(max_entry(&(oracle - forms.coordinate_matrix())))
}

/// (−Ψ)_{αβ̄} against f_{αβ̄} − f_{αd̄}f^{d̄c}f_{cβ̄}, f = log G in chart coordinates.
pub fn coefficient_identity_residual(
    spec: &FinslerMetricSpec,
    point: &ProjectivePoint,
) -> Result<f64> {
    let n = spec.base_dim();
    let r = spec.rank();
    let m = chart_log_hessian(spec, point)?;
    let f = m.view((n, n), (r - 1, r - 1)).into_owned();
    let zw = m.view((0, n), (n, r - 1)).into_owned();
    let wz = m.view((n, 0), (r - 1, n)).into_owned();
    let zz = m.view((0, 0), (n, n)).into_owned();
    let schur = if r > 1 {
        let finv = inverse(&f)
            .map_err(|_| Error::Pseudoconvexity("singular fiber Hessian of log G".into()))?;
        zz - zw * finv * wz
    } else {
        zz
    };
    let psi = kobayashi_curvature(spec, point.base, &point.vector())?;
    Ok(max_entry(&(schur + psi)))
}

/// ω_V = ∂²log G/∂v_i∂v̄_j against q*ω_FS = Jᵀ F J̄, with F from the chart at
/// the normalized point and J = ∂w/∂v. Returns the max coefficient gap.
pub fn pullback_residual(spec: &FinslerMetricSpec, node: usize, v: &[C64]) -> Result<f64> {
    let r = spec.rank();
    let j = jet(spec, node, v)?;
    let omega_v = log_fiber_hessian(&j);
    if r == 1 {
        return Ok(max_entry(&omega_v));
    }
    let point = ProjectivePoint::from_vector(node, v)?;
    let f = fiber_log_hessian(spec, &point);
    let k = point.pivot;
    let vk = v[k];
    let jac = Mat::from_fn(r - 1, r, |a, i| {
        let ia = point.fiber_index(a);
        let mut x = C64::default();
        if i == ia {
            x += 1.0 / vk;
        }
        if i == k {
            x -= v[ia] / (vk * vk);
        }
        x
    });
    let pulled = jac.transpose() * f * jac.map(|z| z.conj());
    Ok(max_entry(&(omega_v - pulled)))
}

/// |ω_V(T, T̄)| for the Euler vector T = v_i ∂/∂v_i.
pub fn euler_degeneracy(spec: &FinslerMetricSpec, node: usize, v: &[C64]) -> Result<f64> {
    let j = jet(spec, node, v)?;
    Ok(crate::gridcore::pair(&log_fiber_hessian(&j), v, v).norm())
}

/// ∂_a∂̄_b of a function of complex variables by fourth-order differences.
fn complex_hessian(f: &dyn Fn(&[C64]) -> Result<C64>, x: &[C64], step: f64) -> Result<Mat> {
    let m = x.len();
    let eval = |shifts: &[(usize, isize)]| -> Result<C64> {
        let mut y = x.to_vec();
        for &(axis, k) in shifts {
            let d = k as f64 * step;
            y[axis / 2] += if axis % 2 == 0 {
                C64::new(d, 0.0)
            } else {
                C64::new(0.0, d)
            };
        }
        f(&y)
    };
    let d2 = |a1: usize, a2: usize| -> Result<C64> {
        let mut acc = C64::default();
        if a1 == a2 {
            for (k, &w) in D2.iter().enumerate() {
                acc += eval(&[(a1, k as isize - 2)])? * w;
            }
        } else {
            for (k1, &w1) in D1.iter().enumerate() {
                for (k2, &w2) in D1.iter().enumerate() {
                    if w1 != 0.0 && w2 != 0.0 {
                        acc += eval(&[(a1, k1 as isize - 2), (a2, k2 as isize - 2)])? * (w1 * w2);
                    }
                }
            }
        }
        Ok(acc / (step * step))
    };
    let mut out = Mat::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
            out[(a, b)] =
                (d2(xa, xb)? + d2(ya, yb)? + C64::i() * (d2(xa, yb)? - d2(ya, xb)?)) * 0.25;
        }
    }
    Ok(out)
}

/// Σ_{ab} M^{b̄a} H_{ab̄} = tr(M⁻¹H).
fn trace_against(m: &Mat, h: &Mat) -> Result<C64> {
    let minv = inverse(m).map_err(|_| Error::Pseudoconvexity("singular fiber Hessian".into()))?;
    Ok((minv * h).trace())
}

/// Vertical Laplacian (log G)^{b̄a} ∂²f/∂w^a∂w̄^b of a function of the affine
/// fiber coordinates.
pub fn vertical_laplacian(
    spec: &FinslerMetricSpec,
    point: &ProjectivePoint,
    f: &dyn Fn(&[C64]) -> f64,
) -> Result<f64> {
    if spec.rank() == 1 {
        return Ok(0.0);
    }
    let fs = fiber_log_hessian(spec, point);
    let h = complex_hessian(
        &|w: &[C64]| Ok(C64::new(f(w), 0.0)),
        &point.w,
        FIBER_FD_STEP,
    )?;
    Ok(trace_against(&fs, &h)?.re)
}

/// The same Laplacian in E° form, G·G^{j̄i}∂²f̃/∂v_i∂v̄_j with f̃(v) = f(w(v)).
pub fn vertical_laplacian_euclidean(
    spec: &FinslerMetricSpec,
    point: &ProjectivePoint,
    f: &dyn Fn(&[C64]) -> f64,
) -> Result<f64> {
    let v = point.vector();
    let k = point.pivot;
    let lifted = |y: &[C64]| -> Result<C64> {
        let w: Vec<C64> = (0..y.len())
            .filter(|&i| i != k)
            .map(|i| y[i] / y[k])
            .collect();
        Ok(C64::new(f(&w), 0.0))
    };
    let h = complex_hessian(&lifted, &v, FIBER_FD_STEP)?;
    let gm = super::fiber_hessian(spec, point.base, &v);
    Ok((trace_against(&gm, &h)? * spec.g(point.base, &v)).re)
}

/// Both sides of f^{b̄a}∂_a∂_b̄(−Ψ)_{αβ̄} = ∂∂̄log det(f_{ab̄})(δ_α, δ̄_β) − ⟨∂̄^V δ_α, ∂̄^V δ_β⟩,
/// evaluated independently; returns (left, right).
pub fn vertical_psi_sides(
    spec: &FinslerMetricSpec,
    point: &ProjectivePoint,
    alpha: usize,
    beta: usize,
) -> Result<(C64, C64)> {
    spec.check_node(point.base)?;
    let n = spec.base_dim();
    let r = spec.rank();
    if r == 1 {
        return Ok((C64::default(), C64::default()));
    }
    let node = point.base;
    let fs = fiber_log_hessian(spec, point);

    // Left: fiber differences of Ψ at a fixed base node.
    let pivot = point.pivot;
    let neg_psi = |w: &[C64]| -> Result<C64> {
        let p = ProjectivePoint {
            base: node,
            pivot,
            w: w.to_vec(),
        };
        Ok(-kobayashi_curvature(spec, node, &p.vector())?[(alpha, beta)])
    };
    let left = trace_against(&fs, &complex_hessian(&neg_psi, &point.w, FIBER_FD_STEP)?)?;

    // Right, first term: L = log det F on (z, w), differentiated in chart coordinates.
    let fd = ChartFd {
        spec,
        point,
        step: FIBER_FD_STEP,
    };
    let ldet = |p: &ProjectivePoint| -> Result<C64> {
        let det = fiber_log_hessian(spec, p).determinant().re;
        if !(det > 0.0) {
            return Err(Error::Pseudoconvexity(format!(
                "det of fiber Hessian {det:.3e} at node {}",
                p.base
            )));
        }
        Ok(C64::new(det.ln(), 0.0))
    };
    let forms = decomposition_forms(spec, point)?;
    let nn = &forms.connection;
    let mut first = fd.dd_bar(&ldet, alpha, beta)?;
    for a in 0..r - 1 {
        first -= nn[(alpha, a)] * fd.dd_bar(&ldet, n + a, beta)?;
        first -= fd.dd_bar(&ldet, alpha, n + a)? * nn[(beta, a)].conj();
        for b in 0..r - 1 {
            first += nn[(alpha, a)] * nn[(beta, b)].conj() * fd.dd_bar(&ldet, n + a, n + b)?;
        }
    }

    // Right, second term: f^{b̄a} ∂_b̄N^c_α conj(∂_ā N^d_β) f_{cd̄}.
    let conn = |p: &ProjectivePoint, gamma: usize, c: usize| -> Result<C64> {
        Ok(decomposition_forms(spec, p)?.connection[(gamma, c)])
    };
    let mut dn_a = Mat::zeros(r - 1, r - 1); // [b][c] = ∂_b̄ N^c_α
    let mut dn_b = Mat::zeros(r - 1, r - 1); // [a][d] = ∂_ā N^d_β
    for b in 0..r - 1 {
        for c in 0..r - 1 {
            dn_a[(b, c)] = fd.wirtinger(&|p: &ProjectivePoint| conn(p, alpha, c), n + b, 1.0)?;
            dn_b[(b, c)] = fd.wirtinger(&|p: &ProjectivePoint| conn(p, beta, c), n + b, 1.0)?;
        }
    }
    let finv = inverse(&fs).map_err(|_| Error::Pseudoconvexity("singular fiber Hessian".into()))?;
    let mut second = C64::default();
    for a in 0..r - 1 {
        for b in 0..r - 1 {
            for c in 0..r - 1 {
                for d in 0..r - 1 {
                    second += finv[(b, a)] * dn_a[(b, c)] * dn_b[(a, d)].conj() * fs[(c, d)];
                }
            }
        }
    }
    Ok((left, first - second))
}

/// |left − right| of the vertical-Ψ identity.
pub fn vertical_psi_residual(
    spec: &FinslerMetricSpec,
    point: &ProjectivePoint,
    alpha: usize,
    beta: usize,
) -> Result<f64> {
    let (l, r) = vertical_psi_sides(spec, point, alpha, beta)?;
    Ok((l - r).norm())
}
