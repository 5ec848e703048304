use serde::{Deserialize, Serialize};

use super::chern::ChernCurvatureField;
use crate::finsler::{
    chart_log_hessian, kobayashi_curvature, kobayashi_curvature_dual, FinslerMetricSpec,
    MetricFamily, ProjectivePoint,
};
use crate::gridcore::{inverse, positive_cholesky, HermitianMatrixField, Mat, D1};
use crate::{Error, Result, C64};

/// Step of the fiber finite differences used for ∂_aΨ.
pub const FIBER_STEP: f64 = 1e-3;

/// Both terms of the horizontal T-form at one point and direction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MokTermReport {
    pub point: ProjectivePoint,
    pub u: Vec<C64>,
    /// ⟨R^g(u, ū), −Ψ⟩ by index contraction.
    pub term_a: f64,
    /// |i_u ∂^V Ψ|² by index contraction.
    pub term_b: f64,
    /// Σ R(V, V̄, e_α, ē_β) R(e_β, ē_α, u, ū); present for E = TM.
    pub term_a_basis: Option<f64>,
    /// Σ |R(V, ē_α, u, ē_β)|²; present for E = TM.
    pub term_b_basis: Option<f64>,
    /// |i_uΨ|²_g, the part of term_b_basis not seen by term_b.
    pub null_defect: f64,
    /// V = G^{−1/2} g^{ασ̄} v̄_σ ∂_α; present for E = TM.
    pub v_unit: Option<Vec<C64>>,
    pub t_value: f64,
}

fn psi_at(spec: &FinslerMetricSpec, point: &ProjectivePoint) -> Result<Mat> {
    let v = point.vector();
    match spec.family {
        MetricFamily::HermitianInduced => kobayashi_curvature_dual(spec, point.base, &v),
        MetricFamily::PerturbedHermitian { .. } => kobayashi_curvature(spec, point.base, &v),
    }
}

/// ∂Ψ/∂w^a by fourth-order differences in the affine fiber coordinate.
fn psi_fiber_derivative(
    spec: &FinslerMetricSpec,
    point: &ProjectivePoint,
    a: usize,
) -> Result<Mat> {
    let n = spec.base_dim();
    let mut dx = Mat::zeros(n, n);
    let mut dy = Mat::zeros(n, n);
    for (k, &wk) in D1.iter().enumerate() {
        if wk == 0.0 {
            continue;
        }
        let s = (k as f64 - 2.0) * FIBER_STEP;
        for (dir, acc) in [(C64::new(s, 0.0), &mut dx), (C64::new(0.0, s), &mut dy)] {
            let mut w = point.w.clone();
            w[a] += dir;
            *acc += psi_at(spec, &point.with_w(w))? * C64::new(wk / FIBER_STEP, 0.0);
        }
    }
    Ok((dx - dy * C64::i()) * C64::new(0.5, 0.0))
}

/// Conjugate-transpose inverse convention: X with X_{ab} = M^{ab̄}, i.e. Σ_b X_{ab} M_{cb} = δ_ac.
fn upper(m: &Mat) -> Result<Mat> {
    inverse(&m.transpose())
}

/// R_{γδ̄μν̄} A^γ B̄^δ C^μ D̄^ν for a curvature of TM.
fn r4(rg: &ChernCurvatureField, node: usize, a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> C64 {
    let n = rg.base_dim;
    let mut s = C64::default();
    for mu in 0..n {
        for nu in 0..n {
            let blk = rg.block(node, mu, nu);
            let cd = c[mu] * d[nu].conj();
            for g in 0..n {
                for e in 0..n {
                    s += blk[(g, e)] * a[g] * b[e].conj() * cd;
                }
            }
        }
    }
    s
}

/// T-form terms at `point` for horizontal direction `u` (components u^α).
/// `rg` is the Chern curvature of the base metric `g`.
pub fn t_form(
    spec: &FinslerMetricSpec,
    g: &HermitianMatrixField,
    rg: &ChernCurvatureField,
    point: &ProjectivePoint,
    u: &[C64],
) -> Result<MokTermReport> {
    let n = spec.base_dim();
    let r = spec.rank();
    if u.len() != n || g.rank() != n || rg.rank != n {
        return Err(Error::Shape(
            "t_form needs n-vectors and metrics on TM".into(),
        ));
    }
    let node = point.base;
    let gm = g.matrix(node);
    let ginv = upper(&gm)?;
    let psi = psi_at(spec, point)?;
    let neg_psi = -&psi;
    let hess = chart_log_hessian(spec, point)?;
    let fs = hess.view((n, n), (r - 1, r - 1)).into_owned();

    // term A: (−Ψ)_{αδ̄} g^{αβ̄} g^{γδ̄} R_{γβ̄στ̄} u^σ ū^τ
    let ru = Mat::from_fn(n, n, |gam, bet| {
        let mut s = C64::default();
        for sig in 0..n {
            for tau in 0..n {
                s += rg.block(node, sig, tau)[(gam, bet)] * u[sig] * u[tau].conj();
            }
        }
        s
    });
    let mut term_a = C64::default();
    for al in 0..n {
        for de in 0..n {
            for be in 0..n {
                for ga in 0..n {
                    term_a += neg_psi[(al, de)] * ginv[(al, be)] * ginv[(ga, de)] * ru[(ga, be)];
                }
            }
        }
    }

    // term B: F^{ab̄} ∂_aΨ_{αβ̄} conj(∂_bΨ_{γτ̄}) u^α ū^γ g^{τβ̄}
    let mut term_b = C64::default();
    if r > 1 {
        let finv = upper(&fs)
            .map_err(|_| Error::Pseudoconvexity("singular fiber Hessian of log G".into()))?;
        let wvec: Vec<Vec<C64>> = (0..r - 1)
            .map(|a| {
                let d = psi_fiber_derivative(spec, point, a)?;
                Ok((0..n)
                    .map(|be| (0..n).map(|al| u[al] * d[(al, be)]).sum())
                    .collect())
            })
            .collect::<Result<_>>()?;
        for a in 0..r - 1 {
            for b in 0..r - 1 {
                for be in 0..n {
                    for ta in 0..n {
                        term_b += finv[(a, b)] * wvec[a][be] * wvec[b][ta].conj() * ginv[(ta, be)];
                    }
                }
            }
        }
    }

    // |i_uΨ|²_g
    let iu: Vec<C64> = (0..n)
        .map(|be| (0..n).map(|al| u[al] * psi[(al, be)]).sum())
        .collect();
    let mut null_defect = C64::default();
    for be in 0..n {
        for ta in 0..n {
            null_defect += iu[be] * iu[ta].conj() * ginv[(ta, be)];
        }
    }

    let tangent = r == n
        && spec.family == MetricFamily::HermitianInduced
        && spec.h.field.values == g.field.values;
    let (mut term_a_basis, mut term_b_basis, mut v_unit) = (None, None, None);
    if tangent {
        let v = point.vector();
        let gval = spec.g(node, &v);
        let vv: Vec<C64> = (0..n)
            .map(|al| (0..n).map(|s| ginv[(al, s)] * v[s].conj()).sum::<C64>() / gval.sqrt())
            .collect();
        // Columns e_α with Σ g_{ij} e_i ē_j = δ: E = L^{−T} for g = L L†.
        let l = positive_cholesky(&gm).ok_or_else(|| Error::NotPositiveDefinite {
            what: "g".into(),
            index: node,
            min_eig: f64::NAN,
        })?;
        let e = inverse(&l)?.transpose();
        let col = |k: usize| -> Vec<C64> { e.column(k).iter().copied().collect() };
        let mut ta = C64::default();
        let mut tb = 0.0;
        for al in 0..n {
            for be in 0..n {
                ta += r4(rg, node, &vv, &vv, &col(al), &col(be))
                    * r4(rg, node, &col(be), &col(al), u, u);
                tb += r4(rg, node, &vv, &col(al), u, &col(be)).norm_sqr();
            }
        }
        term_a_basis = Some(ta.re);
        term_b_basis = Some(tb);
        v_unit = Some(vv);
    }
    Ok(MokTermReport {
        point: point.clone(),
        u: u.to_vec(),
        term_a: term_a.re,
        term_b: term_b.re,
        term_a_basis,
        term_b_basis,
        null_defect: null_defect.re,
        v_unit,
        t_value: term_a.re - term_b.re,
    })
}
