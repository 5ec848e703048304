use serde::{Deserialize, Serialize};

use super::jet::{jet, FinslerJet, ProjectivePoint};
use super::spec::{FinslerMetricSpec, MetricFamily};
use crate::gridcore::{hermitize, inverse, Mat};
use crate::{Error, Result, C64};

/// R_{ij̄αβ̄} = −G_{ij̄αβ̄} + G^{l̄k} G_{il̄α} G_{kj̄β̄}, indexed [α·n + β].
pub fn finsler_chern_tensor(j: &FinslerJet, n: usize) -> Result<Vec<Mat>> {
    let x = inverse(&j.g_ijb)
        .map_err(|_| Error::Pseudoconvexity("singular fiber Hessian (G_ij)".into()))?;
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            out.push(-&j.g_ijb_alpha_betab[a * n + b] + &j.g_ijb_alpha[a] * &x * &j.g_ijb_betab[b]);
        }
    }
    Ok(out)
}

/// Ψ_{αβ̄} = R_{ij̄αβ̄} v_i v̄_j / G from a jet.
pub fn psi_from_jet(j: &FinslerJet, n: usize) -> Result<Mat> {
    let r = finsler_chern_tensor(j, n)?;
    let psi = Mat::from_fn(n, n, |a, b| {
        crate::gridcore::pair(&r[a * n + b], &j.v, &j.v) / j.g
    });
    Ok(hermitize(&psi))
}

/// Kobayashi curvature Ψ at (node, v) from the Finsler jet.
pub fn kobayashi_curvature(spec: &FinslerMetricSpec, node: usize, v: &[C64]) -> Result<Mat> {
    psi_from_jet(&jet(spec, node, v)?, spec.base_dim())
}

/// Ψ for a Hermitian-induced metric from the curvature of h:
/// −Ψ_{αβ̄} = y† R^h_{αβ̄} y / G with y = h⁻¹v.
pub fn kobayashi_curvature_dual(spec: &FinslerMetricSpec, node: usize, v: &[C64]) -> Result<Mat> {
    if spec.family != MetricFamily::HermitianInduced {
        return Err(Error::Config(
            "the dual-curvature route needs a Hermitian-induced metric".into(),
        ));
    }
    spec.check_node(node)?;
    let n = spec.base_dim();
    let rh = spec.dual_curvature()?;
    let hinv = inverse(&spec.h.matrix(node))?;
    let y = &hinv * nalgebra::DVector::from_column_slice(v);
    let g = spec.g(node, v);
    let psi = Mat::from_fn(n, n, |a, b| {
        -(y.adjoint() * rh.block(node, a, b) * &y)[(0, 0)] / g
    });
    Ok(hermitize(&psi))
}

/// ∂²log G/∂v_i∂v̄_j = (G G_{ij̄} − G_i G_j̄)/G².
pub fn log_fiber_hessian(j: &FinslerJet) -> Mat {
    let r = j.v.len();
    Mat::from_fn(r, r, |a, b| {
        (j.g_ijb[(a, b)] * j.g - j.g_i[a] * j.g_jb[b]) / (j.g * j.g)
    })
}

/// Ψ, ω_FS and the nonlinear connection at a projective point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionForms {
    pub point: ProjectivePoint,
    /// Ψ_{αβ̄}, n×n.
    pub psi: Mat,
    /// (ω_FS)_{ab̄} = ∂²log G/∂w^a∂w̄^b, (r−1)×(r−1).
    pub fs: Mat,
    /// N^a_α stored as [α][a], n×(r−1).
    pub connection: Mat,
}

/// Evaluates the decomposition payload from one jet at the chart representative.
///
/// ω_FS uses the restriction formula |v_k|²·∂²log G/∂v_a∂v̄_b and the connection
/// N^a_α = G_{αl̄}G^{l̄a}/v_k − v_a G_{αl̄}G^{l̄k}/v_k².
pub fn decomposition_forms(
    spec: &FinslerMetricSpec,
    point: &ProjectivePoint,
) -> Result<DecompositionForms> {
    let n = spec.base_dim();
    let r = spec.rank();
    let v = point.vector();
    let j = jet(spec, point.base, &v)?;
    let psi = psi_from_jet(&j, n)?;
    let lh = log_fiber_hessian(&j);
    let k = point.pivot;
    let vk = v[k];
    let fs = hermitize(&Mat::from_fn(r - 1, r - 1, |a, b| {
        lh[(point.fiber_index(a), point.fiber_index(b))] * vk.norm_sqr()
    }));
    let x = inverse(&j.g_ijb)
        .map_err(|_| Error::Pseudoconvexity("singular fiber Hessian (G_ij)".into()))?;
    let connection = Mat::from_fn(n, r - 1, |alpha, a| {
        let ia = point.fiber_index(a);
        let mut s_a = C64::default();
        let mut s_k = C64::default();
        for l in 0..r {
            s_a += j.g_alpha_jb[alpha][l] * x[(l, ia)];
            s_k += j.g_alpha_jb[alpha][l] * x[(l, k)];
        }
        s_a / vk - v[ia] * s_k / (vk * vk)
    });
    Ok(DecompositionForms {
        point: point.clone(),
        psi,
        fs,
        connection,
    })
}

impl DecompositionForms {
    /// −Ψ + ω_FS expressed in the coordinate frame {∂/∂z^α, ∂/∂w^a}:
    /// ∂/∂z^α = δ/δz^α + N^a_α ∂/∂w^a.
    pub fn coordinate_matrix(&self) -> Mat {
        let n = self.psi.nrows();
        let m = self.fs.nrows();
        let nf = &self.connection * &self.fs;
        let mut out = Mat::zeros(n + m, n + m);
        let horiz = -&self.psi + &nf * self.connection.adjoint();
        out.view_mut((0, 0), (n, n)).copy_from(&horiz);
        out.view_mut((0, n), (n, m)).copy_from(&nf);
        out.view_mut((n, 0), (m, n)).copy_from(&nf.adjoint());
        out.view_mut((n, n), (m, m)).copy_from(&self.fs);
        out
    }
}
