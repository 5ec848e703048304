use super::integrator::{advance, Scheme};
use crate::curvature::chern_curvature;
use crate::gridcore::{inverse, HermitianMatrixField, Mat};
use crate::{Error, Result, C64};

/// g^{αβ̄} as a matrix indexed [α][β].
pub(crate) fn inverse_metric(g: &Mat) -> Result<Mat> {
    inverse(&g.transpose())
}

/// Right-hand side −(Λ_g R^h + (r−1)h) of the Hermitian-Yang-Mills flow.
pub fn hym_rhs(h: &HermitianMatrixField, g: &HermitianMatrixField) -> Result<Vec<C64>> {
    let r = h.rank();
    let n = h.grid().complex_dim;
    if g.rank() != n || g.grid().len() != h.grid().len() {
        return Err(Error::Shape(
            "base metric does not match the bundle grid".into(),
        ));
    }
    let curv = chern_curvature(h)?;
    let mut out = vec![C64::default(); h.field.values.len()];
    for node in 0..h.grid().len() {
        if !curv.valid[node] {
            continue;
        }
        let ginv = inverse_metric(&g.matrix(node))?;
        let mut lambda = Mat::zeros(r, r);
        for a in 0..n {
            for b in 0..n {
                lambda += curv.block(node, a, b) * ginv[(a, b)];
            }
        }
        let rhs = -(lambda + h.matrix(node) * C64::new((r - 1) as f64, 0.0));
        out[node * r * r..(node + 1) * r * r].copy_from_slice(rhs.transpose().as_slice());
    }
    Ok(out)
}

/// One step of the Hermitian-Yang-Mills flow, re-Hermitized and checked for
/// positivity.
pub fn hym_step(
    h: &HermitianMatrixField,
    g: &HermitianMatrixField,
    dt: f64,
    scheme: Scheme,
) -> Result<HermitianMatrixField> {
    let mut stage = h.clone();
    let values = advance(
        &h.field.values,
        dt,
        scheme,
        |_, y| {
            stage.field.values.copy_from_slice(y);
            hym_rhs(&stage, g)
        },
        |_| {},
    )?;
    let mut out = h.clone();
    out.field.values = values;
    out.hermitize();
    out.field.check_finite("hym step")?;
    out.check_positive_definite("h")?;
    Ok(out)
}
