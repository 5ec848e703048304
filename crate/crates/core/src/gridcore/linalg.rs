use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result, C64};

/// Dense complex matrix used for every small block.
pub type Mat = DMatrix<C64>;

/// Σ_{ij} M_{ij} a_i conj(b_j), the sesquilinear pairing with the first slot
/// holomorphic and the second antiholomorphic.
pub fn pair(m: &Mat, a: &[C64], b: &[C64]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            s += m[(i, j)] * a[i] * b[j].conj();
        }
    }
    s
}

/// Largest entrywise |M − M†|.
pub fn hermitian_defect(m: &Mat) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

pub fn hermitize(m: &Mat) -> Mat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn inverse(m: &Mat) -> Result<Mat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Shape("singular matrix".into()))
}

/// Lower Cholesky factor of the Hermitian part of `m`, or None unless `m` is
/// positive definite. nalgebra's complex Cholesky takes complex square roots
/// of negative pivots instead of failing, so the pivots are checked here.
pub fn positive_cholesky(m: &Mat) -> Option<Mat> {
    let l = hermitize(m).cholesky()?.l();
    let ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re
    });
    ok.then_some(l)
}

/// All generalized eigenvalues (ascending) and eigenvectors of the pencil
/// form·x = λ·metric·x. Eigenvectors are columns, normalized so x†·metric·x = 1.
pub fn eigen_pencil(form: &Mat, metric: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = metric.nrows();
    if form.nrows() != n || form.ncols() != n || metric.ncols() != n {
        return Err(Error::Shape(format!(
            "pencil blocks {}x{} and {}x{}",
            form.nrows(),
            form.ncols(),
            n,
            metric.ncols()
        )));
    }
    let l = positive_cholesky(metric).ok_or_else(|| Error::NotPositiveDefinite {
        what: "pencil metric".into(),
        index: 0,
        min_eig: f64::NAN,
    })?;
    let linv = l
        .clone()
        .solve_lower_triangular(&Mat::identity(n, n))
        .ok_or_else(|| Error::Shape("singular Cholesky factor".into()))?;
    let c = hermitize(&(&linv * hermitize(form) * linv.adjoint()));
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let back = linv.adjoint() * &eig.eigenvectors;
    let vecs = Mat::from_fn(n, n, |i, j| back[(i, order[j])]);
    Ok((vals, vecs))
}

/// Smallest λ with form·x = λ·metric·x.
pub fn min_eigen_pencil(form: &Mat, metric: &Mat) -> Result<f64> {
    match metric.nrows() {
        1 => {
            let m = metric[(0, 0)].re;
            if !(m > 0.0) {
                return Err(Error::NotPositiveDefinite {
                    what: "pencil metric".into(),
                    index: 0,
                    min_eig: m,
                });
            }
            Ok(form[(0, 0)].re / m)
        }
        2 => min_eigen_pencil_2x2(
            [form[(0, 0)].re, form[(1, 1)].re],
            form[(0, 1)],
            [metric[(0, 0)].re, metric[(1, 1)].re],
            metric[(0, 1)],
        ),
        _ => Ok(eigen_pencil(form, metric)?.0[0]),
    }
}

/// Closed-form 2×2 pencil: `a = [a11, a22]`, `a12`, `m = [m11, m22]`, `m12`.
pub fn min_eigen_pencil_2x2(a: [f64; 2], a12: C64, m: [f64; 2], m12: C64) -> Result<f64> {
    let det_m = m[0] * m[1] - m12.norm_sqr();
    if !(m[0] > 0.0) || !(det_m > 0.0) {
        return Err(Error::NotPositiveDefinite {
            what: "pencil metric".into(),
            index: 0,
            min_eig: det_m,
        });
    }
    // det(A − λM) = det_m λ² − bλ + det_a
    let b = a[0] * m[1] + a[1] * m[0] - 2.0 * (a12 * m12.conj()).re;
    let det_a = a[0] * a[1] - a12.norm_sqr();
    let disc = (b * b - 4.0 * det_m * det_a).max(0.0).sqrt();
    // Stable pairing of the two roots.
    let q = if b >= 0.0 {
        0.5 * (b + disc)
    } else {
        0.5 * (b - disc)
    };
    if q == 0.0 {
        return Ok(-(-det_a / det_m).max(0.0).sqrt());
    }
    Ok((q / det_m).min(det_a / q))
}
