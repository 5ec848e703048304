use serde::{Deserialize, Serialize};

use super::dual::Dual;
use super::spec::{BaseSeeds, FinslerMetricSpec};
use crate::gridcore::{Mat, OVERLAP_OUTER};
use crate::{Error, Result, C64};

/// A point of P(E*) in the affine chart v_pivot = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    /// Base grid node.
    pub base: usize,
    pub pivot: usize,
    /// w^a = v_a / v_pivot for a ≠ pivot, in increasing a.
    pub w: Vec<C64>,
}

impl ProjectivePoint {
    /// Chart with the largest-modulus coordinate as pivot.
    pub fn from_vector(base: usize, v: &[C64]) -> Result<Self> {
        let pivot = (0..v.len())
            .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))
            .ok_or_else(|| Error::InvalidPoint("empty fiber vector".into()))?;
        if v[pivot].norm() == 0.0 {
            return Err(Error::InvalidPoint("v = 0".into()));
        }
        let w = (0..v.len())
            .filter(|&a| a != pivot)
            .map(|a| v[a] / v[pivot])
            .collect();
        Ok(ProjectivePoint { base, pivot, w })
    }

    pub fn in_chart(base: usize, pivot: usize, w: Vec<C64>) -> Result<Self> {
        if w.iter().any(|x| x.norm() > OVERLAP_OUTER + 1e-12) {
            return Err(Error::InvalidPoint(format!(
                "|w| exceeds {OVERLAP_OUTER} in chart {pivot}"
            )));
        }
        Ok(ProjectivePoint { base, pivot, w })
    }

    /// Fiber index carried by affine coordinate `a`.
    pub fn fiber_index(&self, a: usize) -> usize {
        if a < self.pivot {
            a
        } else {
            a + 1
        }
    }

    /// Representative v with v_pivot = 1.
    pub fn vector(&self) -> Vec<C64> {
        let r = self.w.len() + 1;
        (0..r)
            .map(|i| match i.cmp(&self.pivot) {
                std::cmp::Ordering::Less => self.w[i],
                std::cmp::Ordering::Equal => C64::new(1.0, 0.0),
                std::cmp::Ordering::Greater => self.w[i - 1],
            })
            .collect()
    }

    pub fn with_w(&self, w: Vec<C64>) -> Self {
        ProjectivePoint {
            base: self.base,
            pivot: self.pivot,
            w,
        }
    }
}

/// Partial derivatives of G at (z, v). Fiber indices i, j, k run over 0..r,
/// base indices α, β over 0..n; block vectors are indexed by the base index
/// (or α·n + β for the doubly-base block).
#[derive(Clone, Debug)]
pub struct FinslerJet {
    pub v: Vec<C64>,
    pub g: f64,
    pub g_i: Vec<C64>,
    pub g_jb: Vec<C64>,
    pub g_ijb: Mat,
    pub g_ij: Mat,
    /// [k] → ∂³G/∂v_i∂v̄_j∂v_k.
    pub g_ijb_k: Vec<Mat>,
    /// [k] → ∂³G/∂v_i∂v̄_j∂v̄_k.
    pub g_ijb_kb: Vec<Mat>,
    pub g_alpha: Vec<C64>,
    /// [α] → G_{iα}.
    pub g_i_alpha: Vec<Vec<C64>>,
    /// [α] → G_{αj̄}.
    pub g_alpha_jb: Vec<Vec<C64>>,
    /// [α] → G_{ij̄α}.
    pub g_ijb_alpha: Vec<Mat>,
    /// [β] → G_{ij̄β̄}.
    pub g_ijb_betab: Vec<Mat>,
    pub g_alpha_betab: Mat,
    /// [α·n + β] → G_{ij̄αβ̄}.
    pub g_ijb_alpha_betab: Vec<Mat>,
}

fn seeded<const N: usize>(
    v: &[C64],
    hol: &[(usize, usize)],
    anti: &[(usize, usize)],
) -> (Vec<Dual<N>>, Vec<Dual<N>>) {
    let mut vd: Vec<Dual<N>> = v.iter().map(|&x| Dual::constant(x)).collect();
    let mut vb: Vec<Dual<N>> = v.iter().map(|&x| Dual::constant(x.conj())).collect();
    for &(slot, i) in hol {
        vd[i].add_term(1 << slot, C64::new(1.0, 0.0));
    }
    for &(slot, j) in anti {
        vb[j].add_term(1 << slot, C64::new(1.0, 0.0));
    }
    (vd, vb)
}

/// (G_{ij̄}) at (node, v).
pub fn fiber_hessian(spec: &FinslerMetricSpec, node: usize, v: &[C64]) -> Mat {
    let r = spec.rank();
    Mat::from_fn(r, r, |i, j| {
        let (vd, vb) = seeded::<4>(v, &[(0, i)], &[(1, j)]);
        spec.eval(node, &vd, &vb, BaseSeeds::default()).part(3)
    })
}

/// Full jet of G at a base node and nonzero fiber vector.
pub fn jet(spec: &FinslerMetricSpec, node: usize, v: &[C64]) -> Result<FinslerJet> {
    spec.check_node(node)?;
    let r = spec.rank();
    let n = spec.base_dim();
    if v.len() != r {
        return Err(Error::Shape(format!(
            "fiber vector of length {} for rank {r}",
            v.len()
        )));
    }
    if v.iter().all(|x| x.norm() == 0.0) {
        return Err(Error::InvalidPoint("v = 0".into()));
    }
    let zero = Mat::zeros(r, r);
    let mut jet = FinslerJet {
        v: v.to_vec(),
        g: spec.g(node, v),
        g_i: vec![C64::default(); r],
        g_jb: vec![C64::default(); r],
        g_ijb: zero.clone(),
        g_ij: zero.clone(),
        g_ijb_k: vec![zero.clone(); r],
        g_ijb_kb: vec![zero.clone(); r],
        g_alpha: vec![C64::default(); n],
        g_i_alpha: vec![vec![C64::default(); r]; n],
        g_alpha_jb: vec![vec![C64::default(); r]; n],
        g_ijb_alpha: vec![zero.clone(); n],
        g_ijb_betab: vec![zero.clone(); n],
        g_alpha_betab: Mat::zeros(n, n),
        g_ijb_alpha_betab: vec![zero; n * n],
    };
    // Slots: 0 = v_i, 1 = v̄_j, 2 = z^α, 3 = z̄^β.
    for i in 0..r {
        for j in 0..r {
            let (vd, vb) = seeded::<16>(v, &[(0, i)], &[(1, j)]);
            for a in 0..n {
                for b in 0..n {
                    let d = spec.eval(
                        node,
                        &vd,
                        &vb,
                        BaseSeeds {
                            z: Some((2, a)),
                            zb: Some((3, b)),
                        },
                    );
                    jet.g_ijb_alpha_betab[a * n + b][(i, j)] = d.part(15);
                    if b == 0 {
                        jet.g_ijb_alpha[a][(i, j)] = d.part(0b0111);
                    }
                    if a == 0 {
                        jet.g_ijb_betab[b][(i, j)] = d.part(0b1011);
                    }
                    if i == 0 && j == 0 {
                        jet.g_alpha_betab[(a, b)] = d.part(0b1100);
                        jet.g_alpha[a] = d.part(0b0100);
                    }
                    if j == 0 {
                        jet.g_i_alpha[a][i] = d.part(0b0101);
                    }
                    if i == 0 {
                        jet.g_alpha_jb[a][j] = d.part(0b0110);
                    }
                    if a == 0 && b == 0 {
                        jet.g_ijb[(i, j)] = d.part(0b0011);
                        if j == 0 {
                            jet.g_i[i] = d.part(0b0001);
                        }
                        if i == 0 {
                            jet.g_jb[j] = d.part(0b0010);
                        }
                    }
                }
            }
            let (vd, vb) = seeded::<4>(v, &[(0, i), (1, j)], &[]);
            jet.g_ij[(i, j)] = spec.eval(node, &vd, &vb, BaseSeeds::default()).part(3);
            for k in 0..r {
                let (vd, vb) = seeded::<8>(v, &[(0, i), (2, k)], &[(1, j)]);
                jet.g_ijb_k[k][(i, j)] = spec.eval(node, &vd, &vb, BaseSeeds::default()).part(7);
                let (vd, vb) = seeded::<8>(v, &[(0, i)], &[(1, j), (2, k)]);
                jet.g_ijb_kb[k][(i, j)] = spec.eval(node, &vd, &vb, BaseSeeds::default()).part(7);
            }
        }
    }
    Ok(jet)
}

/// Coefficients ∂_A∂̄_B log G in chart coordinates (z¹…zⁿ, w¹…w^{r−1}),
/// base indices first. Exact in the fiber, finite differences in the base.
pub fn chart_log_hessian(spec: &FinslerMetricSpec, point: &ProjectivePoint) -> Result<Mat> {
    spec.check_node(point.base)?;
    let n = spec.base_dim();
    let r = spec.rank();
    if point.w.len() + 1 != r {
        return Err(Error::Shape(format!(
            "{} affine coordinates for rank {r}",
            point.w.len()
        )));
    }
    let v = point.vector();
    let dim = n + r - 1;
    let mut m = Mat::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            let mut seeds = BaseSeeds::default();
            let mut hol = vec![];
            let mut anti = vec![];
            if a < n {
                seeds.z = Some((0, a));
            } else {
                hol.push((0, point.fiber_index(a - n)));
            }
            if b < n {
                seeds.zb = Some((1, b));
            } else {
                anti.push((1, point.fiber_index(b - n)));
            }
            let (vd, vb) = seeded::<4>(&v, &hol, &anti);
            m[(a, b)] = spec.eval(point.base, &vd, &vb, seeds).ln().part(3);
        }
    }
    Ok(m)
}
