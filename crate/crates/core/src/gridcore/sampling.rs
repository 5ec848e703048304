//! Deterministic low-discrepancy samples.

use crate::C64;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`, in (0, 1).
pub fn halton(index: u64, base: u32) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    let b = base as u64;
    while i > 0 {
        f /= base as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Halton point number `index` (1-based internally, so 0 is valid) in [0,1)^dim,
/// using the primes starting at position `offset`.
pub fn halton_point(index: u64, dim: usize, offset: usize) -> Vec<f64> {
    (0..dim)
        .map(|d| halton(index + 1, PRIMES[(offset + d) % PRIMES.len()]))
        .collect()
}

/// Unit vector on the sphere S^{2m−1} ⊂ ℂ^m: Halton coordinates pushed through
/// Box-Muller and normalized.
pub fn sphere_direction(index: u64, m: usize, offset: usize) -> Vec<C64> {
    if m == 1 {
        let t = halton(index + 1, PRIMES[offset % PRIMES.len()]);
        return vec![C64::from_polar(1.0, std::f64::consts::TAU * t)];
    }
    let u = halton_point(index, 2 * m, offset);
    let mut v: Vec<C64> = (0..m)
        .map(|k| {
            let r = (-2.0 * (1.0 - u[2 * k]).ln()).sqrt();
            C64::from_polar(r, std::f64::consts::TAU * u[2 * k + 1])
        })
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        v[0] = C64::new(1.0, 0.0);
        return v;
    }
    v.iter_mut().for_each(|z| *z /= norm);
    v
}
