//! Truncated multilinear dual numbers.
//!
//! `Dual<N>` carries `N = 2^k` coefficients indexed by subsets of `k`
//! nilpotent generators e_s with e_s² = 0. Seeding variable x_s as
//! x + e_s and evaluating a function yields every mixed partial derivative
//! ∂^|S| f / ∏_{s∈S} ∂x_s as the coefficient of the monomial ∏_{s∈S} e_s.
//! Complex variables and their conjugates are seeded independently, which
//! gives Wirtinger derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub c: [C64; N],
}

const ZERO: C64 = C64::new(0.0, 0.0);

impl<const N: usize> Dual<N> {
    pub const SLOTS: usize = N.trailing_zeros() as usize;

    pub fn constant(x: C64) -> Self {
        let mut c = [ZERO; N];
        c[0] = x;
        Dual { c }
    }

    pub fn real(x: f64) -> Self {
        Self::constant(C64::new(x, 0.0))
    }

    /// x + e_slot.
    pub fn var(x: C64, slot: usize) -> Self {
        let mut d = Self::constant(x);
        d.c[1 << slot] = C64::new(1.0, 0.0);
        d
    }

    /// Adds `coef · e_mask` in place.
    pub fn add_term(&mut self, mask: usize, coef: C64) {
        self.c[mask] += coef;
    }

    pub fn value(&self) -> C64 {
        self.c[0]
    }

    /// Coefficient of ∏_{s ∈ mask} e_s, the corresponding mixed partial.
    pub fn part(&self, mask: usize) -> C64 {
        self.c[mask]
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        for v in out.c.iter_mut() {
            *v *= s;
        }
        out
    }

    /// Σ_k coefs[k]·n^k where n is the nilpotent part of `self`.
    fn series(&self, coefs: &[C64]) -> Self {
        let mut nil = *self;
        nil.c[0] = ZERO;
        let mut out = Self::constant(coefs[0]);
        let mut pow = Self::constant(C64::new(1.0, 0.0));
        for &k in &coefs[1..] {
            pow = pow * nil;
            if pow.c.iter().all(|v| *v == ZERO) {
                break;
            }
            out = out + pow.scale(k);
        }
        out
    }

    pub fn recip(&self) -> Self {
        let x0 = self.c[0];
        let mut coefs = vec![C64::new(1.0, 0.0) / x0];
        for k in 1..=Self::SLOTS {
            coefs.push(-coefs[k - 1] / x0);
        }
        self.series(&coefs)
    }

    pub fn ln(&self) -> Self {
        let x0 = self.c[0];
        let mut coefs = vec![x0.ln()];
        let mut p = C64::new(1.0, 0.0);
        for k in 1..=Self::SLOTS {
            p /= x0;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            coefs.push(p * (sign / k as f64));
        }
        self.series(&coefs)
    }

    pub fn exp(&self) -> Self {
        let e0 = self.c[0].exp();
        let mut coefs = vec![e0];
        let mut fact = 1.0;
        for k in 1..=Self::SLOTS {
            fact *= k as f64;
            coefs.push(e0 / fact);
        }
        self.series(&coefs)
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = [ZERO; N];
        for (k, slot) in out.iter_mut().enumerate() {
            // Sum over submasks i of k of a[i]·b[k \ i].
            let mut i = k;
            let mut acc = ZERO;
            loop {
                acc += self.c[i] * o.c[k ^ i];
                if i == 0 {
                    break;
                }
                i = (i - 1) & k;
            }
            *slot = acc;
        }
        Dual { c: out }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<const N: usize> Mul<C64> for Dual<N> {
    type Output = Self;
    fn mul(self, s: C64) -> Self {
        self.scale(s)
    }
}
