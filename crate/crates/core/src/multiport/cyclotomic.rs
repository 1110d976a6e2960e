//! Exact arithmetic in Z[ω] with ω = e^{2πi/N}.
//!
//! Elements are stored as integer polynomials modulo x^N − 1. Equality and
//! zero tests reduce modulo the N-th cyclotomic polynomial Φ_N, which is the
//! minimal polynomial of ω, so `is_zero` is exact.

use std::f64::consts::TAU;

use num_complex::Complex64;

/// Σ_k c_k ω^k with integer coefficients, k = 0..N−1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclotomicInt {
    coeffs: Vec<i128>,
}

impl CyclotomicInt {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![0; order],
        }
    }

    pub fn integer(order: usize, value: i128) -> Self {
        Self::monomial(order, 0, value)
    }

    /// c·ω^k
    pub fn monomial(order: usize, k: usize, c: i128) -> Self {
        let mut out = Self::zero(order);
        out.coeffs[k % order] = c;
        out
    }

    pub fn from_coeffs(coeffs: Vec<i128>) -> Self {
        assert!(!coeffs.is_empty(), "cyclotomic order must be positive");
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
    }

    /// self += sign·ω^k·other
    pub fn add_rotated(&mut self, other: &Self, k: usize, sign: i128) {
        let n = self.order();
        for (i, c) in other.coeffs.iter().enumerate() {
            if *c != 0 {
                self.coeffs[(i + k) % n] += sign * c;
            }
        }
    }

    pub fn scale(&self, factor: i128) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order();
        let mut out = vec![0i128; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[(i + j) % n] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// Complex conjugate: ω^k ↦ ω^{−k}.
    pub fn conj(&self) -> Self {
        let n = self.order();
        let mut out = vec![0i128; n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[(n - k) % n] = *c;
        }
        Self { coeffs: out }
    }

    /// |z|² = z·z̄.
    pub fn norm_sqr(&self) -> Self {
        self.mul(&self.conj())
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.order() as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(k, c)| Complex64::from_polar(*c as f64, TAU * k as f64 / n))
            .sum()
    }

    /// Canonical representative modulo Φ_N, of length deg Φ_N.
    pub fn reduced(&self) -> Vec<i128> {
        reduce_mod(&self.coeffs, &cyclotomic_polynomial(self.order()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0) || self.reduced().iter().all(|c| *c == 0)
    }

    /// The integer value when the element lies in Z.
    pub fn as_integer(&self) -> Option<i128> {
        let r = self.reduced();
        r[1..].iter().all(|c| *c == 0).then_some(r[0])
    }
}

/// Reduces a polynomial modulo a monic divisor; the result has length deg(divisor).
pub fn reduce_mod(poly: &[i128], monic: &[i128]) -> Vec<i128> {
    let d = monic.len() - 1;
    let mut work = poly.to_vec();
    if work.len() < d {
        work.resize(d, 0);
    }
    for i in (d..work.len()).rev() {
        let c = work[i];
        if c != 0 {
            for (t, m) in monic.iter().enumerate() {
                work[i - d + t] -= c * m;
            }
        }
    }
    work.truncate(d.max(1));
    work
}

/// Coefficients of Φ_N, lowest degree first.
pub fn cyclotomic_polynomial(n: usize) -> Vec<i128> {
    thread_local! {
        static CACHE: std::cell::RefCell<Vec<Option<Vec<i128>>>> = const { std::cell::RefCell::new(Vec::new()) };
    }
    if let Some(hit) = CACHE.with(|c| c.borrow().get(n).cloned().flatten()) {
        return hit;
    }
    let mut poly = vec![0i128; n + 1];
    poly[0] = -1;
    poly[n] = 1;
    for d in (1..n).filter(|&d| n.is_multiple_of(d)) {
        poly = divide_exact(&poly, &cyclotomic_polynomial(d));
    }
    CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() <= n {
            c.resize(n + 1, None);
        }
        c[n] = Some(poly.clone());
    });
    poly
}

fn divide_exact(num: &[i128], monic: &[i128]) -> Vec<i128> {
    let d = monic.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![0i128; num.len() - d];
    for i in (0..quot.len()).rev() {
        let c = rem[i + d];
        quot[i] = c;
        for (t, m) in monic.iter().enumerate() {
            rem[i + t] -= c * m;
        }
    }
    debug_assert!(
        rem.iter().all(|c| *c == 0),
        "cyclotomic division left a remainder"
    );
    quot
}
