//! Permanents and determinants, in floating point and over Z[ω].

use num_complex::Complex64;

use super::cyclotomic::CyclotomicInt;
use crate::numeric::CMatrix;

/// Ryser's formula with Gray-code updates of the row sums, O(2ⁿ·n).
pub fn permanent(m: &CMatrix) -> Complex64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "permanent of a non-square matrix");
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        gray ^= 1 << col;
        let sign = if gray & (1 << col) != 0 { 1.0 } else { -1.0 };
        for (r, s) in row_sums.iter_mut().enumerate() {
            *s += m[(r, col)] * sign;
        }
        let prod: Complex64 = row_sums.iter().product();
        if gray.count_ones().is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

pub fn determinant(m: &CMatrix) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().determinant()
}

/// Permanent (signed = false) or determinant (signed = true) of the matrix whose
/// (r, c) entry is ω^{exponents[r][c]}, by dynamic programming over column subsets.
///
/// Row r is matched with one of the columns missing from a subset of size r;
/// the table holds one coefficient vector of length `order` per subset.
fn expand_exact(order: usize, exponents: &[Vec<usize>], signed: bool) -> CyclotomicInt {
    thread_local! {
        static TABLE: std::cell::RefCell<Vec<i128>> = const { std::cell::RefCell::new(Vec::new()) };
    }
    let n = exponents.len();
    if n == 0 {
        return CyclotomicInt::integer(order, 1);
    }
    let full = (1usize << n) - 1;
    TABLE.with(|cell| {
        let mut table = cell.borrow_mut();
        table.clear();
        table.resize((full + 1) * order, 0);
        table[0] = 1;
        for subset in 0..full {
            let base = subset * order;
            if table[base..base + order].iter().all(|c| *c == 0) {
                continue;
            }
            let row = &exponents[subset.count_ones() as usize];
            for col in (0..n).filter(|c| subset & (1 << c) == 0) {
                let negate = signed && (subset >> col).count_ones() % 2 == 1;
                let target = (subset | (1 << col)) * order;
                let shift = row[col];
                for k in 0..order {
                    let c = table[base + k];
                    if c != 0 {
                        let slot = target + (k + shift) % order;
                        if negate {
                            table[slot] -= c;
                        } else {
                            table[slot] += c;
                        }
                    }
                }
            }
        }
        CyclotomicInt::from_coeffs(table[full * order..].to_vec())
    })
}

pub fn permanent_exact(order: usize, exponents: &[Vec<usize>]) -> CyclotomicInt {
    expand_exact(order, exponents, false)
}

pub fn determinant_exact(order: usize, exponents: &[Vec<usize>]) -> CyclotomicInt {
    expand_exact(order, exponents, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiport::dft::dft_matrix;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    /// Σ over permutations, with or without the sign.
    fn naive(m: &CMatrix, signed: bool) -> Complex64 {
        fn rec(
            m: &CMatrix,
            row: usize,
            used: &mut Vec<bool>,
            signed: bool,
            acc: Complex64,
            inv: usize,
            out: &mut Complex64,
        ) {
            let n = m.nrows();
            if row == n {
                *out += if signed && inv % 2 == 1 { -acc } else { acc };
                return;
            }
            for c in 0..n {
                if !used[c] {
                    let inversions = used[c + 1..].iter().filter(|u| **u).count();
                    used[c] = true;
                    rec(
                        m,
                        row + 1,
                        used,
                        signed,
                        acc * m[(row, c)],
                        inv + inversions,
                        out,
                    );
                    used[c] = false;
                }
            }
        }
        let mut out = Complex64::new(0.0, 0.0);
        rec(
            m,
            0,
            &mut vec![false; m.nrows()],
            signed,
            Complex64::new(1.0, 0.0),
            0,
            &mut out,
        );
        out
    }

    fn omega_matrix(order: usize, exps: &[Vec<usize>]) -> CMatrix {
        let n = exps.len();
        CMatrix::from_fn(n, n, |r, c| {
            Complex64::from_polar(1.0, TAU * exps[r][c] as f64 / order as f64)
        })
    }

    #[test]
    fn small_cases() {
        let h = dft_matrix(2).unwrap();
        assert!(permanent(&h).norm() < 1e-15);
        assert!((determinant(&h) + 1.0).norm() < 1e-15);
        let ones = CMatrix::from_element(3, 3, Complex64::new(1.0, 0.0));
        assert!((permanent(&ones) - 6.0).norm() < 1e-12);
        assert_eq!(permanent(&CMatrix::zeros(0, 0)), Complex64::new(1.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn ryser_and_dp_agree_with_naive(order in 2usize..9, n in 1usize..6, seed in any::<u64>()) {
            let mut x = seed;
            let exps: Vec<Vec<usize>> = (0..n).map(|_| (0..n).map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((x >> 33) as usize) % order
            }).collect()).collect();
            let m = omega_matrix(order, &exps);
            let per = naive(&m, false);
            let det = naive(&m, true);
            prop_assert!((permanent(&m) - per).norm() < 1e-9);
            prop_assert!((determinant(&m) - det).norm() < 1e-9);
            prop_assert!((permanent_exact(order, &exps).to_complex() - per).norm() < 1e-9);
            prop_assert!((determinant_exact(order, &exps).to_complex() - det).norm() < 1e-9);
        }
    }
}
