//! Finite-difference stencils and small dense linear-algebra helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Step used by the five-point stencil at `x`.
pub fn stencil_step(x: f64) -> f64 {
    1e-4 * x.abs().max(1.0)
}

/// Five-point central difference of a scalar function.
pub fn five_point(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = stencil_step(x);
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Five-point central difference of a matrix-valued function.
pub fn five_point_matrix(f: impl Fn(f64) -> CMatrix, x: f64) -> CMatrix {
    let h = stencil_step(x);
    let scale = Complex64::new(1.0 / (12.0 * h), 0.0);
    (f(x - 2.0 * h) - f(x - h) * Complex64::new(8.0, 0.0) + f(x + h) * Complex64::new(8.0, 0.0)
        - f(x + 2.0 * h))
        * scale
}

/// Largest entry-wise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), a.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Binomial coefficient in exact 128-bit arithmetic.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc·num/i is an integer; divide out gcd(acc, i) first so the
        // product stays within range whenever the result does.
        let g = gcd(acc, i);
        let num = (n as u128 - k as u128 + i) / (i / g);
        acc = (acc / g)
            .checked_mul(num)
            .expect("binomial coefficient exceeds u128");
    }
    acc
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}
