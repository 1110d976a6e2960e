use std::f64::consts::TAU;

use num_complex::Complex64;

use super::cyclotomic::CyclotomicInt;
use crate::error::{check_size, Result};
use crate::numeric::CMatrix;

/// Largest number of ports the interference engine accepts.
pub const MAX_PORTS: usize = 16;

/// N-port discrete Fourier transform, U_{kl} = ω^{kl}/√N with ports numbered from 0.
pub fn dft_matrix(n: usize) -> Result<CMatrix> {
    check_size(n, 2, MAX_PORTS)?;
    let norm = (n as f64).sqrt();
    Ok(CMatrix::from_fn(n, n, |k, l| {
        Complex64::from_polar(1.0 / norm, TAU * ((k * l) % n) as f64 / n as f64)
    }))
}

/// The DFT with entries held as exact ω exponents over a common factor 1/√N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDft {
    n: usize,
}

impl ExactDft {
    pub fn new(n: usize) -> Result<Self> {
        check_size(n, 2, MAX_PORTS)?;
        Ok(Self { n })
    }

    pub fn ports(&self) -> usize {
        self.n
    }

    /// k such that √N·U_{row,col} = ω^k.
    pub fn exponent(&self, row: usize, col: usize) -> usize {
        (row * col) % self.n
    }

    /// Power of √N in the denominator of every entry.
    pub fn denominator_exponent(&self) -> u32 {
        1
    }

    /// N·(U U†) as exact cyclotomic integers.
    pub fn scaled_gram(&self) -> Vec<Vec<CyclotomicInt>> {
        let n = self.n;
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let mut acc = CyclotomicInt::zero(n);
                        for l in 0..n {
                            let k = (self.exponent(a, l) + n - self.exponent(b, l)) % n;
                            acc.add_rotated(&CyclotomicInt::integer(n, 1), k, 1);
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// U U† = I, decided in exact arithmetic.
    pub fn is_unitary(&self) -> bool {
        let n = self.n as i128;
        self.scaled_gram().iter().enumerate().all(|(a, row)| {
            row.iter()
                .enumerate()
                .all(|(b, z)| z.as_integer() == Some(if a == b { n } else { 0 }))
        })
    }

    pub fn to_float(&self) -> CMatrix {
        dft_matrix(self.n).expect("validated on construction")
    }
}
