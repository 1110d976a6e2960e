//! Multi-particle transition amplitudes through the DFT multiport.
//!
//! A creation operator transforms as a†_{l,σ} ↦ Σ_k U_{kl} b†_{k,σ}: the
//! multiport mixes ports and leaves the internal state σ ∈ {H, V} alone, so
//! every amplitude factorizes into an H block and a V block.
//!
//! Bosons: ⟨out|in⟩ = Per(M_H)·Per(M_V) / √(Π n_in! Π n_out!), where M_σ has
//! rows indexed by output ports and columns by input ports, each repeated by
//! occupation.
//!
//! Fermions: modes are ordered port-major with H before V, and states are
//! products of creation operators applied in that order. Reordering a state
//! into all-H-then-all-V costs a sign (−1)^{#(V at p, H at q) with p < q};
//! the amplitude is that sign for input and output times det(M_H)·det(M_V).

use num_complex::Complex64;

use super::cyclotomic::CyclotomicInt;
use super::dft::{dft_matrix, ExactDft};
use super::fock::{repeated_ports, FockState, Polarization, Statistics};
use super::permanent::{determinant, determinant_exact, permanent, permanent_exact};
use crate::error::{Error, Result};
use crate::numeric::{factorial, CMatrix};

/// Amplitude = numerator / √denominator with the numerator in Z[ω].
#[derive(Clone, Debug, PartialEq)]
pub struct ExactAmplitude {
    pub numerator: CyclotomicInt,
    pub denominator: u128,
}

impl ExactAmplitude {
    pub fn to_complex(&self) -> Complex64 {
        self.numerator.to_complex() / (self.denominator as f64).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }
}

/// Precomputed DFT for repeated amplitude evaluations.
#[derive(Clone, Debug)]
pub struct Multiport {
    n: usize,
    statistics: Statistics,
    unitary: CMatrix,
    exact: ExactDft,
}

impl Multiport {
    pub fn new(n: usize, statistics: Statistics) -> Result<Self> {
        Ok(Self {
            n,
            statistics,
            unitary: dft_matrix(n)?,
            exact: ExactDft::new(n)?,
        })
    }

    pub fn ports(&self) -> usize {
        self.n
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    fn check_pair(&self, input: &FockState, output: &FockState) -> Result<bool> {
        for s in [input, output] {
            if s.ports() != self.n {
                return Err(Error::InvalidFock(format!(
                    "{s} has {} ports, expected {}",
                    s.ports(),
                    self.n
                )));
            }
            s.check(self.statistics)?;
        }
        Ok(input.total(Polarization::H) == output.total(Polarization::H))
    }

    /// Unnormalized block amplitude: Per or det of the ω-power matrix.
    pub fn block_numerator(&self, input: &[u8], output: &[u8]) -> Complex64 {
        let rows = repeated_ports(output);
        let cols = repeated_ports(input);
        debug_assert_eq!(rows.len(), cols.len());
        let scale = (self.n as f64).sqrt();
        let m = CMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            self.unitary[(rows[r], cols[c])] * scale
        });
        match self.statistics {
            Statistics::Boson => permanent(&m),
            Statistics::Fermion => determinant(&m),
        }
    }

    pub fn block_numerator_exact(&self, input: &[u8], output: &[u8]) -> CyclotomicInt {
        let rows = repeated_ports(output);
        let cols = repeated_ports(input);
        let exps: Vec<Vec<usize>> = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| self.exact.exponent(r, c)).collect())
            .collect();
        match self.statistics {
            Statistics::Boson => permanent_exact(self.n, &exps),
            Statistics::Fermion => determinant_exact(self.n, &exps),
        }
    }

    /// N^{particles}·Π n! of a block pair, the squared normalization of a numerator.
    pub fn block_denominator(&self, input: &[u8], output: &[u8]) -> u128 {
        let particles: usize = input.iter().map(|&k| k as usize).sum();
        let mut d = (self.n as u128).pow(particles as u32);
        if self.statistics == Statistics::Boson {
            for &k in input.iter().chain(output) {
                d *= factorial(k as u64);
            }
        }
        d
    }

    fn reorder_sign(&self, state: &FockState) -> f64 {
        block_sign(
            self.statistics,
            &state.block(Polarization::H),
            &state.block(Polarization::V),
        )
    }

    pub fn amplitude(&self, input: &FockState, output: &FockState) -> Result<Complex64> {
        if !self.check_pair(input, output)? {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut amp = Complex64::new(self.reorder_sign(input) * self.reorder_sign(output), 0.0);
        let mut denominator = 1.0;
        for pol in [Polarization::H, Polarization::V] {
            let (i, o) = (input.block(pol), output.block(pol));
            amp *= self.block_numerator(&i, &o);
            denominator *= self.block_denominator(&i, &o) as f64;
        }
        Ok(amp / denominator.sqrt())
    }

    pub fn amplitude_exact(&self, input: &FockState, output: &FockState) -> Result<ExactAmplitude> {
        if !self.check_pair(input, output)? {
            return Ok(ExactAmplitude {
                numerator: CyclotomicInt::zero(self.n),
                denominator: 1,
            });
        }
        let sign = (self.reorder_sign(input) * self.reorder_sign(output)) as i128;
        let mut numerator = CyclotomicInt::integer(self.n, sign);
        let mut denominator = 1u128;
        for pol in [Polarization::H, Polarization::V] {
            let (i, o) = (input.block(pol), output.block(pol));
            numerator = numerator.mul(&self.block_numerator_exact(&i, &o));
            denominator *= self.block_denominator(&i, &o);
        }
        Ok(ExactAmplitude {
            numerator,
            denominator,
        })
    }
}

/// Sign picked up when reordering a fermionic state from port-major order
/// into all-H-then-all-V order; always +1 for bosons.
pub fn block_sign(statistics: Statistics, h: &[u8], v: &[u8]) -> f64 {
    if statistics == Statistics::Boson {
        return 1.0;
    }
    let mut v_seen = 0usize;
    let mut swaps = 0usize;
    for (&hp, &vp) in h.iter().zip(v) {
        swaps += hp as usize * v_seen;
        v_seen += vp as usize;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// ⟨output| U_multiport |input⟩ for the N-port DFT.
pub fn transition_amplitude(
    n: usize,
    input: &FockState,
    output: &FockState,
    statistics: Statistics,
) -> Result<Complex64> {
    Multiport::new(n, statistics)?.amplitude(input, output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiport::fock::block_configurations;

    fn state(occ: &[u8]) -> FockState {
        FockState::new(occ.to_vec()).unwrap()
    }

    #[test]
    fn hong_ou_mandel() {
        let input = state(&[1, 0, 1, 0]);
        let b = transition_amplitude(2, &input, &input, Statistics::Boson).unwrap();
        assert!(b.norm() < 1e-15);
        let bunched =
            transition_amplitude(2, &input, &state(&[2, 0, 0, 0]), Statistics::Boson).unwrap();
        assert!((bunched.norm_sqr() - 0.5).abs() < 1e-15);
        let f = transition_amplitude(2, &input, &input, Statistics::Fermion).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-15);
        assert!(
            transition_amplitude(2, &input, &state(&[2, 0, 0, 0]), Statistics::Fermion).is_err()
        );
    }

    #[test]
    fn internal_state_is_conserved() {
        let mp = Multiport::new(3, Statistics::Boson).unwrap();
        let a = mp
            .amplitude(&state(&[1, 0, 1, 0, 0, 1]), &state(&[3, 0, 0, 0, 0, 0]))
            .unwrap();
        assert_eq!(a, Complex64::new(0.0, 0.0));
        assert!(mp
            .amplitude_exact(&state(&[1, 0, 1, 0, 0, 1]), &state(&[3, 0, 0, 0, 0, 0]))
            .unwrap()
            .is_zero());
    }

    fn lcm(a: u128, b: u128) -> u128 {
        let (mut x, mut y) = (a, b);
        while y != 0 {
            (x, y) = (y, x % y);
        }
        a / x * b
    }

    fn all_states(n: usize, stats: Statistics) -> Vec<FockState> {
        let mut out = Vec::new();
        for nh in 0..=n {
            for v in block_configurations(n, n - nh, stats) {
                for h in block_configurations(n, nh, stats) {
                    out.push(FockState::from_blocks(&h, &v).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn unitarity_float_and_exact() {
        for n in 2..=4 {
            for stats in [Statistics::Boson, Statistics::Fermion] {
                let mp = Multiport::new(n, stats).unwrap();
                let states = all_states(n, stats);
                for input in &states {
                    let mut total = 0.0;
                    let mut exact_total = CyclotomicInt::zero(n);
                    let mut common = 0u128;
                    let mut terms = Vec::new();
                    for output in &states {
                        let a = mp.amplitude(input, output).unwrap();
                        let e = mp.amplitude_exact(input, output).unwrap();
                        assert!((a - e.to_complex()).norm() < 1e-12);
                        total += a.norm_sqr();
                        if !e.is_zero() {
                            common = lcm(common.max(1), e.denominator);
                            terms.push(e);
                        }
                    }
                    assert!(
                        (total - 1.0).abs() < 1e-10,
                        "N={n} {stats} {input}: {total}"
                    );
                    for e in terms {
                        assert_eq!(common % e.denominator, 0);
                        exact_total.add_assign(
                            &e.numerator
                                .norm_sqr()
                                .scale((common / e.denominator) as i128),
                        );
                    }
                    assert_eq!(exact_total.as_integer(), Some(common as i128));
                }
            }
        }
    }
}
