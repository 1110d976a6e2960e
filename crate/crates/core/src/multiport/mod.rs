//! Bell-multiport interference over N ports × {H, V} for bosons and fermions.
//!
//! Each of the N qubits enters its own port of an N-port discrete Fourier
//! transform interferometer, its internal state riding along as H or V. The
//! distribution of per-port particle counts at the output (the port
//! signature) discriminates the j = N/2 subspace from j = N/2 − 1.

pub mod amplitude;
pub mod conjecture;
pub mod cyclotomic;
pub mod dft;
pub mod fock;
pub mod permanent;
pub mod ratio;
pub mod signatures;

pub use amplitude::{transition_amplitude, ExactAmplitude, Multiport};
pub use conjecture::{conjecture_check, ConjectureMode, ConjectureReport};
pub use cyclotomic::CyclotomicInt;
pub use dft::{dft_matrix, ExactDft};
pub use fock::{FockState, Polarization, PortSignature, Statistics};
pub use ratio::{signature_ratio, RatioOptions, RatioReport};
pub use signatures::{signature_set, tau0_state, tau1_state, SignatureSet, StateVector, ZeroTest};

use crate::error::{check_size, Error, Result};
use crate::parametrization::Parametrization;

/// (Pr{S₀}, Pr{S₁ \ S₀}) ≈ (1 − (N−1)ε²/16, (N−1)ε²/16) for s = 1 − ε²/8,
/// valid to O(ε⁴).
pub fn signature_probabilities(n: usize, epsilon: f64) -> Result<(f64, f64)> {
    check_size(n, 1, usize::MAX)?;
    let (lo, hi) = Parametrization::Quadratic.domain();
    if !(lo..=hi).contains(&epsilon) {
        return Err(Error::EpsilonDomain { epsilon, lo, hi });
    }
    let p1 = (n as f64 - 1.0) * epsilon * epsilon / 16.0;
    Ok((1.0 - p1, p1))
}
