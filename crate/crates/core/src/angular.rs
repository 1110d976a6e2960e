//! Distribution of the total angular momentum j of N identical qubits.
//!
//! The probability of finding the ensemble in the j subspace depends only on
//! the Bloch length s, through tanh β = s:
//!
//! p_j = μ_j sinh(β(2j+1)) / sinh β / (2 cosh β)^N
//!
//! where μ_j counts the copies of the spin-j irrep. For nearly pure qubits
//! (s = 1 − ε²/8, ε ≪ 1) only the three largest j carry appreciable
//! probability, and this module also provides the leading-order expansions of
//! p_j and of the per-subspace Fisher information f_j = (∂p_j/∂ε)²/p_j.

use serde::{Deserialize, Serialize};

use crate::error::{check_size, Error, Result};
use crate::numeric::{binomial, CMatrix};
use crate::parametrization::Parametrization;
use crate::spin::{j_ladder, HalfInt};
use crate::states::{collective_rotation, BlochState, DenseOperator, MAX_DENSE_QUBITS};

/// Largest N for which the spectrum is computed with exact multiplicities.
pub const MAX_SPECTRUM_QUBITS: usize = 120;

const PURE_GUARD: f64 = 1e-12;

fn check_j(n: usize, j: HalfInt) -> Result<u64> {
    let twice = j.twice();
    if twice < 0 || twice > n as i64 || (n as i64 - twice) % 2 != 0 {
        return Err(Error::InvalidJ { n, twice_j: twice });
    }
    Ok(((n as i64 - twice) / 2) as u64)
}

/// Number of spin-j irreps in the N-qubit space.
///
/// Computed both as C(N, N/2−j) − C(N, N/2−j−1) and as
/// (2j+1)/(N+1)·C(N+1, N/2−j); the two must agree.
pub fn multiplicity(n: usize, j: HalfInt) -> Result<u128> {
    check_size(n, 1, MAX_SPECTRUM_QUBITS)?;
    let k = check_j(n, j)?;
    let n64 = n as u64;
    let difference = binomial(n64, k) - if k >= 1 { binomial(n64, k - 1) } else { 0 };
    let numerator = j.degeneracy() as u128 * binomial(n64 + 1, k);
    let ratio = numerator / (n as u128 + 1);
    if !numerator.is_multiple_of(n as u128 + 1) || ratio != difference {
        return Err(Error::Invalid(format!(
            "multiplicity forms disagree for N = {n}, j = {j}: {difference} vs {numerator}/{}",
            n + 1
        )));
    }
    Ok(difference)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub j: HalfInt,
    pub mu: u128,
    pub p: f64,
}

/// The exact distribution over j, largest j first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularSpectrum {
    pub n: usize,
    pub entries: Vec<SpectrumEntry>,
}

impl AngularSpectrum {
    pub fn p(&self, j: HalfInt) -> Option<f64> {
        self.entries.iter().find(|e| e.j == j).map(|e| e.p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.p).sum()
    }

    /// Σ (2j+1) μ_j, which must equal 2^N.
    pub fn dimension(&self) -> u128 {
        self.entries
            .iter()
            .map(|e| e.j.degeneracy() as u128 * e.mu)
            .sum()
    }
}

fn ln_sinh(x: f64) -> f64 {
    x + (-(-2.0 * x).exp_m1()).ln() - std::f64::consts::LN_2
}

/// p_j for every j at Bloch length s.
pub fn spectrum_for_length(s: f64, n: usize) -> Result<AngularSpectrum> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::BlochLength(s));
    }
    spectrum_for_deficit(1.0 - s, n)
}

/// Same as [`spectrum_for_length`] with the state given by d = 1 − s.
fn spectrum_for_deficit(d: f64, n: usize) -> Result<AngularSpectrum> {
    check_size(n, 1, MAX_SPECTRUM_QUBITS)?;
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::BlochLength(1.0 - d));
    }
    let mut entries = Vec::with_capacity(n / 2 + 1);
    for j in j_ladder(n) {
        let mu = multiplicity(n, j)?;
        let p = if d <= PURE_GUARD {
            if j.twice() == n as i64 {
                1.0
            } else {
                0.0
            }
        } else if d >= 1.0 - PURE_GUARD {
            mu as f64 * j.degeneracy() as f64 / 2f64.powi(n as i32)
        } else {
            let beta = 0.5 * ((2.0 - d).ln() - d.ln());
            let ln_two_cosh = beta + (-2.0 * beta).exp().ln_1p();
            let ln_p = (mu as f64).ln() + ln_sinh(beta * j.degeneracy() as f64)
                - ln_sinh(beta)
                - n as f64 * ln_two_cosh;
            ln_p.exp()
        };
        entries.push(SpectrumEntry { j, mu, p });
    }
    Ok(AngularSpectrum { n, entries })
}

/// Exact spectrum of ρ(ε, φ)^{⊗N}; independent of φ.
pub fn spectrum_exact(state: &BlochState, n: usize) -> Result<AngularSpectrum> {
    spectrum_for_deficit(state.deficit(), n)
}

/// (j, p_j, ∂p_j/∂ε), using the polynomial form
/// p_j = μ_j Σ_m q₊^{N/2+m} q₋^{N/2−m} with q± = (1 ± s)/2 for the derivative.
pub fn spectrum_with_derivative(state: &BlochState, n: usize) -> Result<Vec<(HalfInt, f64, f64)>> {
    let spectrum = spectrum_exact(state, n)?;
    let (s, ds) = (state.s(), state.ds());
    let (qp, qm) = ((1.0 + s) / 2.0, state.deficit() / 2.0);
    let pow = |x: f64, k: i64| if k < 0 { 0.0 } else { x.powi(k as i32) };
    let n = n as i64;
    Ok(spectrum
        .entries
        .iter()
        .map(|e| {
            let mut dp_ds = 0.0;
            for twice_m in (-e.j.twice()..=e.j.twice()).step_by(2) {
                let a = (n + twice_m) / 2;
                let b = (n - twice_m) / 2;
                dp_ds += 0.5
                    * (a as f64 * pow(qp, a - 1) * pow(qm, b)
                        - b as f64 * pow(qp, a) * pow(qm, b - 1));
            }
            (e.j, e.p, e.mu as f64 * dp_ds * ds)
        })
        .collect())
}

/// f_j = (∂p_j/∂ε)² / p_j for every j with p_j > 0.
pub fn subspace_fisher_exact(state: &BlochState, n: usize) -> Result<Vec<(HalfInt, f64)>> {
    Ok(spectrum_with_derivative(state, n)?
        .into_iter()
        .filter(|(_, p, _)| *p > 0.0)
        .map(|(j, p, dp)| (j, dp * dp / p))
        .collect())
}

/// Two-term small-ε expansion μ_j (ε/4)^{N−2j} [1 + a_{j,N} ε²] for s = 1 − ε²/8,
/// with a_{j,N} = (1 − j − N/2 − δ_{j,0})/16.
///
/// Accurate when Nε² ≪ 1; the condition is not enforced.
pub fn spectrum_expansion(epsilon: f64, n: usize, j: HalfInt) -> Result<f64> {
    let mu = multiplicity(n, j)? as f64;
    let delta = if j.twice() == 0 { 1.0 } else { 0.0 };
    let a = (1.0 - j.value() - n as f64 / 2.0 - delta) / 16.0;
    let order = (n as i64 - j.twice()) as i32;
    Ok(mu * (epsilon / 4.0).powi(order) * (1.0 + a * epsilon * epsilon))
}

/// Leading-order Fisher information carried by the three largest-j subspaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceFisher {
    pub n: usize,
    pub epsilon: f64,
    /// f_{N/2}
    pub top: f64,
    /// f_{N/2−1}
    pub next: f64,
    /// f_{N/2−2}, present for N ≥ 4
    pub third: Option<f64>,
    /// Truncated total including the unit step on the third term.
    pub truncated: f64,
}

pub fn fi_per_subspace(epsilon: f64, n: usize) -> Result<SubspaceFisher> {
    check_size(n, 2, MAX_SPECTRUM_QUBITS)?;
    let nf = n as f64;
    let e2 = epsilon * epsilon;
    let delta_n2 = if n == 2 { 1.0 } else { 0.0 };
    let step = if n >= 4 { 1.0 } else { 0.0 };
    let top = (nf - 1.0).powi(2) / 64.0 * e2;
    let next = (nf - 1.0) / 4.0 + 3.0 * (nf - 1.0) / 64.0 * (2.0 - nf - delta_n2) * e2;
    let third = (n >= 4).then(|| nf * (nf - 3.0) / 32.0 * e2);
    let truncated = (nf - 1.0) / 4.0
        + ((nf - 1.0).powi(2) / 64.0
            + 3.0 * (nf - 1.0) / 64.0 * (2.0 - nf - delta_n2)
            + nf * (nf - 3.0) / 32.0 * step)
            * e2;
    Ok(SubspaceFisher {
        n,
        epsilon,
        top,
        next,
        third,
        truncated,
    })
}

/// Closed form of the truncated total for N ≥ 4:
/// N/4 (1 + ε²/16) − (1/4 + 5ε²/64).
pub fn truncated_fisher_large_n(epsilon: f64, n: usize) -> f64 {
    let e2 = epsilon * epsilon;
    n as f64 / 4.0 * (1.0 + e2 / 16.0) - (0.25 + 5.0 * e2 / 64.0)
}

/// ρ_N ≈ w₀ τ₀(φ) + w₁ τ₁(φ) for nearly pure qubits.
///
/// τ₀ is the rotated all-H state, τ₁ the uniform mixture of the N rotated
/// single-V states, w₁ = Nε²/16. The trace distance to the exact state is
/// O(N²ε⁴); empirically it stays below 0.004·N²ε⁴ for N ≤ 6 and ε ≤ 0.2.
#[derive(Clone, Debug)]
pub struct NearlyPureDecomposition {
    pub n: usize,
    pub w0: f64,
    pub w1: f64,
    pub tau0: DenseOperator,
    pub tau1: DenseOperator,
}

impl NearlyPureDecomposition {
    pub fn mixture(&self) -> DenseOperator {
        let m = self.tau0.matrix() * crate::numeric::real(self.w0)
            + self.tau1.matrix() * crate::numeric::real(self.w1);
        DenseOperator::new(m).expect("square by construction")
    }
}

pub fn nearly_pure_decomposition(state: &BlochState, n: usize) -> Result<NearlyPureDecomposition> {
    check_size(n, 1, MAX_DENSE_QUBITS)?;
    if *state.parametrization() != Parametrization::Quadratic {
        return Err(Error::Invalid(
            "the nearly-pure decomposition is defined for s = 1 − ε²/8".into(),
        ));
    }
    let eps = state.epsilon();
    let w1 = n as f64 * eps * eps / 16.0;
    let dim = 1usize << n;
    let rotation = collective_rotation(state.phi(), n)?;

    let mut tau0 = CMatrix::zeros(dim, dim);
    tau0[(0, 0)] = crate::numeric::real(1.0);
    let mut tau1 = CMatrix::zeros(dim, dim);
    for q in 0..n {
        let idx = 1usize << (n - 1 - q);
        tau1[(idx, idx)] = crate::numeric::real(1.0 / n as f64);
    }
    let rotate = |m: CMatrix| &rotation * m * rotation.adjoint();
    Ok(NearlyPureDecomposition {
        n,
        w0: 1.0 - w1,
        w1,
        tau0: DenseOperator::new(rotate(tau0))?,
        tau1: DenseOperator::new(rotate(tau1))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{build_density, j_projectors};

    #[test]
    fn multiplicities() {
        let mu = |n, twice| multiplicity(n, HalfInt::from_twice(twice)).unwrap();
        assert_eq!((mu(2, 2), mu(2, 0)), (1, 1));
        assert_eq!((mu(4, 2), mu(4, 0)), (3, 2));
        assert_eq!([mu(6, 6), mu(6, 4), mu(6, 2), mu(6, 0)], [1, 5, 9, 5]);
        for n in 1..=64usize {
            let dim: u128 = j_ladder(n)
                .map(|j| j.degeneracy() as u128 * multiplicity(n, j).unwrap())
                .sum();
            assert_eq!(dim, 1u128 << n);
        }
        assert!(matches!(
            multiplicity(4, HalfInt::from_twice(3)),
            Err(Error::InvalidJ { .. })
        ));
        assert!(matches!(
            multiplicity(4, HalfInt::from_twice(6)),
            Err(Error::InvalidJ { .. })
        ));
        assert!(matches!(
            multiplicity(4, HalfInt::from_twice(-2)),
            Err(Error::InvalidJ { .. })
        ));
    }

    #[test]
    fn limits() {
        let sp = spectrum_for_length(1.0, 5).unwrap();
        assert_eq!(sp.entries[0].p, 1.0);
        assert!(sp.entries[1..].iter().all(|e| e.p == 0.0));
        let sp = spectrum_for_length(0.0, 2).unwrap();
        assert_eq!(sp.p(HalfInt::from_int(1)), Some(0.75));
        assert_eq!(sp.p(HalfInt::from_int(0)), Some(0.25));
    }

    /// Sum form μ_j Σ_m q₊^{N/2+m} q₋^{N/2−m}, independent of the β route.
    fn spectrum_by_sum(s: f64, n: usize) -> Vec<f64> {
        let (qp, qm) = ((1.0 + s) / 2.0, (1.0 - s) / 2.0);
        j_ladder(n)
            .map(|j| {
                let mu = multiplicity(n, j).unwrap() as f64;
                (-j.twice()..=j.twice())
                    .step_by(2)
                    .map(|tm| {
                        qp.powi(((n as i64 + tm) / 2) as i32)
                            * qm.powi(((n as i64 - tm) / 2) as i32)
                    })
                    .sum::<f64>()
                    * mu
            })
            .collect()
    }

    #[test]
    fn beta_route_matches_sum_route_and_normalizes() {
        for n in [1, 2, 3, 7, 20, 64, 120] {
            for s in [1e-13, 1e-6, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-9] {
                let sp = spectrum_for_length(s, n).unwrap();
                assert!(
                    (sp.total() - 1.0).abs() < 1e-12,
                    "N={n} s={s}: {}",
                    sp.total()
                );
                assert_eq!(sp.dimension(), 1u128 << n);
                if n <= 20 {
                    for (e, p) in sp.entries.iter().zip(spectrum_by_sum(s, n)) {
                        assert!(
                            (e.p - p).abs() < 1e-12 * p.max(1e-300) + 1e-300,
                            "N={n} s={s}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn matches_dense_projector_traces() {
        let state = BlochState::with_length(0.6, 1.3).unwrap();
        let rotated = BlochState::with_length(0.6, 0.0).unwrap();
        for n in 1..=6 {
            let rho = build_density(&state, n).unwrap();
            let sp = spectrum_exact(&state, n).unwrap();
            assert_eq!(sp, spectrum_exact(&rotated, n).unwrap());
            for (j, p) in j_projectors(n).unwrap() {
                let dense = rho.expectation(p.matrix()).re;
                assert!((dense - sp.p(j).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn expansion_orders() {
        let e: f64 = 1e-3;
        let exact = spectrum_exact(
            &BlochState::new(e, 0.0, Parametrization::Quadratic).unwrap(),
            4,
        )
        .unwrap();
        let top = spectrum_expansion(e, 4, HalfInt::from_int(2)).unwrap();
        assert!((top - (1.0 - 3.0 * e * e / 16.0)).abs() < 1e-15);
        assert!((top - exact.p(HalfInt::from_int(2)).unwrap()).abs() / top < 1e-9);
        let next = spectrum_expansion(e, 4, HalfInt::from_int(1)).unwrap();
        let eq23 = 3.0 * e * e / 16.0 * (1.0 - 2.0 * e * e / 16.0);
        assert!((next - eq23).abs() / eq23 < 1e-14);
        assert!(spectrum_expansion(e, 4, HalfInt::from_twice(1)).is_err());
    }

    #[test]
    fn fisher_expansions_match_exact() {
        let e = 1e-3;
        let sf = fi_per_subspace(e, 4).unwrap();
        let exact = subspace_fisher_exact(
            &BlochState::new(e, 0.0, Parametrization::Quadratic).unwrap(),
            4,
        )
        .unwrap();
        assert!((sf.top - exact[0].1).abs() / exact[0].1 < 1e-5);
        assert!((sf.next - exact[1].1).abs() / exact[1].1 < 1e-9);
        assert!((sf.third.unwrap() - exact[2].1).abs() / exact[2].1 < 1e-5);
        assert!((sf.next - 0.75).abs() < 1e-5);
        assert!((sf.top - 9.0 * e * e / 64.0).abs() < 1e-20);
        assert!((sf.third.unwrap() - 4.0 * e * e / 32.0).abs() < 1e-20);
        assert!(fi_per_subspace(e, 1).is_err());
        assert_eq!(fi_per_subspace(e, 3).unwrap().third, None);
    }

    #[test]
    fn two_qubit_correction_term() {
        for e in [2e-3, 1e-3] {
            let sf = fi_per_subspace(e, 2).unwrap();
            let exact = subspace_fisher_exact(
                &BlochState::new(e, 0.0, Parametrization::Quadratic).unwrap(),
                2,
            )
            .unwrap();
            for (approx, (_, ex)) in [sf.top, sf.next].into_iter().zip(&exact) {
                assert!((approx - ex).abs() < 2.0 * e.powi(4), "ε={e}: {approx} vs {ex}");
            }
        }
    }

    #[test]
    fn truncated_total_is_sum_of_parts() {
        for n in 2..=12 {
            let sf = fi_per_subspace(0.05, n).unwrap();
            let sum = sf.top + sf.next + sf.third.unwrap_or(0.0);
            assert!((sf.truncated - sum).abs() < 1e-14);
            if n >= 4 {
                assert!((sf.truncated - truncated_fisher_large_n(0.05, n)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn nearly_pure_structure() {
        let st = BlochState::new(0.0, 0.4, Parametrization::Quadratic).unwrap();
        let d = nearly_pure_decomposition(&st, 3).unwrap();
        assert_eq!(d.w0, 1.0);
        let rho = build_density(&st, 3).unwrap();
        assert!(d.mixture().trace_distance(&rho).unwrap() < 1e-14);

        let st = BlochState::new(0.1, 0.4, Parametrization::Quadratic).unwrap();
        for n in 1..=6 {
            let d = nearly_pure_decomposition(&st, n).unwrap();
            d.tau0.validate_density().unwrap();
            d.tau1.validate_density().unwrap();
            assert!((d.w0 + d.w1 - 1.0).abs() < 1e-15);
            let top = &j_projectors(n).unwrap()[0];
            assert!((d.tau1.expectation(top.1.matrix()).re - 1.0 / n as f64).abs() < 1e-10);
        }
        assert!(nearly_pure_decomposition(&BlochState::with_length(0.9, 0.0).unwrap(), 3).is_err());
    }

    #[test]
    fn nearly_pure_error_scales_as_n2_eps4() {
        for n in 2..=6 {
            for e in [0.2, 0.1, 0.05] {
                let st = BlochState::new(e, 0.7, Parametrization::Quadratic).unwrap();
                let d = nearly_pure_decomposition(&st, n).unwrap();
                let dist = d
                    .mixture()
                    .trace_distance(&build_density(&st, n).unwrap())
                    .unwrap();
                let c = dist / ((n * n) as f64 * e.powi(4));
                assert!(c < 0.004, "N={n} ε={e}: C = {c}");
            }
        }
        // Pr{S₀} consistency: w₀ + w₁/N against p_{N/2}
        let e = 0.05;
        let st = BlochState::new(e, 0.0, Parametrization::Quadratic).unwrap();
        let d = nearly_pure_decomposition(&st, 6).unwrap();
        let p_top = spectrum_exact(&st, 6).unwrap().entries[0].p;
        assert!((d.w0 + d.w1 / 6.0 - (1.0 - 5.0 * e * e / 16.0)).abs() < 1e-15);
        assert!((d.w0 + d.w1 / 6.0 - p_top).abs() < 36.0 * e.powi(4));
    }
}
