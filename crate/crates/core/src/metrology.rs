//! Fisher information, quantum Fisher information and the J² measurement.
//!
//! All mean squared errors reported here are normalized by the number of
//! repetitions ν, i.e. they are ν·Δ²θ̂.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_size, Error, Result};
use crate::parametrization::Parametrization;
use crate::states::{sld_closed_form, BlochState, Parameter, MAX_EIGENBASIS_QUBITS};

/// Probabilities at or below this value are treated as zero.
pub const PROBABILITY_FLOOR: f64 = 1e-15;
const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherReport {
    pub value: f64,
    pub which: Parameter,
    pub n: usize,
}

/// ℱ_ε = N (∂s/∂ε)² / (1 − s²) and ℱ_φ = N s².
pub fn qfi_closed_form(state: &BlochState, n: usize, which: Parameter) -> Result<FisherReport> {
    check_size(n, 1, usize::MAX)?;
    let s = state.s();
    let value = match which {
        Parameter::Epsilon => {
            if s >= 1.0 {
                return Err(Error::SingularSld);
            }
            state.ds().powi(2) / state.one_minus_s_sq()
        }
        Parameter::Phi => s * s,
    } * n as f64;
    Ok(FisherReport { value, which, n })
}

/// Classical Fisher information Σ (∂p)²/p of a distribution given as
/// (p_ℓ, ∂p_ℓ) pairs.
pub fn fisher_information(probs: &[(f64, f64)]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::Distribution("empty distribution".into()));
    }
    if let Some((p, _)) = probs
        .iter()
        .find(|(p, dp)| !(p.is_finite() && dp.is_finite()) || *p < 0.0)
    {
        return Err(Error::Distribution(format!("invalid probability {p}")));
    }
    let total: f64 = probs.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Distribution(format!("probabilities sum to {total}")));
    }
    let drift: f64 = probs.iter().map(|(_, dp)| dp).sum();
    if drift.abs() > NORMALIZATION_TOL {
        return Err(Error::Distribution(format!("derivatives sum to {drift}")));
    }
    let mut info = 0.0;
    for &(p, dp) in probs {
        if p > PROBABILITY_FLOOR {
            info += dp * dp / p;
        } else if dp.abs() > NORMALIZATION_TOL {
            return Err(Error::DivergentFisher { p, dp });
        }
    }
    Ok(info)
}

/// |tr{ρ_N L_ε L_φ}| with the closed-form SLDs.
pub fn sld_orthogonality(state: &BlochState, n: usize) -> Result<f64> {
    check_size(n, 1, MAX_EIGENBASIS_QUBITS)?;
    let rho = crate::states::build_density(state, n)?;
    let l_phi = sld_closed_form(state, n, Parameter::Phi)?;
    if state.s() == 0.0 {
        return Ok(0.0);
    }
    let l_eps = sld_closed_form(state, n, Parameter::Epsilon)?;
    Ok(rho.expectation(&(l_eps.matrix() * l_phi.matrix())).norm())
}

/// First and second moments of J² and the ε-derivative of the mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean_j2: f64,
    pub mean_j2sq: f64,
    pub d_mean_j2: f64,
    pub variance: f64,
}

pub fn j2_moments(state: &BlochState, n: usize) -> Result<MomentReport> {
    check_size(n, 1, usize::MAX)?;
    let (s, ds) = (state.s(), state.ds());
    let nf = n as f64;
    let pairs = nf * (nf - 1.0);
    let s2 = s * s;
    let mean_j2 = 0.75 * nf + pairs * s2 / 4.0;
    let variance = pairs / 8.0 * ((3.0 - 2.0 * nf) * s2 * s2 + 2.0 * (nf - 3.0) * s2 + 3.0);
    Ok(MomentReport {
        mean_j2,
        mean_j2sq: variance + mean_j2 * mean_j2,
        d_mean_j2: pairs * s * ds / 2.0,
        variance,
    })
}

/// ν Δ²ε̂ for the estimator that inverts the sample mean of J².
pub fn j2_error_propagation(state: &BlochState, n: usize) -> Result<f64> {
    check_size(n, 2, usize::MAX)?;
    let (s, ds) = (state.s(), state.ds());
    if s == 0.0 || ds == 0.0 {
        return Err(Error::Uninformative(format!(
            "∂⟨J²⟩/∂ε vanishes at s = {s}, ∂s/∂ε = {ds}"
        )));
    }
    let nf = n as f64;
    let s2 = s * s;
    Ok(((3.0 - 2.0 * nf) * s2 * s2 + 2.0 * (nf - 3.0) * s2 + 3.0)
        / (2.0 * nf * (nf - 1.0) * s2 * ds * ds))
}

/// N² (ν Δ²ε̂ − 1/ℱ_ε), which stays bounded as N grows.
pub fn asymptotic_gap(state: &BlochState, n: usize) -> Result<f64> {
    if state.s() >= 1.0 {
        return Err(Error::Invalid(
            "the asymptotic gap is undefined for a pure state".into(),
        ));
    }
    let mse = j2_error_propagation(state, n)?;
    let qfi = qfi_closed_form(state, n, Parameter::Epsilon)?.value;
    let nf = n as f64;
    Ok(nf * nf * (mse - 1.0 / qfi))
}

/// ν Δ²ε̂ · ℱ_ε = N/(N−1) · [1 + 3(1−s²)/(2Ns²)], independent of ∂s/∂ε.
///
/// The excess over 1 is O(1/N), with a prefactor that grows like 1/s² for
/// short Bloch vectors.
pub fn j2_efficiency_ratio(s: f64, n: usize) -> f64 {
    let nf = n as f64;
    nf / (nf - 1.0) * (1.0 + 3.0 * (1.0 - s * s) / (2.0 * nf * s * s))
}

/// Weights (w_ε, w_φ) of the scalarized mean squared error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub epsilon: f64,
    pub phi: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            phi: 0.5,
        }
    }
}

impl Weights {
    pub fn new(epsilon: f64, phi: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && phi >= 0.0) || (epsilon + phi - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!(
                "weights must be non-negative and sum to 1, got ({epsilon}, {phi})"
            )));
        }
        Ok(Self { epsilon, phi })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub n: usize,
    /// J² measurement for ε combined with a φ measurement at its bound.
    pub collective: f64,
    /// Sum of the single-parameter quantum bounds.
    pub ultimate: f64,
    /// Half the resources per parameter, each at its quantum bound.
    pub split: f64,
}

/// ε with ε²/8 = 0.1 under the quadratic parametrization.
pub fn reference_epsilon() -> f64 {
    0.8f64.sqrt()
}

pub fn weighted_mse_table(
    parametrization: &Parametrization,
    epsilon: f64,
    n_range: std::ops::RangeInclusive<usize>,
    weights: Weights,
) -> Result<Vec<MseRow>> {
    Weights::new(weights.epsilon, weights.phi)?;
    let state = BlochState::new(epsilon, 0.0, parametrization.clone())?;
    let ns: Vec<usize> = n_range.collect();
    ns.par_iter()
        .map(|&n| {
            let f_eps = qfi_closed_form(&state, n, Parameter::Epsilon)?.value;
            let f_phi = qfi_closed_form(&state, n, Parameter::Phi)?.value;
            let j2 = j2_error_propagation(&state, n)?;
            Ok(MseRow {
                n,
                collective: weights.epsilon * j2 + weights.phi / f_phi,
                ultimate: weights.epsilon / f_eps + weights.phi / f_phi,
                split: 2.0 * weights.epsilon / f_eps + 2.0 * weights.phi / f_phi,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::spectrum_with_derivative;
    use crate::numeric::five_point;
    use crate::states::{build_density, collective_spin, density_derivative, sld_numeric};

    fn id(s: f64, phi: f64) -> BlochState {
        BlochState::with_length(s, phi).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert!(
            (qfi_closed_form(&id(0.6, 0.0), 4, Parameter::Epsilon)
                .unwrap()
                .value
                - 6.25)
                .abs()
                < 1e-12
        );
        assert!(
            (qfi_closed_form(&id(0.5, 0.0), 3, Parameter::Phi)
                .unwrap()
                .value
                - 0.75)
                .abs()
                < 1e-15
        );
        assert_eq!(
            qfi_closed_form(&id(0.0, 0.3), 7, Parameter::Phi)
                .unwrap()
                .value,
            0.0
        );
        assert!(matches!(
            qfi_closed_form(&id(1.0, 0.0), 2, Parameter::Epsilon),
            Err(Error::SingularSld)
        ));
    }

    #[test]
    fn additivity() {
        for s in [0.1, 0.5, 0.95] {
            for which in [Parameter::Epsilon, Parameter::Phi] {
                let one = qfi_closed_form(&id(s, 0.4), 1, which).unwrap().value;
                for n in [2, 5, 100] {
                    assert_eq!(
                        qfi_closed_form(&id(s, 0.4), n, which).unwrap().value,
                        n as f64 * one
                    );
                }
            }
        }
    }

    #[test]
    fn matches_numerical_sld() {
        let states = [(0.6, 0.2), (0.3, 1.1), (0.85, -0.7), (0.05, 2.0)];
        for n in 1..=5 {
            for &(s, phi) in &states {
                let st = id(s, phi);
                let rho = build_density(&st, n).unwrap();
                for which in [Parameter::Epsilon, Parameter::Phi] {
                    let drho = density_derivative(&st, n, which).unwrap();
                    let l = sld_numeric(&rho, &drho).unwrap();
                    let dense = rho.expectation(&(l.matrix() * l.matrix())).re;
                    let closed = qfi_closed_form(&st, n, which).unwrap().value;
                    assert!(
                        (dense - closed).abs() <= 1e-7 * closed,
                        "N={n} s={s} {which}"
                    );
                }
            }
        }
    }

    #[test]
    fn fisher_information_rules() {
        assert!((fisher_information(&[(0.5, 0.3), (0.5, -0.3)]).unwrap() - 0.36).abs() < 1e-15);
        assert_eq!(fisher_information(&[(1.0, 0.0)]).unwrap(), 0.0);
        assert!(matches!(
            fisher_information(&[(0.7, 0.0), (0.2, 0.0)]),
            Err(Error::Distribution(_))
        ));
        assert!(matches!(
            fisher_information(&[(1.0, 0.1), (0.0, 0.0)]),
            Err(Error::Distribution(_))
        ));
        assert!(matches!(
            fisher_information(&[(1.0, -0.1), (0.0, 0.1)]),
            Err(Error::DivergentFisher { .. })
        ));
        assert!(fisher_information(&[(1.0, 0.0), (0.0, 0.0)]).is_ok());
    }

    #[test]
    fn spectrum_fisher_matches_subspace_sum_and_is_bounded() {
        let st = BlochState::new(0.5, 0.0, Parametrization::Quadratic).unwrap();
        let table = spectrum_with_derivative(&st, 4).unwrap();
        let probs: Vec<(f64, f64)> = table.iter().map(|&(_, p, dp)| (p, dp)).collect();
        let fi = fisher_information(&probs).unwrap();
        let by_subspace: f64 = crate::angular::subspace_fisher_exact(&st, 4)
            .unwrap()
            .iter()
            .map(|x| x.1)
            .sum();
        assert!((fi - by_subspace).abs() < 1e-10);

        let mut last_ratio = 0.0;
        for n in [2, 4, 8, 16, 32, 64, 120] {
            let probs: Vec<(f64, f64)> = spectrum_with_derivative(&st, n)
                .unwrap()
                .iter()
                .map(|&(_, p, dp)| (p, dp))
                .collect();
            let fi = fisher_information(&probs).unwrap();
            let qfi = qfi_closed_form(&st, n, Parameter::Epsilon).unwrap().value;
            let ratio = fi / qfi;
            assert!(ratio <= 1.0 + 1e-12 && ratio > last_ratio, "N={n}: {ratio}");
            last_ratio = ratio;
        }
        assert!(last_ratio > 0.98);
    }

    #[test]
    fn orthogonal_slds() {
        assert!(sld_orthogonality(&id(0.6, 0.2), 2).unwrap() <= 1e-9);
        assert!(sld_orthogonality(&id(0.3, 1.1), 4).unwrap() <= 1e-9);
        assert_eq!(sld_orthogonality(&id(0.0, 0.9), 1).unwrap(), 0.0);
        let q = BlochState::new(1.3, -0.4, Parametrization::Quadratic).unwrap();
        assert!(sld_orthogonality(&q, 6).unwrap() <= 1e-9);
    }

    #[test]
    fn moments_match_dense_traces() {
        for n in 1..=8 {
            let spin = collective_spin(n).unwrap();
            let jsq = spin.jsq.matrix();
            let jsq2 = jsq * jsq;
            for s in [0.0, 0.3, 0.6, 0.9, 1.0] {
                let st = id(s, 0.8);
                let m = j2_moments(&st, n).unwrap();
                let rho = build_density(&st, n).unwrap();
                let mean = rho.expectation(jsq).re;
                let second = rho.expectation(&jsq2).re;
                let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
                assert!(rel(m.mean_j2, mean), "N={n} s={s}");
                assert!(rel(m.mean_j2sq, second), "N={n} s={s}");
                assert!(m.variance >= -1e-10);
                if s < 1.0 && s > 0.0 {
                    let fd = five_point(
                        |x| build_density(&id(x, 0.8), n).unwrap().expectation(jsq).re,
                        s,
                    );
                    assert!(rel(m.d_mean_j2, fd), "N={n} s={s}: {} vs {fd}", m.d_mean_j2);
                }
            }
        }
        let m = j2_moments(&id(0.0, 0.0), 2).unwrap();
        assert_eq!((m.mean_j2, m.variance), (1.5, 0.75));
        let m = j2_moments(&id(1.0, 0.0), 3).unwrap();
        assert_eq!((m.mean_j2, m.variance), (3.75, 0.0));
    }

    #[test]
    fn error_propagation_values() {
        let v = j2_error_propagation(&id(0.6, 0.0), 2).unwrap();
        assert!((v - 1.075_2 / 0.72).abs() < 1e-12);
        assert_eq!(j2_error_propagation(&id(1.0, 0.0), 5).unwrap(), 0.0);
        assert!(matches!(
            j2_error_propagation(&id(0.0, 0.0), 3),
            Err(Error::Uninformative(_))
        ));
        let q = BlochState::new(0.0, 0.0, Parametrization::Quadratic).unwrap();
        assert!(matches!(
            j2_error_propagation(&q, 3),
            Err(Error::Uninformative(_))
        ));
        assert!(j2_error_propagation(&id(0.5, 0.0), 1).is_err());

        let eps = Parametrization::Quadratic.s_inverse(0.9).unwrap();
        let st = BlochState::new(eps, 0.0, Parametrization::Quadratic).unwrap();
        let mse = j2_error_propagation(&st, 100).unwrap();
        let bound = 1.0 / qfi_closed_form(&st, 100, Parameter::Epsilon).unwrap().value;
        assert!((mse / bound - 1.0).abs() < 0.02);
    }

    #[test]
    fn efficiency_identity() {
        for s in [0.2, 0.6, 0.95] {
            for n in [2, 3, 10, 1000] {
                let st = id(s, 0.0);
                let ratio = j2_error_propagation(&st, n).unwrap()
                    * qfi_closed_form(&st, n, Parameter::Epsilon).unwrap().value;
                assert!((ratio - j2_efficiency_ratio(s, n)).abs() < 1e-12 * ratio);
            }
        }
        // At s = 0.3 and N = 10⁴ the ratio exceeds 1 by about 1.6e-3: the
        // correction is O(1/N) with a large prefactor at small s.
        let r = j2_efficiency_ratio(0.3, 10_000);
        assert!(r > 1.001 && r < 1.002);
    }

    #[test]
    fn gap_is_bounded() {
        let st = id(0.6, 0.0);
        let g: Vec<f64> = [50, 100, 200]
            .iter()
            .map(|&n| asymptotic_gap(&st, n).unwrap())
            .collect();
        for a in &g {
            for b in &g {
                assert!((a - b).abs() / a.abs().max(b.abs()) < 0.1, "{g:?}");
            }
        }
        assert!(asymptotic_gap(&id(1.0, 0.0), 10).is_err());
    }

    #[test]
    fn weighted_table_ordering() {
        let rows = weighted_mse_table(
            &Parametrization::Quadratic,
            reference_epsilon(),
            2..=60,
            Weights::default(),
        )
        .unwrap();
        assert!(rows[0].collective >= rows[0].ultimate);
        assert!(rows[0].collective > rows[0].split);
        for r in &rows[1..] {
            assert!(r.collective < r.split, "N={}", r.n);
            assert!(r.collective >= r.ultimate);
        }
        let ratios: Vec<f64> = rows.iter().map(|r| r.collective / r.ultimate).collect();
        for w in ratios[1..].windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!((ratios.last().unwrap() - 1.0) < 0.1);
        assert!(Weights::new(0.7, 0.7).is_err());
    }
}
