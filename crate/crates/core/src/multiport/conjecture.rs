//! Checks that the top two angular-momentum subspaces produce disjoint port signatures.
//!
//! S₀ is the signature set of the all-H reference state τ₀ and S₁ that of the
//! single-flip states τ_{1,i}. The check asserts that every τ_{1,i} yields
//! the same S₁, that each puts exactly 1/N of its probability inside S₀, and,
//! in full mode, that every j = N/2 eigenket lands in S₀ while every
//! j = N/2 − 1 eigenket lands in S₁ \ S₀.

use std::collections::BTreeSet;

use serde::Serialize;

use super::fock::{pattern_of, Statistics};
use super::signatures::{signature_set, tau0_state, tau1_state, StateVector, ZeroTest};
use crate::error::{Error, Result};
use crate::serialize::f64_17;
use crate::spin::HalfInt;
use crate::states::angular_eigenbasis;

/// Largest N for the eigenbasis mode by default.
pub const FULL_MODE_MAX: usize = 6;
/// Largest N for the reference-state mode without `long`.
pub const TAU_MODE_MAX: usize = 8;
/// Largest N for the reference-state mode with `long`.
pub const TAU_MODE_LONG_MAX: usize = 12;
/// Largest N for which the exact zero test is used.
pub const EXACT_MAX: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConjectureMode {
    /// Reference states plus every eigenket with j = N/2 or N/2 − 1.
    Full,
    /// Reference states τ₀ and τ_{1,i} only.
    TauOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapMass {
    /// 1-based index of the flipped port.
    pub flipped: usize,
    #[serde(serialize_with = "f64_17")]
    pub probability: f64,
    pub exact: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenCheck {
    pub j: HalfInt,
    pub m: HalfInt,
    pub g: usize,
    pub expected: &'static str,
    pub passed: bool,
    pub counterexamples: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub statistics: Statistics,
    pub mode: ConjectureMode,
    pub zero_test: ZeroTest,
    pub s0: Vec<Vec<u32>>,
    pub s1: Vec<Vec<u32>>,
    pub s1_minus_s0: Vec<Vec<u32>>,
    pub s0_patterns: Vec<Vec<u32>>,
    pub s1_minus_s0_patterns: Vec<Vec<u32>>,
    pub tau1_sets_identical: bool,
    pub overlap: Vec<OverlapMass>,
    pub eigen: Vec<EigenCheck>,
    pub passed: bool,
    pub failures: Vec<String>,
}

fn patterns(sets: &BTreeSet<Vec<u32>>) -> Vec<Vec<u32>> {
    let p: BTreeSet<Vec<u32>> = sets.iter().map(|c| pattern_of(c)).collect();
    let mut p: Vec<Vec<u32>> = p.into_iter().collect();
    p.sort_by(|a, b| b.cmp(a));
    p
}

fn budget(n: usize, mode: ConjectureMode, long: bool) -> Result<()> {
    let max = match mode {
        ConjectureMode::Full => FULL_MODE_MAX,
        ConjectureMode::TauOnly if long => TAU_MODE_LONG_MAX,
        ConjectureMode::TauOnly => TAU_MODE_MAX,
    };
    if n < 2 || n > max {
        let hint = if mode == ConjectureMode::TauOnly && !long && n <= TAU_MODE_LONG_MAX {
            " (pass --long for up to 12)"
        } else {
            ""
        };
        return Err(Error::Budget(format!(
            "N = {n} is outside 2..={max} for {mode:?} mode{hint}"
        )));
    }
    Ok(())
}

pub fn conjecture_check(
    n: usize,
    statistics: Statistics,
    mode: ConjectureMode,
    long: bool,
) -> Result<ConjectureReport> {
    budget(n, mode, long)?;
    let zero_test = if n <= EXACT_MAX {
        ZeroTest::Exact
    } else {
        ZeroTest::float()
    };
    let mut failures = Vec::new();

    let s0 = signature_set(
        n,
        &StateVector::basis(tau0_state(n)?),
        statistics,
        zero_test,
    )?
    .members();
    let mut s1: Option<BTreeSet<Vec<u32>>> = None;
    let mut tau1_sets_identical = true;
    let mut overlap = Vec::with_capacity(n);
    for i in 0..n {
        let set = signature_set(
            n,
            &StateVector::basis(tau1_state(n, i)?),
            statistics,
            zero_test,
        )?;
        let members = set.members();
        match &s1 {
            None => s1 = Some(members.clone()),
            Some(first) if *first != members => {
                tau1_sets_identical = false;
                let diff: Vec<_> = first.symmetric_difference(&members).cloned().collect();
                failures.push(format!("τ_1,{} differs from τ_1,1 on {diff:?}", i + 1));
            }
            _ => {}
        }
        let probability = set.mass_in(&s0);
        let exact = set.exact_mass_in(&s0);
        let expected = num_rational::Ratio::new(1, n as i128);
        let ok = match exact {
            Some(r) => r == expected,
            None => (probability - 1.0 / n as f64).abs() <= 1e-9,
        };
        if !ok {
            failures.push(format!(
                "τ_1,{} puts {probability} inside S₀, expected 1/{n}",
                i + 1
            ));
        }
        overlap.push(OverlapMass {
            flipped: i + 1,
            probability,
            exact: exact.map(|r| r.to_string()),
        });
    }
    let s1 = s1.expect("N ≥ 2");
    let s1_minus_s0: BTreeSet<Vec<u32>> = s1.difference(&s0).cloned().collect();

    let mut eigen = Vec::new();
    if mode == ConjectureMode::Full {
        let top = n as i64;
        for ket in angular_eigenbasis(n)? {
            let (target, expected) = match top - ket.j.twice() {
                0 => (&s0, "S0"),
                2 => (&s1_minus_s0, "S1\\S0"),
                _ => continue,
            };
            let sv = StateVector::from_qubit_vector(n, &ket.vector)?;
            let members = signature_set(n, &sv, statistics, ZeroTest::float())?.members();
            let counterexamples: Vec<Vec<u32>> = members.difference(target).cloned().collect();
            let passed = counterexamples.is_empty();
            if !passed {
                failures.push(format!(
                    "j = {}, m = {}, g = {} reaches {counterexamples:?} outside {expected}",
                    ket.j, ket.m, ket.g
                ));
            }
            eigen.push(EigenCheck {
                j: ket.j,
                m: ket.m,
                g: ket.g,
                expected,
                passed,
                counterexamples,
            });
        }
    }

    Ok(ConjectureReport {
        n,
        statistics,
        mode,
        zero_test,
        s0_patterns: patterns(&s0),
        s1_minus_s0_patterns: patterns(&s1_minus_s0),
        s0: s0.into_iter().collect(),
        s1: s1.into_iter().collect(),
        s1_minus_s0: s1_minus_s0.into_iter().collect(),
        tau1_sets_identical,
        overlap,
        eigen,
        passed: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_ports() {
        let r = conjecture_check(2, Statistics::Boson, ConjectureMode::Full, false).unwrap();
        assert!(r.passed, "{:?}", r.failures);
        assert_eq!(r.s0_patterns, vec![vec![2]]);
        assert_eq!(r.s1_minus_s0_patterns, vec![vec![1, 1]]);
        assert_eq!(r.eigen.len(), 4);
        assert!(r.overlap.iter().all(|o| o.exact.as_deref() == Some("1/2")));
    }

    #[test]
    fn three_ports() {
        let r = conjecture_check(3, Statistics::Boson, ConjectureMode::Full, false).unwrap();
        assert!(r.passed, "{:?}", r.failures);
        assert_eq!(r.s0_patterns, vec![vec![3], vec![1, 1, 1]]);
        assert_eq!(r.s1_minus_s0_patterns, vec![vec![2, 1]]);
    }

    #[test]
    fn budgets() {
        assert!(matches!(
            conjecture_check(7, Statistics::Boson, ConjectureMode::Full, false),
            Err(Error::Budget(_))
        ));
        assert!(matches!(
            conjecture_check(9, Statistics::Boson, ConjectureMode::TauOnly, false),
            Err(Error::Budget(_))
        ));
        assert!(matches!(
            conjecture_check(13, Statistics::Boson, ConjectureMode::TauOnly, true),
            Err(Error::Budget(_))
        ));
        assert!(conjecture_check(1, Statistics::Boson, ConjectureMode::Full, false).is_err());
    }
}
