//! Output port signatures of a multi-particle input state.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::amplitude::{block_sign, Multiport};
use super::cyclotomic::CyclotomicInt;
use super::fock::{block_configurations, pattern_of, FockState, Polarization, Statistics};
use crate::error::{Error, Result};
use crate::numeric::{factorial, CVector};
use crate::serialize::f64_17;

/// Amplitudes at or below this magnitude count as zero in float mode.
pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-12;

/// How vanishing amplitudes are decided.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum ZeroTest {
    /// Reduction modulo the cyclotomic polynomial; basis-state inputs only.
    #[default]
    Exact,
    /// |amplitude| ≤ tolerance.
    Float(f64),
}

impl ZeroTest {
    pub fn float() -> Self {
        Self::Float(DEFAULT_FLOAT_TOLERANCE)
    }
}

impl fmt::Display for ZeroTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact => f.write_str("exact"),
            Self::Float(t) => write!(f, "float({t:e})"),
        }
    }
}

impl FromStr for ZeroTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Self::Exact),
            "float" => Ok(Self::float()),
            other => other
                .strip_prefix("float(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|t| t.parse::<f64>().ok())
                .filter(|t| *t > 0.0)
                .map(Self::Float)
                .ok_or_else(|| Error::Invalid(format!("unknown zero test '{other}'"))),
        }
    }
}

impl Serialize for ZeroTest {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ZeroTest {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// A normalized superposition of Fock states with one particle per port on average.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    components: Vec<(FockState, Complex64)>,
}

impl StateVector {
    pub fn new(n: usize, components: Vec<(FockState, Complex64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("empty state vector".into()));
        }
        let mut seen = BTreeSet::new();
        for (s, _) in &components {
            if s.ports() != n {
                return Err(Error::InvalidFock(format!("{s} does not have {n} ports")));
            }
            if !seen.insert(s.clone()) {
                return Err(Error::InvalidFock(format!("{s} listed twice")));
            }
        }
        let norm: f64 = components.iter().map(|(_, a)| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Invalid(format!(
                "state vector has squared norm {norm}"
            )));
        }
        Ok(Self { n, components })
    }

    pub fn basis(state: FockState) -> Self {
        Self {
            n: state.ports(),
            components: vec![(state, Complex64::new(1.0, 0.0))],
        }
    }

    /// Sends qubit i of a 2^N-dimensional vector into port i.
    pub fn from_qubit_vector(n: usize, vector: &CVector) -> Result<Self> {
        if vector.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "expected 2^{n} amplitudes, got {}",
                vector.len()
            )));
        }
        let components = vector
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 1e-15)
            .map(|(i, a)| Ok((FockState::from_qubits(n, i)?, *a)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, components)
    }

    pub fn ports(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[(FockState, Complex64)] {
        &self.components
    }

    /// The Fock state when the vector is a single basis state up to phase.
    pub fn as_basis_state(&self) -> Option<&FockState> {
        match self.components.as_slice() {
            [(s, a)] if (a.norm() - 1.0).abs() < 1e-12 => Some(s),
            _ => None,
        }
    }
}

/// An exact probability numerator/denominator with the numerator in Z[ω] ∩ R.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMass {
    pub numerator: CyclotomicInt,
    pub denominator: i128,
}

impl ExactMass {
    pub fn rational(&self) -> Option<Ratio<i128>> {
        self.numerator
            .as_integer()
            .map(|t| Ratio::new(t, self.denominator))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignatureEntry {
    pub counts: Vec<u32>,
    pub pattern: Vec<u32>,
    #[serde(serialize_with = "f64_17")]
    pub probability: f64,
    /// Exact probability as "p/q" when it is rational.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip)]
    pub exact_mass: Option<ExactMass>,
}

/// Float magnitudes of the amplitudes classified by the exact test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Agreement {
    pub exact_zeros: usize,
    pub exact_nonzeros: usize,
    #[serde(serialize_with = "f64_17")]
    pub max_zero_magnitude: f64,
    #[serde(serialize_with = "f64_17")]
    pub min_nonzero_magnitude: f64,
}

impl Agreement {
    /// Exact zeros are below 1e−12 in float and exact non-zeros above 1e−9.
    pub fn unambiguous(&self) -> bool {
        self.max_zero_magnitude < 1e-12 && self.min_nonzero_magnitude > 1e-9
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignatureSet {
    #[serde(rename = "N")]
    pub n: usize,
    pub statistics: Statistics,
    pub zero_test: ZeroTest,
    #[serde(rename = "signatures")]
    pub entries: Vec<SignatureEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<Agreement>,
}

impl SignatureSet {
    pub fn members(&self) -> BTreeSet<Vec<u32>> {
        self.entries.iter().map(|e| e.counts.clone()).collect()
    }

    pub fn patterns(&self) -> BTreeSet<Vec<u32>> {
        self.entries.iter().map(|e| e.pattern.clone()).collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    pub fn mass_in(&self, members: &BTreeSet<Vec<u32>>) -> f64 {
        self.entries
            .iter()
            .filter(|e| members.contains(&e.counts))
            .map(|e| e.probability)
            .sum()
    }

    /// Exact probability of landing in `members`, when exact masses are available
    /// and their sum is rational.
    pub fn exact_mass_in(&self, members: &BTreeSet<Vec<u32>>) -> Option<Ratio<i128>> {
        let mut total: Option<ExactMass> = None;
        for e in self.entries.iter().filter(|e| members.contains(&e.counts)) {
            let m = e.exact_mass.as_ref()?;
            match &mut total {
                None => total = Some(m.clone()),
                Some(t) => {
                    if t.denominator != m.denominator {
                        return None;
                    }
                    t.numerator.add_assign(&m.numerator);
                }
            }
        }
        match total {
            Some(t) => t.rational(),
            None => Some(Ratio::from_integer(0)),
        }
    }
}

fn add_counts(h: &[u8], v: &[u8]) -> Vec<u32> {
    h.iter().zip(v).map(|(&a, &b)| (a + b) as u32).collect()
}

fn multinomial(block: &[u8]) -> i128 {
    let total: u64 = block.iter().map(|&k| k as u64).sum();
    let mut m = factorial(total);
    for &k in block {
        m /= factorial(k as u64);
    }
    m as i128
}

/// Output block data for one internal state of a basis input.
struct BlockTable {
    configs: Vec<Vec<u8>>,
    amplitudes: Vec<Complex64>,
    /// |numerator|²·multinomial, exact mode only.
    weights: Option<Vec<Option<CyclotomicInt>>>,
}

fn block_table(mp: &Multiport, input: &[u8], exact: bool) -> BlockTable {
    let particles: usize = input.iter().map(|&k| k as usize).sum();
    let configs = block_configurations(mp.ports(), particles, mp.statistics());
    let data: Vec<(Complex64, Option<Option<CyclotomicInt>>)> = configs
        .par_iter()
        .map(|out| {
            let den = mp.block_denominator(input, out) as f64;
            let amp = mp.block_numerator(input, out) / den.sqrt();
            let w = exact.then(|| {
                let num = mp.block_numerator_exact(input, out);
                (!num.is_zero()).then(|| {
                    let m = match mp.statistics() {
                        Statistics::Boson => multinomial(out),
                        Statistics::Fermion => 1,
                    };
                    num.norm_sqr().scale(m)
                })
            });
            (amp, w)
        })
        .collect();
    let amplitudes = data.iter().map(|d| d.0).collect();
    let weights = exact.then(|| data.into_iter().map(|d| d.1.unwrap()).collect());
    BlockTable {
        configs,
        amplitudes,
        weights,
    }
}

#[derive(Default)]
struct Accumulator {
    probability: f64,
    exact: Option<CyclotomicInt>,
    nonzero: bool,
}

fn basis_signatures(
    mp: &Multiport,
    input: &FockState,
    zero_test: ZeroTest,
) -> (BTreeMap<Vec<u32>, Accumulator>, Option<Agreement>, i128) {
    let n = mp.ports();
    let exact = zero_test == ZeroTest::Exact;
    let ih = input.block(Polarization::H);
    let iv = input.block(Polarization::V);
    let th = block_table(mp, &ih, exact);
    let tv = block_table(mp, &iv, exact);
    let (nh, nv) = (input.total(Polarization::H), input.total(Polarization::V));

    let mut denominator = (n as i128).pow(n as u32);
    if mp.statistics() == Statistics::Boson {
        for &k in input.occupations() {
            denominator *= factorial(k as u64) as i128;
        }
        denominator *= (factorial(nh as u64) * factorial(nv as u64)) as i128;
    }

    let mut map: BTreeMap<Vec<u32>, Accumulator> = BTreeMap::new();
    let mut agreement = exact.then_some(Agreement {
        exact_zeros: 0,
        exact_nonzeros: 0,
        max_zero_magnitude: 0.0,
        min_nonzero_magnitude: f64::INFINITY,
    });
    for (b, ov) in tv.configs.iter().enumerate() {
        for (a, oh) in th.configs.iter().enumerate() {
            let amp = th.amplitudes[a] * tv.amplitudes[b];
            let magnitude = amp.norm();
            let acc = map.entry(add_counts(oh, ov)).or_default();
            let nonzero = match zero_test {
                ZeroTest::Float(tol) => magnitude > tol,
                ZeroTest::Exact => {
                    let wh = &th.weights.as_ref().unwrap()[a];
                    let wv = &tv.weights.as_ref().unwrap()[b];
                    let ag = agreement.as_mut().unwrap();
                    match (wh, wv) {
                        (Some(x), Some(y)) => {
                            ag.exact_nonzeros += 1;
                            ag.min_nonzero_magnitude = ag.min_nonzero_magnitude.min(magnitude);
                            acc.exact
                                .get_or_insert_with(|| CyclotomicInt::zero(n))
                                .add_assign(&x.mul(y));
                            true
                        }
                        _ => {
                            ag.exact_zeros += 1;
                            ag.max_zero_magnitude = ag.max_zero_magnitude.max(magnitude);
                            false
                        }
                    }
                }
            };
            if nonzero {
                acc.nonzero = true;
                acc.probability += amp.norm_sqr();
            }
        }
    }
    (map, agreement, denominator)
}

fn superposition_signatures(
    mp: &Multiport,
    state: &StateVector,
    tolerance: f64,
) -> BTreeMap<Vec<u32>, Accumulator> {
    let n = mp.ports();
    let stats = mp.statistics();
    let mut classes: BTreeMap<usize, Vec<&(FockState, Complex64)>> = BTreeMap::new();
    for c in state.components() {
        classes
            .entry(c.0.total(Polarization::H))
            .or_default()
            .push(c);
    }
    let mut map: BTreeMap<Vec<u32>, Accumulator> = BTreeMap::new();
    for (nh, comps) in classes {
        let hs = block_configurations(n, nh, stats);
        let vs = block_configurations(n, n - nh, stats);
        let table = |pol: Polarization, outs: &Vec<Vec<u8>>| -> Vec<Vec<Complex64>> {
            comps
                .iter()
                .map(|(s, _)| {
                    let i = s.block(pol);
                    outs.iter()
                        .map(|o| {
                            mp.block_numerator(&i, o) / (mp.block_denominator(&i, o) as f64).sqrt()
                        })
                        .collect()
                })
                .collect()
        };
        let th = table(Polarization::H, &hs);
        let tv = table(Polarization::V, &vs);
        let weights: Vec<Complex64> = comps
            .iter()
            .map(|(s, a)| {
                a * block_sign(stats, &s.block(Polarization::H), &s.block(Polarization::V))
            })
            .collect();
        let rows: Vec<(Vec<u32>, f64)> = (0..vs.len() * hs.len())
            .into_par_iter()
            .map(|idx| {
                let (b, a) = (idx / hs.len(), idx % hs.len());
                let sign = block_sign(stats, &hs[a], &vs[b]);
                let amp: Complex64 = (0..comps.len())
                    .map(|c| weights[c] * th[c][a] * tv[c][b])
                    .sum::<Complex64>()
                    * sign;
                (add_counts(&hs[a], &vs[b]), amp.norm())
            })
            .collect();
        for (counts, magnitude) in rows {
            let acc = map.entry(counts).or_default();
            if magnitude > tolerance {
                acc.nonzero = true;
                acc.probability += magnitude * magnitude;
            }
        }
    }
    map
}

/// Signatures reachable from `state` and the probability mass of each.
pub fn signature_set(
    n: usize,
    state: &StateVector,
    statistics: Statistics,
    zero_test: ZeroTest,
) -> Result<SignatureSet> {
    if state.ports() != n {
        return Err(Error::Dimension(format!(
            "state has {} ports, expected {n}",
            state.ports()
        )));
    }
    for (s, _) in state.components() {
        s.check(statistics)?;
    }
    let mp = Multiport::new(n, statistics)?;
    let (map, agreement, denominator) = match (state.as_basis_state(), zero_test) {
        (Some(basis), _) => basis_signatures(&mp, basis, zero_test),
        (None, ZeroTest::Float(tol)) => (superposition_signatures(&mp, state, tol), None, 1),
        (None, ZeroTest::Exact) => {
            return Err(Error::Invalid(
                "the exact zero test needs a single Fock-state input; use a float test".into(),
            ))
        }
    };
    let entries = map
        .into_iter()
        .filter(|(_, acc)| acc.nonzero)
        .map(|(counts, acc)| {
            let exact_mass = acc.exact.map(|numerator| ExactMass {
                numerator,
                denominator,
            });
            SignatureEntry {
                pattern: pattern_of(&counts),
                counts,
                probability: acc.probability,
                exact: exact_mass
                    .as_ref()
                    .and_then(|m| m.rational())
                    .map(|r| r.to_string()),
                exact_mass,
            }
        })
        .collect();
    Ok(SignatureSet {
        n,
        statistics,
        zero_test,
        entries,
        agreement,
    })
}

/// All-H input, one particle per port: the reference state τ₀ at φ = 0.
pub fn tau0_state(n: usize) -> Result<FockState> {
    FockState::from_blocks(&vec![1; n], &vec![0; n])
}

/// The single-flip state τ_{1,i}: V at port `flipped` (0-based), H elsewhere.
pub fn tau1_state(n: usize, flipped: usize) -> Result<FockState> {
    if flipped >= n {
        return Err(Error::Invalid(format!(
            "port {flipped} out of range for N = {n}"
        )));
    }
    let mut h = vec![1u8; n];
    let mut v = vec![0u8; n];
    h[flipped] = 0;
    v[flipped] = 1;
    FockState::from_blocks(&h, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{angular_eigenbasis, collective_rotation};

    fn set(items: &[&[u32]]) -> BTreeSet<Vec<u32>> {
        items.iter().map(|x| x.to_vec()).collect()
    }

    #[test]
    fn zero_test_parsing() {
        assert_eq!("exact".parse::<ZeroTest>().unwrap(), ZeroTest::Exact);
        assert_eq!("float".parse::<ZeroTest>().unwrap(), ZeroTest::Float(1e-12));
        assert_eq!(
            "float(1e-10)".parse::<ZeroTest>().unwrap(),
            ZeroTest::Float(1e-10)
        );
        assert_eq!(
            ZeroTest::Float(1e-10)
                .to_string()
                .parse::<ZeroTest>()
                .unwrap(),
            ZeroTest::Float(1e-10)
        );
        assert!("fuzzy".parse::<ZeroTest>().is_err());
    }

    #[test]
    fn two_port_reference_bunches() {
        let s = signature_set(
            2,
            &StateVector::basis(tau0_state(2).unwrap()),
            Statistics::Boson,
            ZeroTest::Exact,
        )
        .unwrap();
        assert_eq!(s.members(), set(&[&[2, 0], &[0, 2]]));
        assert_eq!(s.patterns(), set(&[&[2]]));
        assert!(s.entries.iter().all(|e| e.exact.as_deref() == Some("1/2")));
        assert!(s.agreement.as_ref().unwrap().unambiguous());
        let f = signature_set(
            2,
            &StateVector::basis(tau0_state(2).unwrap()),
            Statistics::Fermion,
            ZeroTest::Exact,
        )
        .unwrap();
        assert_eq!(f.members(), set(&[&[1, 1]]));
    }

    #[test]
    fn exact_and_float_modes_agree() {
        for n in 2..=5 {
            for stats in [Statistics::Boson, Statistics::Fermion] {
                for input in [tau0_state(n).unwrap(), tau1_state(n, n - 1).unwrap()] {
                    let sv = StateVector::basis(input);
                    let e = signature_set(n, &sv, stats, ZeroTest::Exact).unwrap();
                    let f = signature_set(n, &sv, stats, ZeroTest::float()).unwrap();
                    assert_eq!(e.members(), f.members());
                    assert!(e.agreement.as_ref().unwrap().unambiguous());
                    assert!((e.total_probability() - 1.0).abs() < 1e-12);
                    assert_eq!(e.exact_mass_in(&e.members()), Some(Ratio::from_integer(1)));
                    for (a, b) in e.entries.iter().zip(&f.entries) {
                        assert!((a.probability - b.probability).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn superposition_path_matches_basis_path() {
        let input = tau1_state(4, 2).unwrap();
        let phased =
            StateVector::new(4, vec![(input.clone(), Complex64::from_polar(1.0, 0.7))]).unwrap();
        let mut sv = StateVector::basis(input);
        sv.components
            .push((tau0_state(4).unwrap(), Complex64::new(0.0, 0.0)));
        let a = signature_set(4, &sv, Statistics::Boson, ZeroTest::float()).unwrap();
        let b = signature_set(4, &phased, Statistics::Boson, ZeroTest::float()).unwrap();
        assert_eq!(a.members(), b.members());
        assert!(signature_set(4, &sv, Statistics::Boson, ZeroTest::Exact).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = tau0_state(3).unwrap();
        assert!(StateVector::new(3, vec![(s.clone(), Complex64::new(0.5, 0.0))]).is_err());
        assert!(StateVector::new(2, vec![(s.clone(), Complex64::new(1.0, 0.0))]).is_err());
        assert!(signature_set(
            4,
            &StateVector::basis(s),
            Statistics::Boson,
            ZeroTest::Exact
        )
        .is_err());
        assert!(tau1_state(3, 3).is_err());
    }

    #[test]
    fn common_rotation_leaves_signatures_unchanged() {
        for n in 2..=4 {
            let basis = angular_eigenbasis(n).unwrap();
            for phi in [0.3, 1.1] {
                let r = collective_rotation(phi, n).unwrap();
                for ket in &basis {
                    let plain = StateVector::from_qubit_vector(n, &ket.vector).unwrap();
                    let rotated = StateVector::from_qubit_vector(n, &(&r * &ket.vector)).unwrap();
                    for stats in [Statistics::Boson, Statistics::Fermion] {
                        let a = signature_set(n, &plain, stats, ZeroTest::float()).unwrap();
                        let b = signature_set(n, &rotated, stats, ZeroTest::float()).unwrap();
                        assert_eq!(
                            a.members(),
                            b.members(),
                            "N={n} j={} m={} φ={phi}",
                            ket.j,
                            ket.m
                        );
                        for (x, y) in a.entries.iter().zip(&b.entries) {
                            assert!((x.probability - y.probability).abs() < 1e-10);
                        }
                    }
                }
            }
        }
    }
}
