//! Occupation-number states over N ports × {H, V} and their port signatures.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Boson => "boson",
            Self::Fermion => "fermion",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    fn offset(self) -> usize {
        match self {
            Self::H => 0,
            Self::V => 1,
        }
    }
}

/// Occupations indexed by (port, polarization); mode index 2·port + {0 for H, 1 for V}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockState {
    occupations: Vec<u8>,
}

impl FockState {
    /// The total particle number must equal the number of ports.
    pub fn new(occupations: Vec<u8>) -> Result<Self> {
        if occupations.len() < 4 || !occupations.len().is_multiple_of(2) {
            return Err(Error::InvalidFock(format!(
                "expected 2N occupations with N ≥ 2, got {}",
                occupations.len()
            )));
        }
        let ports = occupations.len() / 2;
        let total: usize = occupations.iter().map(|&o| o as usize).sum();
        if total != ports {
            return Err(Error::InvalidFock(format!(
                "{total} particles in {ports} ports"
            )));
        }
        Ok(Self { occupations })
    }

    /// Splits separate H and V port occupation vectors into a state.
    pub fn from_blocks(h: &[u8], v: &[u8]) -> Result<Self> {
        if h.len() != v.len() {
            return Err(Error::InvalidFock("H and V blocks differ in length".into()));
        }
        Self::new(h.iter().zip(v).flat_map(|(&a, &b)| [a, b]).collect())
    }

    /// The product state where qubit i (most significant bit first) enters port i,
    /// bit 0 meaning H and bit 1 meaning V.
    pub fn from_qubits(n: usize, index: usize) -> Result<Self> {
        let mut occ = vec![0u8; 2 * n];
        for port in 0..n {
            let bit = (index >> (n - 1 - port)) & 1;
            occ[2 * port + bit] = 1;
        }
        Self::new(occ)
    }

    pub fn ports(&self) -> usize {
        self.occupations.len() / 2
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occupations
    }

    pub fn occupation(&self, port: usize, pol: Polarization) -> u8 {
        self.occupations[2 * port + pol.offset()]
    }

    pub fn block(&self, pol: Polarization) -> Vec<u8> {
        self.occupations
            .iter()
            .skip(pol.offset())
            .step_by(2)
            .copied()
            .collect()
    }

    pub fn total(&self, pol: Polarization) -> usize {
        self.block(pol).iter().map(|&o| o as usize).sum()
    }

    pub fn signature(&self) -> PortSignature {
        PortSignature::new(
            self.occupations
                .chunks(2)
                .map(|c| (c[0] + c[1]) as u32)
                .collect(),
        )
    }

    pub fn check(&self, statistics: Statistics) -> Result<()> {
        if statistics == Statistics::Fermion && self.occupations.iter().any(|&o| o > 1) {
            return Err(Error::InvalidFock(format!(
                "fermionic mode occupied more than once: {self}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (port, c) in self.occupations.chunks(2).enumerate() {
            for (label, occ) in [("H", c[0]), ("V", c[1])] {
                if occ > 0 {
                    parts.push(if occ == 1 {
                        format!("{label}@{}", port + 1)
                    } else {
                        format!("{occ}{label}@{}", port + 1)
                    });
                }
            }
        }
        write!(f, "|{}⟩", parts.join(","))
    }
}

/// Per-port particle totals (H and V summed), in port order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortSignature {
    pub counts: Vec<u32>,
}

impl PortSignature {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    /// Non-zero counts sorted non-increasingly, e.g. (2, 1) for counts [0, 1, 2].
    pub fn pattern(&self) -> Vec<u32> {
        pattern_of(&self.counts)
    }
}

pub fn pattern_of(counts: &[u32]) -> Vec<u32> {
    let mut p: Vec<u32> = counts.iter().copied().filter(|&c| c > 0).collect();
    p.sort_unstable_by(|a, b| b.cmp(a));
    p
}

/// All occupation vectors of `particles` over `ports` modes, at most one per
/// mode for fermions, in colexicographic order (the last port varies slowest).
pub fn block_configurations(
    ports: usize,
    particles: usize,
    statistics: Statistics,
) -> Vec<Vec<u8>> {
    let cap = match statistics {
        Statistics::Boson => particles,
        Statistics::Fermion => 1,
    };
    let mut out = Vec::new();
    let mut current = vec![0u8; ports];
    fill(&mut current, ports, particles, cap, &mut out);
    out
}

fn fill(current: &mut Vec<u8>, upto: usize, remaining: usize, cap: usize, out: &mut Vec<Vec<u8>>) {
    if upto == 0 {
        if remaining == 0 {
            out.push(current.clone());
        }
        return;
    }
    let slot = upto - 1;
    if upto == 1 {
        if remaining <= cap {
            current[0] = remaining as u8;
            out.push(current.clone());
            current[0] = 0;
        }
        return;
    }
    for k in 0..=remaining.min(cap) {
        current[slot] = k as u8;
        fill(current, slot, remaining - k, cap, out);
    }
    current[slot] = 0;
}

/// Ports listed with multiplicity, e.g. [2, 0, 1] ↦ [0, 0, 2].
pub fn repeated_ports(block: &[u8]) -> Vec<usize> {
    block
        .iter()
        .enumerate()
        .flat_map(|(p, &k)| std::iter::repeat_n(p, k as usize))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::binomial;

    #[test]
    fn configuration_counts() {
        for ports in 2..=6 {
            for k in 0..=ports {
                let b = block_configurations(ports, k, Statistics::Boson);
                assert_eq!(b.len() as u128, binomial((ports + k - 1) as u64, k as u64));
                let f = block_configurations(ports, k, Statistics::Fermion);
                assert_eq!(f.len() as u128, binomial(ports as u64, k as u64));
            }
        }
        assert_eq!(
            block_configurations(3, 0, Statistics::Boson),
            vec![vec![0, 0, 0]]
        );
    }

    #[test]
    fn colex_order() {
        let b = block_configurations(2, 2, Statistics::Boson);
        assert_eq!(b, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn qubit_products() {
        // |H V H⟩ = index 0b010
        let s = FockState::from_qubits(3, 0b010).unwrap();
        assert_eq!(s.block(Polarization::H), vec![1, 0, 1]);
        assert_eq!(s.block(Polarization::V), vec![0, 1, 0]);
        assert_eq!(s.signature().counts, vec![1, 1, 1]);
        assert_eq!(s.to_string(), "|H@1,V@2,H@3⟩");
    }

    #[test]
    fn validation() {
        assert!(FockState::new(vec![2, 0, 1, 0]).is_err());
        assert!(FockState::new(vec![2, 0, 0]).is_err());
        let s = FockState::new(vec![2, 0, 0, 0, 1, 0]).unwrap();
        assert!(s.check(Statistics::Fermion).is_err());
        assert_eq!(s.signature().pattern(), vec![2, 1]);
        assert_eq!(repeated_ports(&[2, 0, 1]), vec![0, 0, 2]);
    }
}
