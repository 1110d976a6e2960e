//! Two-particle Hong–Ou–Mandel interference and the three-port tritter, for
//! bosons and fermions, with the H/V internal state carried along.
//!
//! cargo run --example hom_and_tritter

use blochjoint::multiport::transition_amplitude;
use blochjoint::multiport::{
    signature_set, tau0_state, tau1_state, FockState, StateVector, Statistics, ZeroTest,
};
use num_complex::Complex64;

fn show(
    title: &str,
    n: usize,
    input: &StateVector,
    stats: Statistics,
    zero: ZeroTest,
) -> blochjoint::Result<()> {
    let set = signature_set(n, input, stats, zero)?;
    println!("{title}");
    for e in &set.entries {
        println!(
            "  counts {:?}  p = {:.6}  {}",
            e.counts,
            e.probability,
            e.exact.clone().unwrap_or_default()
        );
    }
    Ok(())
}

fn main() -> blochjoint::Result<()> {
    let hh = FockState::from_blocks(&[1, 1], &[0, 0])?;
    let bunched = FockState::from_blocks(&[2, 0], &[0, 0])?;
    let split = FockState::from_blocks(&[1, 1], &[0, 0])?;
    println!(
        "|HH⟩ → |2H,0⟩ amplitude: {:.6}",
        transition_amplitude(2, &hh, &bunched, Statistics::Boson)?
    );
    println!(
        "|HH⟩ → |H,H⟩ amplitude:  {:.6}",
        transition_amplitude(2, &hh, &split, Statistics::Boson)?
    );

    // Triplet and singlet of the internal state.
    let hv = FockState::from_blocks(&[1, 0], &[0, 1])?;
    let vh = FockState::from_blocks(&[0, 1], &[1, 0])?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let triplet = StateVector::new(
        2,
        vec![
            (hv.clone(), Complex64::new(r, 0.0)),
            (vh.clone(), Complex64::new(r, 0.0)),
        ],
    )?;
    let singlet = StateVector::new(
        2,
        vec![(hv, Complex64::new(r, 0.0)), (vh, Complex64::new(-r, 0.0))],
    )?;
    for stats in [Statistics::Boson, Statistics::Fermion] {
        show(
            &format!("{stats}s, j = 1 (triplet)"),
            2,
            &triplet,
            stats,
            ZeroTest::float(),
        )?;
        show(
            &format!("{stats}s, j = 0 (singlet)"),
            2,
            &singlet,
            stats,
            ZeroTest::float(),
        )?;
    }

    println!();
    show(
        "tritter, τ₀ = |HHH⟩",
        3,
        &StateVector::basis(tau0_state(3)?),
        Statistics::Boson,
        ZeroTest::Exact,
    )?;
    show(
        "tritter, τ₁,₁ = |VHH⟩",
        3,
        &StateVector::basis(tau1_state(3, 0)?),
        Statistics::Boson,
        ZeroTest::Exact,
    )?;
    Ok(())
}
