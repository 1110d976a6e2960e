//! Closed-form quantum Fisher information against the numerical SLD, and the
//! two compatibility conditions for joint estimation of ε and φ.
//!
//! cargo run --example qfi_compatibility

use blochjoint::metrology::{qfi_closed_form, sld_orthogonality};
use blochjoint::states::{
    build_density, collective_spin, density_derivative, sld_closed_form, sld_numeric,
};
use blochjoint::{BlochState, Parameter};

fn main() -> blochjoint::Result<()> {
    let state = BlochState::with_length(0.6, 0.7)?;
    println!(
        "{:>2} {:>8} {:>14} {:>14} {:>10}",
        "N", "param", "closed form", "numeric", "rel diff"
    );
    for n in 1..=5 {
        let rho = build_density(&state, n)?;
        for which in [Parameter::Epsilon, Parameter::Phi] {
            let exact = qfi_closed_form(&state, n, which)?.value;
            let l = sld_numeric(&rho, &density_derivative(&state, n, which)?)?;
            let numeric = rho.expectation(&(l.matrix() * l.matrix())).re;
            println!(
                "{n:>2} {which:>8} {exact:>14.10} {numeric:>14.10} {:>10.2e}",
                (numeric - exact).abs() / exact
            );
        }
    }

    let n = 4;
    let rho = build_density(&state, n)?;
    let l_phi = sld_closed_form(&state, n, Parameter::Phi)?;
    let jsq = collective_spin(n)?.jsq;
    let commutator = jsq.matrix() * l_phi.matrix() - l_phi.matrix() * jsq.matrix();
    println!();
    println!(
        "N = {n}: |tr(ρ L_ε L_φ)| = {:.2e}",
        sld_orthogonality(&state, n)?
    );
    println!(
        "N = {n}: max |[J², L_φ]| = {:.2e}",
        commutator.iter().map(|z| z.norm()).fold(0.0, f64::max)
    );
    println!("trace of ρ = {:.12}", rho.trace().re);
    Ok(())
}
