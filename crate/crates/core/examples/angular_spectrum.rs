//! The distribution over total angular momentum j for N copies of a mixed
//! qubit, its multiplicities and how it concentrates as the state purifies.
//!
//! cargo run --example angular_spectrum

use blochjoint::angular::{fi_per_subspace, multiplicity, spectrum_exact, spectrum_expansion};
use blochjoint::{BlochState, Parametrization};

fn main() -> blochjoint::Result<()> {
    let n = 6;
    let state = BlochState::with_length(0.6, 0.0)?;
    let sp = spectrum_exact(&state, n)?;
    println!("N = {n}, s = 0.6");
    for e in &sp.entries {
        println!(
            "  j = {:>3}  μ = {:>2}  p = {:.12}",
            e.j.to_string(),
            e.mu,
            e.p
        );
    }
    println!(
        "  Σ p = {:.15}, Σ (2j+1) μ = {}",
        sp.total(),
        sp.dimension()
    );
    println!(
        "  μ for N = 20, j = 8: {}",
        multiplicity(20, blochjoint::HalfInt::from_int(8))?
    );

    println!();
    println!("nearly pure qubits, s = 1 − ε²/8, N = 4");
    for eps in [1e-2, 5e-3] {
        let st = BlochState::new(eps, 0.0, Parametrization::Quadratic)?;
        let exact = spectrum_exact(&st, 4)?;
        for e in &exact.entries {
            let approx = spectrum_expansion(eps, 4, e.j)?;
            println!(
                "  ε = {eps:.0e}  j = {}  exact {:.6e}  expansion {:.6e}",
                e.j, e.p, approx
            );
        }
    }

    println!();
    let fi = fi_per_subspace(1e-3, 8)?;
    println!("per-subspace Fisher information at ε = 1e−3, N = 8:");
    println!(
        "  top {:.8}, next {:.8}, truncated sum {:.8}",
        fi.top, fi.next, fi.truncated
    );
    Ok(())
}
