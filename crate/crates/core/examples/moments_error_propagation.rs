//! Moments of J² and the precision of the estimator that inverts ⟨J²⟩,
//! compared with the quantum bound as N grows.
//!
//! cargo run --example moments_error_propagation

use blochjoint::metrology::{asymptotic_gap, j2_error_propagation, j2_moments, qfi_closed_form};
use blochjoint::{BlochState, Parameter};

fn main() -> blochjoint::Result<()> {
    let state = BlochState::with_length(0.6, 0.0)?;
    let m = j2_moments(&state, 2)?;
    println!(
        "N = 2, s = 0.6: ⟨J²⟩ = {:.6}, Var J² = {:.6}",
        m.mean_j2, m.variance
    );
    println!("ν Δ²ε̂ = {:.6}", j2_error_propagation(&state, 2)?);
    println!();
    println!(
        "{:>5} {:>14} {:>14} {:>10} {:>12}",
        "N", "ν Δ²ε̂", "1/F_ε", "ratio", "N² gap"
    );
    for n in [2, 5, 10, 50, 100, 200, 1000] {
        let mse = j2_error_propagation(&state, n)?;
        let bound = 1.0 / qfi_closed_form(&state, n, Parameter::Epsilon)?.value;
        println!(
            "{n:>5} {mse:>14.8} {bound:>14.8} {:>10.6} {:>12.6}",
            mse / bound,
            asymptotic_gap(&state, n)?
        );
    }
    Ok(())
}
