//! Signature sets of the symmetric and single-flip inputs for N = 2..8 and
//! whether they separate the top two angular-momentum subspaces.
//!
//! cargo run --example bell_multiport_conjecture

use std::time::Instant;

use blochjoint::multiport::{conjecture_check, ConjectureMode, Statistics};

fn main() -> blochjoint::Result<()> {
    for n in 2..=8 {
        let mode = if n <= 6 {
            ConjectureMode::Full
        } else {
            ConjectureMode::TauOnly
        };
        let t = Instant::now();
        let r = conjecture_check(n, Statistics::Boson, mode, false)?;
        let masses: Vec<String> = r
            .overlap
            .iter()
            .map(|o| o.exact.clone().unwrap_or(format!("{:.6}", o.probability)))
            .collect();
        println!(
            "N = {n} ({mode:?}): {} | |S0| = {}, |S1\\S0| = {}, eigenkets checked {}, mass in S0 {} ({:.2?})",
            if r.passed { "PASS" } else { "FAIL" },
            r.s0.len(),
            r.s1_minus_s0.len(),
            r.eigen.len(),
            masses.first().map(String::as_str).unwrap_or("-"),
            t.elapsed()
        );
        for f in &r.failures {
            println!("  {f}");
        }
    }
    Ok(())
}
