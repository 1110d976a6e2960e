//! Local projective measurements on each qubit versus the collective J²
//! measurement, estimated by Monte Carlo.
//!
//! cargo run --release --example simulate_local

use blochjoint::simulate::{run, SampleConfig, Strategy};
use blochjoint::BlochState;

fn main() -> blochjoint::Result<()> {
    let state = BlochState::with_length(0.6, 0.4)?;
    for strategy in [Strategy::LocalEps, Strategy::LocalPhi, Strategy::J2Lphi] {
        let config =
            SampleConfig::new(state.clone(), 4, 100_000, 1, strategy).with_replicates(2000);
        let report = run(&config)?;
        for r in [report.epsilon, report.phi].into_iter().flatten() {
            println!(
                "{strategy:?} {:>7}: ν Δ² = {:.5} ± {:.5}, theory {:.5}, quantum bound {:.5}, clamped {}",
                r.parameter.to_string(),
                r.empirical_mse,
                r.stderr,
                r.theory_mse,
                r.crb,
                r.clamp_events
            );
        }
    }
    Ok(())
}
