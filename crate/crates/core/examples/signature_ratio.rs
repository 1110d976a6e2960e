//! |S₁| / |S| for bosons: the fraction of all port signatures reachable from
//! a single-flip input. Pass a port count to go beyond the default range,
//! e.g. `cargo run --release --example signature_ratio -- 10`.

use blochjoint::multiport::{signature_ratio, RatioOptions};

fn main() -> blochjoint::Result<()> {
    let extra: Option<usize> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let ns: Vec<usize> = match extra {
        Some(n) => vec![n],
        None => (2..=8).collect(),
    };
    for n in ns {
        let r = signature_ratio(
            n,
            &RatioOptions {
                long: n > 8,
                ..Default::default()
            },
        )?;
        println!(
            "N = {n:>2}: {:>9} = {:<17} missing {}",
            r.unreduced,
            r.reduced,
            r.missing.len()
        );
        if n == 6 {
            for m in &r.missing {
                println!("         unreachable {m:?}");
            }
        }
    }
    Ok(())
}
