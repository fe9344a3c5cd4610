//! Validated fraction across tolerance and voter settings on an honest
//! IID population.
//!
//! ```text
//! cargo run --release --example voting_sweep
//! ```

use idml::simulation::{voting_sweep, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = SimConfig::default();
    let cells = voting_sweep(&base, &[0.0, 0.03, 1.0], &[3, 5, 7])?;
    println!(
        "{:>6} {:>6} {:>10} {:>10}",
        "tau", "voters", "validated", "fraction"
    );
    for c in &cells {
        println!(
            "{:>6} {:>6} {:>10} {:>10.4}",
            c.tau, c.voters, c.validated_encounters, c.validated_fraction
        );
    }
    Ok(())
}
