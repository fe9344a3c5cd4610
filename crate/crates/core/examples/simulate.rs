//! One simulation run with label-flip attackers and its metric files.
//!
//! ```text
//! cargo run --release --example simulate -- out/
//! ```

use idml::protocol::Behavior;
use idml::simulation::{run, AttackerCounts, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out".into());
    let cfg = SimConfig {
        n_rounds: 40,
        attackers: AttackerCounts::only(Behavior::LabelFlipAttacker, 5),
        ..SimConfig::default()
    };
    let metrics = run(&cfg)?;
    std::fs::create_dir_all(&out)?;
    metrics.write_csvs(out.as_ref())?;
    let s = metrics.summary();
    println!(
        "accuracy {:.3} -> {:.3} over {} rounds",
        s.initial_mean_accuracy, s.final_mean_accuracy, s.rounds
    );
    println!("cases {:?}, skipped {:?}", s.cases, s.skipped);
    println!("excluded at the end: {:?}", s.excluded_at_end);
    println!("gas spent {}", s.gas_total);
    Ok(())
}
