//! Plants random-model attackers and compares honest accuracy with and
//! without incentives.
//!
//! ```text
//! cargo run --release --example attack_recovery
//! ```

use idml::simulation::{attack_study, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = SimConfig::default();
    let counts = [0, 3, 10];
    for incentives in [false, true] {
        let t = std::time::Instant::now();
        let curves = attack_study(&base, &counts, incentives)?;
        println!(
            "incentives {}: {:.1?}",
            if incentives { "on" } else { "off" },
            t.elapsed()
        );
        for c in &curves {
            let r = &c.rounds;
            let at = |i: usize| r.get(i).map_or(f64::NAN, |s| s.mean);
            println!(
                "  {:>2} attackers  start {:.3}  r10 {:.3}  r30 {:.3}  final {:.3}",
                c.attackers,
                at(0),
                at(10),
                at(30),
                c.final_mean()
            );
            for (p, s) in &c.attacker_stakes {
                print!("    {p}:{s}");
            }
            if !c.attacker_stakes.is_empty() {
                println!();
            }
        }
    }
    Ok(())
}
