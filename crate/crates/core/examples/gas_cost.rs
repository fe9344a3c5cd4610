//! Gas estimate for one encounter as the number of votes grows.

use idml::cli::render_cost;
use idml::ledger::gas::{gas_breakdown, gas_total_per_encounter};

fn main() {
    print!(
        "{}",
        render_cost(&gas_breakdown(1), gas_total_per_encounter(1))
    );
    println!();
    for votes in [0, 3, 5, 7] {
        println!("{votes} votes: {}", gas_total_per_encounter(votes));
    }
}
