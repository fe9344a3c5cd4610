//! Settlement table for a 100-token reward across vote splits.

use idml::ledger::settlement::{nominal, plan};
use idml::Share;

fn main() {
    let share = Share::from_ppm(800_000).unwrap();
    println!(
        "{:>3} {:>3} {:<6} {:>5} {:>6} {:>6} {:>8}",
        "yes", "no", "case", "r_n", "r_v_t", "r_v_f", "treasury"
    );
    for (yes, no) in [(0, 0), (3, 0), (0, 3), (2, 1), (1, 2), (2, 2)] {
        let n = nominal(100, share, yes, no);
        let p = plan(
            100,
            &n,
            200,
            &vec![200; yes as usize],
            &vec![200; no as usize],
        );
        println!(
            "{yes:>3} {no:>3} {:<6} {:>5} {:>6} {:>6} {:>8}",
            n.case.as_str(),
            n.r_n,
            n.r_v_t,
            n.r_v_f,
            p.treasury
        );
    }

    // A slash larger than the stake is capped and the pool shrinks.
    let n = nominal(100, share, 0, 2);
    let p = plan(100, &n, 30, &[], &[200, 200]);
    println!(
        "neighbor with 30 staked: slashed {}, each no voter gets {}, shortfall {}",
        p.neighbor_slash, p.no_credit_each, p.shortfall
    );
}
