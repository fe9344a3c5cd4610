//! Walks one encounter through the contract: deposit, stake, prepay,
//! digest reports, votes and settlement.

use idml::ledger::{Digest, EncounterState};
use idml::{ContractConfig, Ledger, ParticipantId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut ledger = Ledger::new(ContractConfig::default())?;
    let [learner, neighbor, v1, v2, v3] = [0, 1, 2, 3, 4].map(ParticipantId);
    for p in [learner, neighbor, v1, v2, v3] {
        ledger.exchange_tokens(p, 1_000)?;
        ledger.stake(p, 200)?;
    }

    let id = ledger.open_encounter(learner, neighbor, 100)?;
    println!(
        "opened {id}, escrow {}",
        ledger.encounter(id).unwrap().escrow
    );

    let digest = Digest(*b"trained-model-01");
    ledger.report_complete(id, neighbor, digest)?;
    let state = ledger.report_complete(id, learner, digest)?;
    assert_eq!(state, EncounterState::CompleteReported);

    ledger.register_validation(id, &[v1, v2, v3])?;
    for (v, verdict) in [(v1, true), (v2, true), (v3, false)] {
        let tally = ledger.cast_vote(id, v, verdict)?;
        println!("{v} votes {verdict}: {} yes / {} no", tally.yes, tally.no);
    }

    let out = ledger.finalize(id)?;
    println!(
        "{:?}: neighbor {:+}, yes voters {:+} each, no voter {:+}, treasury {}",
        out.settlement,
        out.net_for(neighbor),
        out.net_for(v1),
        out.net_for(v3),
        out.remainder_to_treasury
    );
    for p in [learner, neighbor, v1, v2, v3] {
        let a = ledger.account(p).unwrap();
        println!(
            "{p}: balance {} staked {} excluded {}",
            a.balance, a.staked, a.excluded
        );
    }
    for h in ledger.query_history(neighbor) {
        println!(
            "history of {neighbor}: {:?} as {:?} -> {:?}",
            h.encounter, h.role, h.outcome
        );
    }
    Ok(())
}
