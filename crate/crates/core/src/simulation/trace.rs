use rand::seq::SliceRandom;
use serde::Serialize;

use crate::ledger::ParticipantId;
use crate::seed;

/// Rounds of disjoint `(learner, neighbor)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncounterTrace {
    pub rounds: Vec<Vec<(ParticipantId, ParticipantId)>>,
}

impl EncounterTrace {
    /// How often each of `0..n` appears in any pair.
    pub fn encounter_counts(&self, n: usize) -> Vec<usize> {
        let mut counts = vec![0; n];
        for (a, b) in self.rounds.iter().flatten() {
            counts[a.0 as usize] += 1;
            counts[b.0 as usize] += 1;
        }
        counts
    }
}

/// A seeded random perfect matching per round. With an odd population one
/// participant sits out each round, cycling through a seeded order so
/// encounter counts stay within one of each other.
pub fn generate_trace(n_participants: usize, n_rounds: usize, seed: u64) -> EncounterTrace {
    assert!(
        n_participants >= 2,
        "a trace needs at least two participants"
    );
    let mut sit_order: Vec<u32> = (0..n_participants as u32).collect();
    sit_order.shuffle(&mut seed::rng(seed::derive(seed, "sit-out", 0)));
    let rounds = (0..n_rounds)
        .map(|r| {
            let mut rng = seed::rng(seed::derive(seed, "round", r as u64));
            let sitter = (n_participants % 2 == 1).then(|| sit_order[r % n_participants]);
            let mut ids: Vec<u32> = (0..n_participants as u32)
                .filter(|&p| Some(p) != sitter)
                .collect();
            ids.shuffle(&mut rng);
            ids.chunks_exact(2)
                .map(|c| (ParticipantId(c[0]), ParticipantId(c[1])))
                .collect()
        })
        .collect();
    EncounterTrace { rounds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn fifty_participants_pair_up_every_round() {
        let t = generate_trace(50, 100, 1);
        assert_eq!(t.rounds.len(), 100);
        for round in &t.rounds {
            assert_eq!(round.len(), 25);
            let seen: HashSet<_> = round.iter().flat_map(|(a, b)| [*a, *b]).collect();
            assert_eq!(seen.len(), 50);
        }
        assert!(t.encounter_counts(50).iter().all(|&c| c == 100));
    }

    #[test]
    fn odd_population_rotates_sit_outs() {
        let t = generate_trace(3, 10, 4);
        assert!(t.rounds.iter().all(|r| r.len() == 1));
        let counts = t.encounter_counts(3);
        let (min, max) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        assert!(max - min <= 1, "{counts:?}");
    }

    #[test]
    fn trace_is_seeded() {
        assert_eq!(generate_trace(9, 20, 5), generate_trace(9, 20, 5));
        assert_ne!(generate_trace(9, 20, 5), generate_trace(9, 20, 6));
    }
}
