use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::ledger::gas;
use crate::ledger::{
    write_csv, CaseLabel, EncounterId, EventKind, LedgerEvent, ParticipantId, Settlement,
};
use crate::protocol::Behavior;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyRow {
    pub round: usize,
    pub participant_id: ParticipantId,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StakeRow {
    pub block: u64,
    pub participant_id: ParticipantId,
    pub staked: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncounterRow {
    pub round: usize,
    pub encounter_id: EncounterId,
    pub learner: ParticipantId,
    pub neighbor: ParticipantId,
    pub settlement: Settlement,
    pub yes: u32,
    pub no: u32,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VoteRow {
    pub encounter_id: EncounterId,
    pub validator_id: ParticipantId,
    pub verdict: bool,
}

/// Accuracy over honest participants after a round (round 0 is the start).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundStats {
    pub round: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SkipCounts {
    pub excluded: usize,
    pub cannot_prepay: usize,
    pub no_validators: usize,
}

/// Everything a run records.
#[derive(Debug, Clone, Default)]
pub struct MetricsSink {
    pub behaviors: Vec<Behavior>,
    pub accuracy: Vec<AccuracyRow>,
    pub stakes: Vec<StakeRow>,
    pub encounters: Vec<EncounterRow>,
    pub votes: Vec<VoteRow>,
    pub round_stats: Vec<RoundStats>,
    pub events: Vec<LedgerEvent>,
    pub skipped: SkipCounts,
    /// Honest participants whose stake fell below the threshold.
    pub honest_below_threshold: Vec<ParticipantId>,
    pub stake_threshold: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub rounds: usize,
    pub initial_mean_accuracy: f64,
    pub final_mean_accuracy: f64,
    pub final_min_accuracy: f64,
    pub final_max_accuracy: f64,
    pub encounters: usize,
    pub validated_encounters: usize,
    pub accepted_encounters: usize,
    pub validated_fraction: Option<f64>,
    pub cases: BTreeMap<String, usize>,
    pub skipped: SkipCounts,
    pub gas_total: u64,
    pub attackers: Vec<(ParticipantId, Behavior)>,
    pub excluded_at_end: Vec<ParticipantId>,
    pub honest_below_threshold: Vec<ParticipantId>,
}

impl MetricsSink {
    /// Fraction of validated encounters that ended in Case 1, 2 or 4.
    pub fn validated_fraction(&self) -> Option<f64> {
        let validated: Vec<_> = self
            .encounters
            .iter()
            .filter(|e| matches!(e.settlement, Settlement::Case(_)))
            .collect();
        if validated.is_empty() {
            return None;
        }
        Some(validated.iter().filter(|e| e.accepted).count() as f64 / validated.len() as f64)
    }

    pub fn final_stats(&self) -> Option<RoundStats> {
        self.round_stats.last().copied()
    }

    /// Staked series of one participant, in block order.
    pub fn stake_series(&self, p: ParticipantId) -> Vec<(u64, u64)> {
        self.stakes
            .iter()
            .filter(|r| r.participant_id == p)
            .map(|r| (r.block, r.staked))
            .collect()
    }

    pub fn final_stake(&self, p: ParticipantId) -> Option<u64> {
        self.stake_series(p).last().map(|&(_, s)| s)
    }

    pub fn attackers(&self) -> Vec<(ParticipantId, Behavior)> {
        self.behaviors
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.is_honest())
            .map(|(i, &b)| (ParticipantId(i as u32), b))
            .collect()
    }

    /// Gas for every billed contract call in the event log.
    pub fn gas_total(&self) -> u64 {
        let neighbors: BTreeMap<EncounterId, ParticipantId> = self
            .encounters
            .iter()
            .map(|e| (e.encounter_id, e.neighbor))
            .collect();
        self.events
            .iter()
            .map(|e| match e.kind {
                EventKind::Open => gas::PRE_TRAINING_CHECK_LEARNER,
                EventKind::Report => {
                    let by_neighbor = e
                        .encounter
                        .and_then(|id| neighbors.get(&id))
                        .is_some_and(|&n| Some(n) == e.actor);
                    if by_neighbor {
                        gas::LEARNING_COMPLETE_NEIGHBOR
                    } else {
                        gas::LEARNING_COMPLETE_LEARNER
                    }
                }
                EventKind::Vote => gas::VOTE_VALIDATOR,
                EventKind::Finalize | EventKind::Incomplete => gas::RESULT_CHECK_AND_DISTRIBUTE,
                _ => 0,
            })
            .sum()
    }

    pub fn summary(&self) -> Summary {
        let first = self.round_stats.first();
        let last = self.round_stats.last();
        let mut cases = BTreeMap::new();
        for e in &self.encounters {
            let key = match e.settlement {
                Settlement::Case(c) => c.as_str(),
                Settlement::Incomplete => "Incomplete",
            };
            *cases.entry(key.to_string()).or_insert(0) += 1;
        }
        let validated = self
            .encounters
            .iter()
            .filter(|e| matches!(e.settlement, Settlement::Case(_)))
            .count();
        let final_block = self.stakes.last().map_or(0, |r| r.block);
        let excluded_at_end = self
            .stakes
            .iter()
            .filter(|r| r.block == final_block && r.staked < self.stake_threshold)
            .map(|r| r.participant_id)
            .collect();
        Summary {
            rounds: self.round_stats.len().saturating_sub(1),
            initial_mean_accuracy: first.map_or(0.0, |s| s.mean),
            final_mean_accuracy: last.map_or(0.0, |s| s.mean),
            final_min_accuracy: last.map_or(0.0, |s| s.min),
            final_max_accuracy: last.map_or(0.0, |s| s.max),
            encounters: self.encounters.len(),
            validated_encounters: validated,
            accepted_encounters: self.encounters.iter().filter(|e| e.accepted).count(),
            validated_fraction: self.validated_fraction(),
            cases,
            skipped: self.skipped.clone(),
            gas_total: self.gas_total(),
            attackers: self.attackers(),
            excluded_at_end,
            honest_below_threshold: self.honest_below_threshold.clone(),
        }
    }

    pub fn case_of(&self, id: EncounterId) -> Option<CaseLabel> {
        self.encounters
            .iter()
            .find(|e| e.encounter_id == id)
            .and_then(|e| match e.settlement {
                Settlement::Case(c) => Some(c),
                Settlement::Incomplete => None,
            })
    }

    /// Writes `accuracy.csv`, `stakes.csv`, `encounters.csv` and `votes.csv`.
    pub fn write_csvs(&self, dir: &Path) -> io::Result<()> {
        let to_io = |e: csv::Error| io::Error::other(e);
        let mut w = csv::Writer::from_path(dir.join("accuracy.csv")).map_err(to_io)?;
        w.write_record(["round", "participant_id", "accuracy"])
            .map_err(to_io)?;
        for r in &self.accuracy {
            w.write_record([
                r.round.to_string(),
                r.participant_id.to_string(),
                r.accuracy.to_string(),
            ])
            .map_err(to_io)?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("stakes.csv")).map_err(to_io)?;
        w.write_record(["block", "participant_id", "staked"])
            .map_err(to_io)?;
        for r in &self.stakes {
            w.write_record([
                r.block.to_string(),
                r.participant_id.to_string(),
                r.staked.to_string(),
            ])
            .map_err(to_io)?;
        }
        w.flush()?;

        let f = std::fs::File::create(dir.join("encounters.csv"))?;
        write_csv(&self.events, io::BufWriter::new(f)).map_err(to_io)?;

        let mut w = csv::Writer::from_path(dir.join("votes.csv")).map_err(to_io)?;
        w.write_record(["encounter_id", "validator_id", "verdict"])
            .map_err(to_io)?;
        for r in &self.votes {
            w.write_record([
                r.encounter_id.to_string(),
                r.validator_id.to_string(),
                r.verdict.to_string(),
            ])
            .map_err(to_io)?;
        }
        w.flush()?;
        Ok(())
    }
}
