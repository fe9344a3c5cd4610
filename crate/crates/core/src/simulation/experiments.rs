use serde::Serialize;

use super::metrics::RoundStats;
use super::{run, AttackerCounts, SimConfig, SimError};
use crate::ledger::ParticipantId;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub tau: f64,
    pub voters: usize,
    pub validated_fraction: f64,
    pub validated_encounters: usize,
}

/// Validated fraction for every `(tau, voters)` pair, sorted by tau then voters.
///
/// Each cell invites `voters` validators and also waits for all of their votes.
pub fn voting_sweep(
    base: &SimConfig,
    taus: &[f64],
    voter_counts: &[usize],
) -> Result<Vec<SweepCell>, SimError> {
    if base.attackers.total() > 0 {
        return Err(SimError::Config {
            field: "attackers".into(),
            msg: "voting sweeps run on an honest population".into(),
        });
    }
    let mut taus = taus.to_vec();
    taus.sort_by(f64::total_cmp);
    let mut voters = voter_counts.to_vec();
    voters.sort_unstable();
    let mut cells = Vec::new();
    for &tau in &taus {
        for &k in &voters {
            let mut cfg = base.clone();
            cfg.tau = tau;
            cfg.validators_k = k;
            cfg.contract.voting_threshold = k as u32;
            cfg.incentives = true;
            let m = run(&cfg)?;
            let s = m.summary();
            cells.push(SweepCell {
                tau,
                voters: k,
                validated_fraction: s.validated_fraction.unwrap_or(0.0),
                validated_encounters: s.validated_encounters,
            });
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackCurve {
    pub attackers: usize,
    pub incentives: bool,
    pub rounds: Vec<RoundStats>,
    /// Final stake of each attacker.
    pub attacker_stakes: Vec<(ParticipantId, u64)>,
    /// Per-round blocks and staked amounts, one series per attacker.
    pub attacker_stake_series: Vec<(ParticipantId, Vec<(u64, u64)>)>,
}

impl AttackCurve {
    pub fn final_mean(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.mean)
    }
}

/// Honest accuracy curves for each attacker count, using `base.attack_kind`.
pub fn attack_study(
    base: &SimConfig,
    attacker_counts: &[usize],
    with_incentives: bool,
) -> Result<Vec<AttackCurve>, SimError> {
    attacker_counts
        .iter()
        .map(|&n| {
            if n >= base.n_participants {
                return Err(SimError::Config {
                    field: "attackers".into(),
                    msg: format!("{n} attackers leave no honest participant"),
                });
            }
            let mut cfg = base.clone();
            cfg.attackers = AttackerCounts::only(base.attack_kind, n);
            cfg.incentives = with_incentives;
            let m = run(&cfg)?;
            let attackers: Vec<ParticipantId> = m.attackers().into_iter().map(|(p, _)| p).collect();
            Ok(AttackCurve {
                attackers: n,
                incentives: with_incentives,
                rounds: m.round_stats.clone(),
                attacker_stakes: attackers
                    .iter()
                    .map(|&p| (p, m.final_stake(p).unwrap_or(0)))
                    .collect(),
                attacker_stake_series: attackers.iter().map(|&p| (p, m.stake_series(p))).collect(),
            })
        })
        .collect()
}
