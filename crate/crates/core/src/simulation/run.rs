use super::metrics::{AccuracyRow, EncounterRow, MetricsSink, RoundStats, StakeRow, VoteRow};
use super::population::{build_population, Population};
use super::trace::generate_trace;
use super::{SimConfig, SimError};
use crate::learning::evaluate;
use crate::ledger::{Ledger, ParticipantId};
use crate::protocol::{learn_only, run_encounter, EncounterConfig, Faults, Peer, ProtocolError};
use crate::seed;

fn peer(pop: &Population, p: ParticipantId) -> Peer<'_> {
    let x = &pop.participants[p.0 as usize];
    Peer {
        id: x.id,
        model: &x.model,
        data: &x.dataset,
        behavior: x.behavior,
    }
}

fn record_round(round: usize, pop: &Population, metrics: &mut MetricsSink) -> Result<(), SimError> {
    let mut honest = Vec::new();
    for p in &pop.participants {
        let acc = evaluate(&p.model, &pop.test)?.accuracy;
        metrics.accuracy.push(AccuracyRow {
            round,
            participant_id: p.id,
            accuracy: acc,
        });
        if p.behavior.is_honest() {
            honest.push(acc);
        }
    }
    let (min, max, sum) = honest.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, 0.0),
        |(lo, hi, s), &a| (lo.min(a), hi.max(a), s + a),
    );
    let mean = if honest.is_empty() {
        0.0
    } else {
        sum / honest.len() as f64
    };
    metrics.round_stats.push(RoundStats {
        round,
        mean,
        min,
        max,
    });
    Ok(())
}

fn record_stakes(ledger: &Ledger, metrics: &mut MetricsSink) {
    let block = ledger.height();
    metrics.stakes.extend(ledger.accounts().map(|a| StakeRow {
        block,
        participant_id: a.participant,
        staked: a.staked,
    }));
}

/// Builds the population, replays a fresh trace and records metrics.
pub fn run(cfg: &SimConfig) -> Result<MetricsSink, SimError> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let mut pop = build_population(&cfg)?;
    let trace = generate_trace(
        cfg.n_participants,
        cfg.n_rounds,
        seed::derive(cfg.master_seed, "trace", 0),
    );
    let mut ledger = Ledger::new(cfg.contract.clone())?;
    for p in &pop.participants {
        ledger.exchange_tokens(p.id, cfg.contract.initial_exchange)?;
        ledger.stake(p.id, cfg.contract.initial_stake)?;
    }
    if cfg.incentives && ledger.eligible().count() < cfg.validators_k + 2 {
        return Err(SimError::Config {
            field: "validators_k".into(),
            msg: "not enough eligible participants to validate any encounter".into(),
        });
    }

    let mut metrics = MetricsSink {
        behaviors: pop.participants.iter().map(|p| p.behavior).collect(),
        stake_threshold: cfg.contract.stake_threshold,
        ..MetricsSink::default()
    };
    record_round(0, &pop, &mut metrics)?;
    record_stakes(&ledger, &mut metrics);

    let shared = cfg.shared_validation.then_some(pop.validation.clone());
    let mut encounter_index = 0u64;
    for (r, pairs) in trace.rounds.iter().enumerate() {
        for &(learner, neighbor) in pairs {
            let enc_cfg = EncounterConfig {
                reward: cfg.contract.default_reward,
                tau: cfg.tau,
                validators_k: cfg.validators_k,
                train: cfg.train.clone(),
                seed: seed::derive(cfg.master_seed, "encounter", encounter_index),
                faults: Faults::default(),
                shared_validation: shared.as_ref(),
            };
            encounter_index += 1;

            if !cfg.incentives {
                let model = learn_only(
                    cfg.algorithm,
                    peer(&pop, learner),
                    peer(&pop, neighbor),
                    &enc_cfg,
                )?;
                pop.participants[learner.0 as usize].model = model;
                continue;
            }

            if !ledger.is_eligible(learner) || !ledger.is_eligible(neighbor) {
                metrics.skipped.excluded += 1;
                continue;
            }
            if ledger.account(learner).map_or(0, |a| a.balance) < enc_cfg.reward {
                metrics.skipped.cannot_prepay += 1;
                continue;
            }
            let candidates = ledger
                .eligible()
                .filter(|&p| p != learner && p != neighbor)
                .count();
            if candidates < cfg.validators_k {
                metrics.skipped.no_validators += 1;
                continue;
            }

            let result = match run_encounter(
                cfg.algorithm,
                peer(&pop, learner),
                peer(&pop, neighbor),
                &pop,
                &mut ledger,
                &enc_cfg,
            ) {
                Ok(res) => res,
                Err(ProtocolError::Ledger(_)) => {
                    metrics.skipped.cannot_prepay += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let id = result.encounter_id;
            if let Some(rec) = ledger.encounter(id) {
                metrics.votes.extend(rec.votes.iter().map(|v| VoteRow {
                    encounter_id: id,
                    validator_id: v.validator,
                    verdict: v.verdict,
                }));
            }
            metrics.encounters.push(EncounterRow {
                round: r + 1,
                encounter_id: id,
                learner,
                neighbor,
                settlement: result.finalization.settlement,
                yes: result.tally.yes,
                no: result.tally.no,
                accepted: result.accepted,
            });
            pop.participants[learner.0 as usize].model = result.learner_model_after;
        }
        ledger.advance_block(cfg.blocks_per_round);
        record_round(r + 1, &pop, &mut metrics)?;
        record_stakes(&ledger, &mut metrics);
    }

    metrics.honest_below_threshold = pop
        .honest()
        .filter(|p| {
            ledger
                .account(p.id)
                .is_some_and(|a| a.staked < cfg.contract.stake_threshold)
        })
        .map(|p| p.id)
        .collect();
    metrics.events = ledger.events().to_vec();
    Ok(metrics)
}
