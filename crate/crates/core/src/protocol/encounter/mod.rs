use std::collections::BTreeSet;

use super::validation::{drive_validation, select_validators, ValidationRequest};
use super::{Algorithm, Behavior, Directory, ProtocolError, Result};
use crate::learning::{
    digest, merge, random_params_like, train, Dataset, ModelParams, TrainConfig,
};
use crate::ledger::{
    EncounterId, EncounterState, FinalizationOutcome, Ledger, ParticipantId, Tally, Tokens,
};
use crate::seed;

/// One side of an encounter.
#[derive(Debug, Clone, Copy)]
pub struct Peer<'a> {
    pub id: ParticipantId,
    pub model: &'a ModelParams,
    pub data: &'a Dataset,
    pub behavior: Behavior,
}

/// Injected failures.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Faults {
    /// The neighbor never reports completion.
    pub neighbor_drops: bool,
    /// Registered validators never vote.
    pub validators_silent: bool,
}

#[derive(Debug, Clone)]
pub struct EncounterConfig<'a> {
    pub reward: Tokens,
    pub tau: f64,
    /// Validators invited per encounter.
    pub validators_k: usize,
    /// The seed inside is replaced by one derived from `seed`.
    pub train: TrainConfig,
    /// Seeds validator selection, training and attacker payloads.
    pub seed: u64,
    pub faults: Faults,
    /// When set, honest validators evaluate here instead of on local data.
    pub shared_validation: Option<&'a Dataset>,
}

impl EncounterConfig<'_> {
    fn train_cfg(&self) -> TrainConfig {
        TrainConfig {
            seed: seed::derive(self.seed, "train", 0),
            ..self.train.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct EncounterResult {
    pub encounter_id: EncounterId,
    /// `Settlement::Incomplete` when the encounter never reached validation.
    pub finalization: FinalizationOutcome,
    pub learner_model_after: ModelParams,
    pub accepted: bool,
    pub validators: Vec<ParticipantId>,
    pub tally: Tally,
}

/// What the neighbor hands back in OppCL, or sends in gossip.
fn neighbor_payload(
    neighbor: &Peer<'_>,
    base: &ModelParams,
    cfg: &EncounterConfig<'_>,
    train_it: bool,
) -> Result<ModelParams> {
    Ok(match neighbor.behavior {
        Behavior::RandomModelAttacker => {
            random_params_like(base, seed::derive(cfg.seed, "attack", 0))
        }
        _ if train_it => train(base, neighbor.data, &cfg.train_cfg())?,
        _ => base.clone(),
    })
}

fn wait_out_deadline(ledger: &mut Ledger, id: EncounterId) {
    let deadline = ledger.encounter(id).map_or(0, |e| e.voting_deadline);
    let now = ledger.height();
    if now <= deadline {
        ledger.advance_block(deadline + 1 - now);
    }
}

/// Shared Steps 4 to 8 once the learning result exists.
///
/// Advances the ledger clock past the deadline when a timeout is the only
/// way to close the encounter.
#[allow(clippy::too_many_arguments)]
fn settle<D: Directory + ?Sized>(
    id: EncounterId,
    learner: &Peer<'_>,
    neighbor: &Peer<'_>,
    result: &ModelParams,
    accepted_model: impl FnOnce() -> Result<ModelParams>,
    req: ValidationRequest,
    directory: &D,
    ledger: &mut Ledger,
    cfg: &EncounterConfig<'_>,
) -> Result<EncounterResult> {
    let d = digest(result);
    let incomplete =
        |ledger: &mut Ledger, validators: Vec<ParticipantId>| -> Result<EncounterResult> {
            if ledger.encounter(id).map(|e| e.state) != Some(EncounterState::Incomplete) {
                wait_out_deadline(ledger, id);
            }
            let finalization = ledger.resolve_incomplete(id)?;
            Ok(EncounterResult {
                encounter_id: id,
                finalization,
                learner_model_after: learner.model.clone(),
                accepted: false,
                validators,
                tally: Tally::default(),
            })
        };

    if !cfg.faults.neighbor_drops {
        ledger.report_complete(id, neighbor.id, d)?;
    }
    let state = ledger.report_complete(id, learner.id, d)?;
    if state != EncounterState::CompleteReported {
        return incomplete(ledger, Vec::new());
    }

    let exclude: BTreeSet<ParticipantId> = [learner.id, neighbor.id].into();
    let validators = match select_validators(
        ledger,
        cfg.validators_k,
        &exclude,
        seed::derive(cfg.seed, "select", 0),
    ) {
        Ok(v) => v,
        Err(ProtocolError::InsufficientValidators { .. }) => return incomplete(ledger, Vec::new()),
        Err(e) => return Err(e),
    };
    ledger.register_validation(id, &validators)?;
    if !cfg.faults.validators_silent {
        drive_validation(
            id,
            &validators,
            directory,
            ledger,
            &req,
            cfg.shared_validation,
        )?;
    }
    if !ledger.can_finalize(id) {
        wait_out_deadline(ledger, id);
    }
    let finalization = ledger.finalize(id)?;
    let accepted = finalization.accepted();
    let learner_model_after = if accepted {
        accepted_model()?
    } else {
        req.old_model
    };
    Ok(EncounterResult {
        encounter_id: id,
        tally: crate::ledger::Tally {
            yes: finalization.n_v_t,
            no: finalization.n_v_f,
        },
        finalization,
        learner_model_after,
        accepted,
        validators,
    })
}

fn open(
    learner: &Peer<'_>,
    neighbor: &Peer<'_>,
    ledger: &mut Ledger,
    reward: Tokens,
) -> Result<EncounterId> {
    let id = ledger.open_encounter(learner.id, neighbor.id, reward)?;
    if !ledger.check_prepayment(id) {
        return Err(ProtocolError::Ledger(
            crate::ledger::LedgerError::PrepaymentFailed(id),
        ));
    }
    Ok(id)
}

/// Merge-update-send: the learner averages in the neighbor's model and
/// trains on its own data; validators compare the saved copy with the result.
pub fn gossip_encounter<D: Directory + ?Sized>(
    learner: Peer<'_>,
    neighbor: Peer<'_>,
    directory: &D,
    ledger: &mut Ledger,
    cfg: &EncounterConfig<'_>,
) -> Result<EncounterResult> {
    let id = open(&learner, &neighbor, ledger, cfg.reward)?;
    let old = learner.model.clone();
    let received = neighbor_payload(&neighbor, neighbor.model, cfg, false)?;
    let merged = merge(&old, &received)?;
    let new = train(&merged, learner.data, &cfg.train_cfg())?;
    let req = ValidationRequest {
        old_model: old,
        new_model: new.clone(),
        tolerance_tau: cfg.tau,
    };
    let result = new.clone();
    settle(
        id,
        &learner,
        &neighbor,
        &result,
        move || Ok(new),
        req,
        directory,
        ledger,
        cfg,
    )
}

/// Send-train-return-merge: the neighbor trains the learner's model on its
/// own data; the learner merges the returned model only if it is accepted.
pub fn oppcl_encounter<D: Directory + ?Sized>(
    learner: Peer<'_>,
    neighbor: Peer<'_>,
    directory: &D,
    ledger: &mut Ledger,
    cfg: &EncounterConfig<'_>,
) -> Result<EncounterResult> {
    let id = open(&learner, &neighbor, ledger, cfg.reward)?;
    let sent = learner.model.clone();
    let returned = neighbor_payload(&neighbor, &sent, cfg, true)?;
    let req = ValidationRequest {
        old_model: sent.clone(),
        new_model: returned.clone(),
        tolerance_tau: cfg.tau,
    };
    let keep = {
        let (sent, returned) = (sent.clone(), returned.clone());
        move || Ok(merge(&sent, &returned)?)
    };
    settle(
        id, &learner, &neighbor, &returned, keep, req, directory, ledger, cfg,
    )
}

pub fn run_encounter<D: Directory + ?Sized>(
    algorithm: Algorithm,
    learner: Peer<'_>,
    neighbor: Peer<'_>,
    directory: &D,
    ledger: &mut Ledger,
    cfg: &EncounterConfig<'_>,
) -> Result<EncounterResult> {
    match algorithm {
        Algorithm::Gossip => gossip_encounter(learner, neighbor, directory, ledger, cfg),
        Algorithm::Oppcl => oppcl_encounter(learner, neighbor, directory, ledger, cfg),
    }
}

/// The same learning step with no ledger, validation or penalties: the
/// learner always keeps the result.
pub fn learn_only(
    algorithm: Algorithm,
    learner: Peer<'_>,
    neighbor: Peer<'_>,
    cfg: &EncounterConfig<'_>,
) -> Result<ModelParams> {
    match algorithm {
        Algorithm::Gossip => {
            let received = neighbor_payload(&neighbor, neighbor.model, cfg, false)?;
            let merged = merge(learner.model, &received)?;
            Ok(train(&merged, learner.data, &cfg.train_cfg())?)
        }
        Algorithm::Oppcl => {
            let returned = neighbor_payload(&neighbor, learner.model, cfg, true)?;
            Ok(merge(learner.model, &returned)?)
        }
    }
}
