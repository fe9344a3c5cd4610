use std::collections::BTreeSet;

use rand::seq::index;

use super::{Behavior, Directory, ProtocolError, Result};
use crate::learning::{evaluate, Dataset, LearningError, ModelParams};
use crate::ledger::{EncounterId, Ledger, ParticipantId, Tally};
use crate::seed;

/// The learner's model before and after the neighbor's contribution.
#[derive(Debug, Clone)]
pub struct ValidationRequest {
    pub old_model: ModelParams,
    pub new_model: ModelParams,
    pub tolerance_tau: f64,
}

/// Valid when the new model is at most `tau` less accurate than the old
/// one on `data`. The boundary counts as valid.
pub fn validate(req: &ValidationRequest, data: &Dataset) -> Result<bool> {
    if !(req.tolerance_tau.is_finite() && req.tolerance_tau >= 0.0) {
        return Err(ProtocolError::InvalidTolerance(req.tolerance_tau));
    }
    if req.old_model.arch() != req.new_model.arch() {
        return Err(LearningError::ArchMismatch(
            req.old_model.arch().clone(),
            req.new_model.arch().clone(),
        )
        .into());
    }
    let old = evaluate(&req.old_model, data)?;
    let new = evaluate(&req.new_model, data)?;
    Ok(accepts(
        old.correct,
        new.correct,
        data.len(),
        req.tolerance_tau,
    ))
}

/// `new/n >= old/n - tau`, compared in counts so that exact boundaries hold.
fn accepts(old_correct: usize, new_correct: usize, n: usize, tau: f64) -> bool {
    let slack = tau * n as f64;
    let drop = old_correct as f64 - new_correct as f64;
    // One ulp-scale allowance keeps e.g. 0.70 - 0.03 = 0.67 on the valid side.
    drop <= slack + slack.abs() * 1e-12
}

/// Picks `k` distinct eligible participants outside `exclude`, uniformly
/// without replacement.
pub fn select_validators(
    ledger: &Ledger,
    k: usize,
    exclude: &BTreeSet<ParticipantId>,
    seed: u64,
) -> Result<Vec<ParticipantId>> {
    let candidates: Vec<ParticipantId> =
        ledger.eligible().filter(|p| !exclude.contains(p)).collect();
    if candidates.len() < k {
        return Err(ProtocolError::InsufficientValidators {
            needed: k,
            available: candidates.len(),
        });
    }
    let mut rng = seed::rng(seed);
    Ok(index::sample(&mut rng, candidates.len(), k)
        .into_iter()
        .map(|i| candidates[i])
        .collect())
}

/// Collects verdicts and casts them until the ledger is ready to finalize.
///
/// Honest validators run [`validate`] on their local data, or on `shared`
/// when given; everyone else approves unconditionally.
pub fn drive_validation<D: Directory + ?Sized>(
    encounter: EncounterId,
    validators: &[ParticipantId],
    directory: &D,
    ledger: &mut Ledger,
    req: &ValidationRequest,
    shared: Option<&Dataset>,
) -> Result<Tally> {
    let mut tally = Tally::default();
    for &v in validators {
        if ledger.can_finalize(encounter) {
            break;
        }
        let behavior = directory.behavior(v).ok_or(ProtocolError::UnknownPeer(v))?;
        let verdict = if behavior == Behavior::Honest {
            let data = match shared {
                Some(d) => d,
                None => directory
                    .local_data(v)
                    .ok_or(ProtocolError::UnknownPeer(v))?,
            };
            validate(req, data)?
        } else {
            debug_assert!(behavior.votes_unconditionally());
            true
        };
        tally = ledger.cast_vote(encounter, v, verdict)?;
    }
    Ok(tally)
}
