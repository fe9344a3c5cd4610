//! Encounter choreographies that bind a learning algorithm to the ledger.
//!
//! Gossip merges the neighbor's model into a saved copy of the learner's
//! model, trains locally and asks validators to compare old against new.
//! OppCL sends the learner's model to the neighbor for training and only
//! merges the returned model once the encounter is accepted.

mod encounter;
mod validation;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learning::{Dataset, LearningError};
use crate::ledger::{LedgerError, ParticipantId};

pub use encounter::{
    gossip_encounter, learn_only, oppcl_encounter, run_encounter, EncounterConfig, EncounterResult,
    Faults, Peer,
};
pub use validation::{drive_validation, select_validators, validate, ValidationRequest};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Learning(#[from] LearningError),
    #[error("need {needed} eligible validators, only {available} available")]
    InsufficientValidators { needed: usize, available: usize },
    #[error("tolerance must be a non-negative number, got {0}")]
    InvalidTolerance(f64),
    #[error("participant {0} is not known to the directory")]
    UnknownPeer(ParticipantId),
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gossip,
    Oppcl,
}

/// How a participant behaves, fixed for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Behavior {
    Honest,
    /// Trains on a label-flipped copy of its data.
    LabelFlipAttacker,
    /// Returns random weights instead of training.
    RandomModelAttacker,
    /// Always votes that the contribution is valid.
    MaliciousPositiveValidator,
}

impl Behavior {
    pub fn is_honest(self) -> bool {
        self == Behavior::Honest
    }

    /// Non-honest participants approve every contribution they validate.
    pub fn votes_unconditionally(self) -> bool {
        !self.is_honest()
    }
}

/// Validator-side lookup of local data and behavior.
pub trait Directory {
    fn local_data(&self, p: ParticipantId) -> Option<&Dataset>;
    fn behavior(&self, p: ParticipantId) -> Option<Behavior>;
}
