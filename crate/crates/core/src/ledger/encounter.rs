use std::fmt;

use serde::{Deserialize, Serialize};

use super::account::ParticipantId;
use super::config::{Block, Tokens};
use super::settlement::CaseLabel;

/// Encounter identifier, assigned sequentially by the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EncounterId(pub u64);

impl fmt::Display for EncounterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 128-bit model digest.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Digest(pub [u8; 16]);

impl Digest {
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncounterState {
    Opened,
    Prepaid,
    CompleteReported,
    Incomplete,
    Validating,
    Finalized,
    Aborted,
}

impl EncounterState {
    pub fn as_str(self) -> &'static str {
        match self {
            EncounterState::Opened => "Opened",
            EncounterState::Prepaid => "Prepaid",
            EncounterState::CompleteReported => "CompleteReported",
            EncounterState::Incomplete => "Incomplete",
            EncounterState::Validating => "Validating",
            EncounterState::Finalized => "Finalized",
            EncounterState::Aborted => "Aborted",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, EncounterState::Finalized | EncounterState::Aborted)
    }
}

impl fmt::Display for EncounterState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Learner,
    Neighbor,
    Validator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vote {
    pub validator: ParticipantId,
    /// `true` when the validator judged the contribution reasonable.
    pub verdict: bool,
}

/// Running `(yes, no)` vote counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub yes: u32,
    pub no: u32,
}

impl Tally {
    pub fn total(&self) -> u32 {
        self.yes + self.no
    }
}

/// Lifecycle record of one learning encounter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncounterRecord {
    pub id: EncounterId,
    pub learner: ParticipantId,
    pub neighbor: ParticipantId,
    pub reward: Tokens,
    pub state: EncounterState,
    /// Tokens currently held for this encounter.
    pub escrow: Tokens,
    pub digest_from_learner: Option<Digest>,
    pub digest_from_neighbor: Option<Digest>,
    /// Registered validator set, fixed when validation starts.
    pub validators: Vec<ParticipantId>,
    pub votes: Vec<Vote>,
    pub opened_block: Block,
    pub voting_deadline: Block,
}

impl EncounterRecord {
    pub fn tally(&self) -> Tally {
        let yes = self.votes.iter().filter(|v| v.verdict).count() as u32;
        Tally {
            yes,
            no: self.votes.len() as u32 - yes,
        }
    }

    pub fn role_of(&self, p: ParticipantId) -> Option<Role> {
        if p == self.learner {
            Some(Role::Learner)
        } else if p == self.neighbor {
            Some(Role::Neighbor)
        } else if self.validators.contains(&p) {
            Some(Role::Validator)
        } else {
            None
        }
    }

    /// Index key for a validator's copy of the result.
    pub fn validation_key(&self, validator: ParticipantId) -> Option<(Digest, ParticipantId)> {
        let d = self.digest_from_learner?;
        self.validators
            .contains(&validator)
            .then_some((d, validator))
    }
}

/// How an encounter ended, from one participant's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Finalized(CaseLabel),
    Incomplete,
    Aborted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub encounter: EncounterId,
    pub role: Role,
    pub outcome: Outcome,
    pub block: Block,
}
