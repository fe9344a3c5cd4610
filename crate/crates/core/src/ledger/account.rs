use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::Tokens;

/// Participant identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParticipantId(pub u32);

impl fmt::Display for ParticipantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Token state of one participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Account {
    pub participant: ParticipantId,
    /// Free tokens.
    pub balance: Tokens,
    /// Locked tokens, the pool slashes are taken from.
    pub staked: Tokens,
    /// Set once a participant that has staked falls below the threshold.
    pub excluded: bool,
    #[serde(skip)]
    pub(crate) has_staked: bool,
}

impl Account {
    pub(crate) fn new(participant: ParticipantId) -> Self {
        Self {
            participant,
            balance: 0,
            staked: 0,
            excluded: false,
            has_staked: false,
        }
    }

    pub(crate) fn refresh_exclusion(&mut self, threshold: Tokens) {
        self.excluded = self.has_staked && self.staked < threshold;
    }

    /// Removes up to `amount` from the stake and returns what was actually taken.
    pub(crate) fn slash(&mut self, amount: Tokens, threshold: Tokens) -> Tokens {
        let taken = amount.min(self.staked);
        self.staked -= taken;
        self.refresh_exclusion(threshold);
        taken
    }

    pub fn holdings(&self) -> Tokens {
        self.balance + self.staked
    }
}
