//! Static gas model for the contract interactions of one encounter.

use std::fmt;

use serde::Serialize;

use super::LedgerError;

/// Protocol steps that may touch the contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ProtocolStep {
    Initialization,
    PreTrainingCheck,
    LearningComplete,
    ModelValidation,
    Vote,
    ResultCheckAndDistribute,
}

/// Who submits the transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Payer {
    Learner,
    Neighbor,
    Validator,
    AnyParty,
}

pub const PRE_TRAINING_CHECK_LEARNER: u64 = 43_919;
pub const LEARNING_COMPLETE_NEIGHBOR: u64 = 96_172;
pub const LEARNING_COMPLETE_LEARNER: u64 = 46_921;
pub const VOTE_VALIDATOR: u64 = 78_869;
pub const RESULT_CHECK_AND_DISTRIBUTE: u64 = 191_344;

/// The five billed interactions in encounter order.
pub const BILLED: [(ProtocolStep, Payer, u64); 5] = [
    (
        ProtocolStep::PreTrainingCheck,
        Payer::Learner,
        PRE_TRAINING_CHECK_LEARNER,
    ),
    (
        ProtocolStep::LearningComplete,
        Payer::Neighbor,
        LEARNING_COMPLETE_NEIGHBOR,
    ),
    (
        ProtocolStep::LearningComplete,
        Payer::Learner,
        LEARNING_COMPLETE_LEARNER,
    ),
    (ProtocolStep::Vote, Payer::Validator, VOTE_VALIDATOR),
    (
        ProtocolStep::ResultCheckAndDistribute,
        Payer::AnyParty,
        RESULT_CHECK_AND_DISTRIBUTE,
    ),
];

pub fn gas_cost(step: ProtocolStep, payer: Payer) -> Result<u64, LedgerError> {
    BILLED
        .iter()
        .find(|(s, p, _)| *s == step && *p == payer)
        .map(|(_, _, g)| *g)
        .ok_or(LedgerError::UnbilledStep { step, payer })
}

/// Gas for one complete encounter with `votes` cast.
pub fn gas_total_per_encounter(votes: u64) -> u64 {
    PRE_TRAINING_CHECK_LEARNER
        + LEARNING_COMPLETE_NEIGHBOR
        + LEARNING_COMPLETE_LEARNER
        + votes * VOTE_VALIDATOR
        + RESULT_CHECK_AND_DISTRIBUTE
}

/// Row of an itemized estimate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GasLine {
    pub step: ProtocolStep,
    pub payer: Payer,
    pub count: u64,
    pub gas_each: u64,
    pub gas: u64,
}

pub fn gas_breakdown(votes: u64) -> Vec<GasLine> {
    BILLED
        .iter()
        .map(|&(step, payer, gas_each)| {
            let count = if step == ProtocolStep::Vote { votes } else { 1 };
            GasLine {
                step,
                payer,
                count,
                gas_each,
                gas: count * gas_each,
            }
        })
        .collect()
}

impl fmt::Display for ProtocolStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProtocolStep::Initialization => "Initialization",
            ProtocolStep::PreTrainingCheck => "Pre-Training Check",
            ProtocolStep::LearningComplete => "Learning Complete",
            ProtocolStep::ModelValidation => "Model Validation",
            ProtocolStep::Vote => "Votes",
            ProtocolStep::ResultCheckAndDistribute => "Result Check and Distribute Award",
        };
        f.write_str(s)
    }
}

impl fmt::Display for Payer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Payer::Learner => "Learner",
            Payer::Neighbor => "Neighbor",
            Payer::Validator => "Validator",
            Payer::AnyParty => "Any one party",
        };
        f.write_str(s)
    }
}
