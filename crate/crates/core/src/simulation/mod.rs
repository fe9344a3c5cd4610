//! Population construction, encounter traces, the round loop and the
//! experiment drivers built on it.

mod config;
mod experiments;
mod metrics;
mod population;
mod run;
mod trace;

use thiserror::Error;

use crate::learning::LearningError;
use crate::ledger::LedgerError;
use crate::protocol::ProtocolError;

pub use crate::protocol::Behavior;
pub use config::{AttackerCounts, DataConfig, SimConfig};
pub use experiments::{attack_study, voting_sweep, AttackCurve, SweepCell};
pub use metrics::{
    AccuracyRow, EncounterRow, MetricsSink, RoundStats, SkipCounts, StakeRow, Summary, VoteRow,
};
pub use population::{assign_behaviors, build_population, Participant, Population};
pub use run::run;
pub use trace::{generate_trace, EncounterTrace};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config field `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error(transparent)]
    Learning(#[from] LearningError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}
