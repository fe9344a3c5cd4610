//! Token incentives for decentralized opportunistic learning.
//!
//! The crate is organized around four layers:
//!
//! - [`ledger`]: a contract-style state machine holding accounts, stakes,
//!   encounter escrow, digest matching, votes and settlement.
//! - [`learning`]: a small softmax classifier with deterministic training,
//!   partitioning, merging, digests and poisoning transforms.
//! - [`protocol`]: gossip and OppCL encounter choreographies that drive the
//!   ledger, plus validator selection and the tolerance rule.
//! - [`simulation`]: populations, encounter traces, the round loop, attacker
//!   injection and metrics.
//!
//! [`cli`] glues these together behind the `idml` binary. The runnable
//! programs under `examples/` show each capability in isolation.

pub mod cli;
pub mod learning;
pub mod ledger;
pub mod protocol;
pub mod seed;
pub mod simulation;

pub use learning::{Dataset, LearningError, ModelParams};
pub use ledger::{ContractConfig, Ledger, LedgerError, ParticipantId, Share};
