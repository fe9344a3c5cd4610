use std::io;

use serde::Serialize;

use super::account::ParticipantId;
use super::config::{Block, Tokens};
use super::encounter::{EncounterId, EncounterState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Exchange,
    Stake,
    Open,
    Abort,
    Report,
    Incomplete,
    RegisterValidator,
    Vote,
    Finalize,
    Credit,
    Refund,
    Slash,
    Treasury,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Exchange => "exchange",
            EventKind::Stake => "stake",
            EventKind::Open => "open",
            EventKind::Abort => "abort",
            EventKind::Report => "report",
            EventKind::Incomplete => "incomplete",
            EventKind::RegisterValidator => "register_validator",
            EventKind::Vote => "vote",
            EventKind::Finalize => "finalize",
            EventKind::Credit => "credit",
            EventKind::Refund => "refund",
            EventKind::Slash => "slash",
            EventKind::Treasury => "treasury",
        }
    }
}

/// One row of the ledger's event log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEvent {
    pub block: Block,
    pub encounter: Option<EncounterId>,
    pub kind: EventKind,
    pub actor: Option<ParticipantId>,
    pub amount: Tokens,
    pub state_after: Option<EncounterState>,
}

/// Writes `block,encounter_id,event,actor,amount,state_after` rows.
///
/// Fields that do not apply to a row are left empty.
pub fn write_csv<W: io::Write>(events: &[LedgerEvent], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "block",
        "encounter_id",
        "event",
        "actor",
        "amount",
        "state_after",
    ])?;
    for e in events {
        out.write_record([
            e.block.to_string(),
            e.encounter.map(|id| id.to_string()).unwrap_or_default(),
            e.kind.as_str().to_string(),
            e.actor.map(|p| p.to_string()).unwrap_or_default(),
            e.amount.to_string(),
            e.state_after.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
