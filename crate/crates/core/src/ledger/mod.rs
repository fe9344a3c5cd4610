//! Contract-equivalent ledger: accounts, staking, encounter escrow, digest
//! matching, votes and settlement, all driven by a simulated block clock.
//!
//! The ledger is a single serial state machine. Every rejected call leaves
//! it untouched, except that opening an encounter the learner cannot pay for
//! (or the neighbor refuses) records an `Aborted` encounter.

mod account;
mod config;
mod encounter;
mod events;
pub mod gas;
pub mod settlement;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use account::{Account, ParticipantId};
pub use config::{Block, ContractConfig, Share, Tokens};
pub use encounter::{
    Digest, EncounterId, EncounterRecord, EncounterState, HistoryEntry, Outcome, Role, Tally, Vote,
};
pub use events::{write_csv, EventKind, LedgerEvent};
pub use gas::{gas_cost, gas_total_per_encounter, Payer, ProtocolStep};
pub use settlement::CaseLabel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("invalid contract config: {0}")]
    InvalidConfig(String),
    #[error("amount must be positive")]
    ZeroAmount,
    #[error("unknown participant {0}")]
    UnknownParticipant(ParticipantId),
    #[error("participant {participant} has {available} tokens, needs {needed}")]
    InsufficientBalance {
        participant: ParticipantId,
        available: Tokens,
        needed: Tokens,
    },
    #[error("learner and neighbor must differ")]
    SelfEncounter,
    #[error("learner cannot prepay; encounter {0} aborted")]
    PrepaymentFailed(EncounterId),
    #[error("neighbor is not eligible; encounter {0} aborted")]
    NeighborRejected(EncounterId),
    #[error("unknown encounter {0}")]
    UnknownEncounter(EncounterId),
    #[error("encounter {id} is {state}, operation not allowed")]
    WrongState {
        id: EncounterId,
        state: EncounterState,
    },
    #[error("{0} is not a party to the encounter")]
    NotAParty(ParticipantId),
    #[error("{0} already reported")]
    DuplicateReport(ParticipantId),
    #[error("validator {0} conflicts with the encounter's learner or neighbor")]
    ConflictedValidator(ParticipantId),
    #[error("validator {0} listed twice")]
    DuplicateValidator(ParticipantId),
    #[error("{0} is not eligible")]
    Ineligible(ParticipantId),
    #[error("{0} is not a registered validator")]
    UnregisteredValidator(ParticipantId),
    #[error("{0} already voted")]
    DoubleVote(ParticipantId),
    #[error("voting deadline {deadline} passed (now {now})")]
    DeadlinePassed { deadline: Block, now: Block },
    #[error("finalization not yet allowed: {votes} votes, deadline {deadline}, now {now}")]
    Premature {
        votes: u32,
        deadline: Block,
        now: Block,
    },
    #[error("step {step} by {payer} is not billed")]
    UnbilledStep { step: ProtocolStep, payer: Payer },
}

pub type Result<T> = std::result::Result<T, LedgerError>;

/// Monotone block counter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BlockClock {
    height: Block,
}

impl BlockClock {
    pub fn height(&self) -> Block {
        self.height
    }

    pub fn advance(&mut self, n: Block) -> Block {
        self.height += n;
        self.height
    }
}

/// How an encounter was settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Settlement {
    Case(CaseLabel),
    Incomplete,
}

/// A realized token movement from a settlement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Posting {
    pub participant: ParticipantId,
    pub kind: EventKind,
    pub amount: Tokens,
}

/// Payouts and penalties computed when an encounter closes.
///
/// `r_n`, `r_v_t_each` and `r_v_f_each` are the nominal per-head amounts;
/// what actually moved (after stake caps) is in `postings`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FinalizationOutcome {
    pub encounter: EncounterId,
    pub settlement: Settlement,
    pub n_v_t: u32,
    pub n_v_f: u32,
    pub r_n: i64,
    pub r_v_t_each: i64,
    pub r_v_f_each: i64,
    pub learner_refund: Tokens,
    pub remainder_to_treasury: Tokens,
    pub clamp_shortfall: Tokens,
    pub postings: Vec<Posting>,
}

impl FinalizationOutcome {
    pub fn case(&self) -> Option<CaseLabel> {
        match self.settlement {
            Settlement::Case(c) => Some(c),
            Settlement::Incomplete => None,
        }
    }

    pub fn accepted(&self) -> bool {
        self.case().is_some_and(CaseLabel::accepted)
    }

    /// Net change of one participant's balance plus stake.
    pub fn net_for(&self, p: ParticipantId) -> i64 {
        self.postings
            .iter()
            .filter(|x| x.participant == p)
            .map(|x| match x.kind {
                EventKind::Slash => -(x.amount as i64),
                _ => x.amount as i64,
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct Ledger {
    config: ContractConfig,
    clock: BlockClock,
    accounts: BTreeMap<ParticipantId, Account>,
    encounters: Vec<EncounterRecord>,
    treasury: Tokens,
    history: BTreeMap<ParticipantId, Vec<HistoryEntry>>,
    events: Vec<LedgerEvent>,
}

impl Ledger {
    pub fn new(config: ContractConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            clock: BlockClock::default(),
            accounts: BTreeMap::new(),
            encounters: Vec::new(),
            treasury: 0,
            history: BTreeMap::new(),
            events: Vec::new(),
        })
    }

    pub fn config(&self) -> &ContractConfig {
        &self.config
    }

    pub fn height(&self) -> Block {
        self.clock.height()
    }

    pub fn advance_block(&mut self, n: Block) -> Block {
        self.clock.advance(n)
    }

    pub fn account(&self, p: ParticipantId) -> Option<&Account> {
        self.accounts.get(&p)
    }

    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values()
    }

    pub fn encounter(&self, id: EncounterId) -> Option<&EncounterRecord> {
        self.encounters.get(id.0 as usize)
    }

    pub fn encounters(&self) -> &[EncounterRecord] {
        &self.encounters
    }

    pub fn treasury(&self) -> Tokens {
        self.treasury
    }

    pub fn events(&self) -> &[LedgerEvent] {
        &self.events
    }

    /// Sum of all balances, stakes, escrow and the treasury.
    pub fn total_tokens(&self) -> Tokens {
        self.accounts
            .values()
            .map(Account::holdings)
            .sum::<Tokens>()
            + self.encounters.iter().map(|e| e.escrow).sum::<Tokens>()
            + self.treasury
    }

    fn log(
        &mut self,
        encounter: Option<EncounterId>,
        kind: EventKind,
        actor: Option<ParticipantId>,
        amount: Tokens,
    ) {
        let state_after = encounter.and_then(|id| self.encounter(id)).map(|e| e.state);
        self.events.push(LedgerEvent {
            block: self.clock.height(),
            encounter,
            kind,
            actor,
            amount,
            state_after,
        });
    }

    pub fn exchange_tokens(&mut self, p: ParticipantId, amount: Tokens) -> Result<&Account> {
        if amount == 0 {
            return Err(LedgerError::ZeroAmount);
        }
        self.accounts
            .entry(p)
            .or_insert_with(|| Account::new(p))
            .balance += amount;
        self.log(None, EventKind::Exchange, Some(p), amount);
        Ok(&self.accounts[&p])
    }

    pub fn stake(&mut self, p: ParticipantId, amount: Tokens) -> Result<&Account> {
        if amount == 0 {
            return Err(LedgerError::ZeroAmount);
        }
        let threshold = self.config.stake_threshold;
        let acct = self
            .accounts
            .get_mut(&p)
            .ok_or(LedgerError::UnknownParticipant(p))?;
        if acct.balance < amount {
            return Err(LedgerError::InsufficientBalance {
                participant: p,
                available: acct.balance,
                needed: amount,
            });
        }
        acct.balance -= amount;
        acct.staked += amount;
        acct.has_staked = true;
        acct.refresh_exclusion(threshold);
        self.log(None, EventKind::Stake, Some(p), amount);
        Ok(&self.accounts[&p])
    }

    pub fn is_eligible(&self, p: ParticipantId) -> bool {
        self.accounts
            .get(&p)
            .is_some_and(|a| a.staked >= self.config.stake_threshold && !a.excluded)
    }

    /// Eligible participants in id order.
    pub fn eligible(&self) -> impl Iterator<Item = ParticipantId> + '_ {
        self.accounts
            .keys()
            .copied()
            .filter(move |&p| self.is_eligible(p))
    }

    /// Opens an encounter and moves `reward` from the learner into escrow.
    pub fn open_encounter(
        &mut self,
        learner: ParticipantId,
        neighbor: ParticipantId,
        reward: Tokens,
    ) -> Result<EncounterId> {
        if learner == neighbor {
            return Err(LedgerError::SelfEncounter);
        }
        if reward == 0 {
            return Err(LedgerError::ZeroAmount);
        }
        let now = self.clock.height();
        let id = EncounterId(self.encounters.len() as u64);
        self.encounters.push(EncounterRecord {
            id,
            learner,
            neighbor,
            reward,
            state: EncounterState::Opened,
            escrow: 0,
            digest_from_learner: None,
            digest_from_neighbor: None,
            validators: Vec::new(),
            votes: Vec::new(),
            opened_block: now,
            voting_deadline: now + self.config.max_voting_blocks,
        });
        let can_pay = self
            .accounts
            .get(&learner)
            .is_some_and(|a| a.balance >= reward);
        let refusal = if !can_pay {
            Some(LedgerError::PrepaymentFailed(id))
        } else if !self.is_eligible(neighbor) {
            Some(LedgerError::NeighborRejected(id))
        } else {
            None
        };
        if let Some(err) = refusal {
            self.encounters[id.0 as usize].state = EncounterState::Aborted;
            self.log(Some(id), EventKind::Abort, Some(learner), 0);
            self.push_history(id, Outcome::Aborted);
            return Err(err);
        }
        self.accounts.get_mut(&learner).expect("checked").balance -= reward;
        let rec = &mut self.encounters[id.0 as usize];
        rec.escrow = reward;
        rec.state = EncounterState::Prepaid;
        self.log(Some(id), EventKind::Open, Some(learner), reward);
        Ok(id)
    }

    pub fn check_prepayment(&self, id: EncounterId) -> bool {
        self.encounter(id)
            .is_some_and(|e| e.state == EncounterState::Prepaid && e.escrow == e.reward)
    }

    fn record_mut(&mut self, id: EncounterId) -> Result<&mut EncounterRecord> {
        self.encounters
            .get_mut(id.0 as usize)
            .ok_or(LedgerError::UnknownEncounter(id))
    }

    fn wrong_state(e: &EncounterRecord) -> LedgerError {
        LedgerError::WrongState {
            id: e.id,
            state: e.state,
        }
    }

    /// Stores one party's digest of the learning result.
    ///
    /// Once both digests are in, the encounter moves to `CompleteReported`
    /// when they match and to `Incomplete` when they do not.
    pub fn report_complete(
        &mut self,
        id: EncounterId,
        reporter: ParticipantId,
        digest: Digest,
    ) -> Result<EncounterState> {
        let rec = self.record_mut(id)?;
        if !matches!(
            rec.state,
            EncounterState::Prepaid | EncounterState::CompleteReported
        ) {
            return Err(Self::wrong_state(rec));
        }
        let slot = if reporter == rec.learner {
            &mut rec.digest_from_learner
        } else if reporter == rec.neighbor {
            &mut rec.digest_from_neighbor
        } else {
            return Err(LedgerError::NotAParty(reporter));
        };
        if slot.is_some() {
            return Err(LedgerError::DuplicateReport(reporter));
        }
        *slot = Some(digest);
        if let (Some(a), Some(b)) = (rec.digest_from_learner, rec.digest_from_neighbor) {
            rec.state = if a == b {
                EncounterState::CompleteReported
            } else {
                EncounterState::Incomplete
            };
        }
        let state = rec.state;
        self.log(Some(id), EventKind::Report, Some(reporter), 0);
        Ok(state)
    }

    /// Pays the neighbor its good-faith share and refunds the rest.
    ///
    /// Allowed on `Incomplete` encounters, and once the deadline has passed on
    /// encounters still waiting for digests or for validation to start.
    pub fn resolve_incomplete(&mut self, id: EncounterId) -> Result<FinalizationOutcome> {
        let now = self.clock.height();
        let rec = self
            .encounter(id)
            .ok_or(LedgerError::UnknownEncounter(id))?;
        let timed_out = now > rec.voting_deadline;
        let allowed = match rec.state {
            EncounterState::Incomplete => true,
            EncounterState::Prepaid | EncounterState::CompleteReported => timed_out,
            _ => false,
        };
        if !allowed {
            return Err(Self::wrong_state(rec));
        }
        let (learner, neighbor, reward) = (rec.learner, rec.neighbor, rec.reward);
        let to_neighbor = self.config.incomplete_fraction.floor_mul(reward);
        let refund = reward - to_neighbor;
        {
            let rec = self.record_mut(id)?;
            rec.escrow = 0;
            rec.state = EncounterState::Finalized;
        }
        self.log(Some(id), EventKind::Incomplete, None, 0);
        let mut postings = Vec::new();
        self.credit(id, neighbor, to_neighbor, EventKind::Credit, &mut postings);
        self.credit(id, learner, refund, EventKind::Refund, &mut postings);
        self.push_history(id, Outcome::Incomplete);
        Ok(FinalizationOutcome {
            encounter: id,
            settlement: Settlement::Incomplete,
            n_v_t: 0,
            n_v_f: 0,
            r_n: to_neighbor as i64,
            r_v_t_each: 0,
            r_v_f_each: 0,
            learner_refund: refund,
            remainder_to_treasury: 0,
            clamp_shortfall: 0,
            postings,
        })
    }

    /// Fixes the validator set and starts validation.
    pub fn register_validation(
        &mut self,
        id: EncounterId,
        validators: &[ParticipantId],
    ) -> Result<EncounterState> {
        let rec = self
            .encounter(id)
            .ok_or(LedgerError::UnknownEncounter(id))?;
        if rec.state != EncounterState::CompleteReported {
            return Err(Self::wrong_state(rec));
        }
        for (i, &v) in validators.iter().enumerate() {
            if v == rec.learner || v == rec.neighbor {
                return Err(LedgerError::ConflictedValidator(v));
            }
            if validators[..i].contains(&v) {
                return Err(LedgerError::DuplicateValidator(v));
            }
            if !self.is_eligible(v) {
                return Err(LedgerError::Ineligible(v));
            }
        }
        let rec = self.record_mut(id)?;
        rec.validators = validators.to_vec();
        rec.state = EncounterState::Validating;
        for &v in validators {
            self.log(Some(id), EventKind::RegisterValidator, Some(v), 0);
        }
        Ok(EncounterState::Validating)
    }

    pub fn cast_vote(
        &mut self,
        id: EncounterId,
        validator: ParticipantId,
        verdict: bool,
    ) -> Result<Tally> {
        let now = self.clock.height();
        let eligible = self.is_eligible(validator);
        let rec = self.record_mut(id)?;
        if rec.state != EncounterState::Validating {
            return Err(Self::wrong_state(rec));
        }
        if !rec.validators.contains(&validator) {
            return Err(LedgerError::UnregisteredValidator(validator));
        }
        if rec.votes.iter().any(|v| v.validator == validator) {
            return Err(LedgerError::DoubleVote(validator));
        }
        if now > rec.voting_deadline {
            return Err(LedgerError::DeadlinePassed {
                deadline: rec.voting_deadline,
                now,
            });
        }
        if !eligible {
            return Err(LedgerError::Ineligible(validator));
        }
        rec.votes.push(Vote { validator, verdict });
        let tally = rec.tally();
        self.log(
            Some(id),
            EventKind::Vote,
            Some(validator),
            u64::from(verdict),
        );
        Ok(tally)
    }

    /// Whether `finalize` would currently be accepted.
    pub fn can_finalize(&self, id: EncounterId) -> bool {
        self.encounter(id).is_some_and(|e| {
            e.state == EncounterState::Validating
                && (e.tally().total() >= self.config.voting_threshold
                    || self.clock.height() > e.voting_deadline)
        })
    }

    /// Settles a validated encounter. Any participant may call it.
    pub fn finalize(&mut self, id: EncounterId) -> Result<FinalizationOutcome> {
        let now = self.clock.height();
        let rec = self
            .encounter(id)
            .ok_or(LedgerError::UnknownEncounter(id))?;
        if rec.state != EncounterState::Validating {
            return Err(Self::wrong_state(rec));
        }
        let tally = rec.tally();
        if tally.total() < self.config.voting_threshold && now <= rec.voting_deadline {
            return Err(LedgerError::Premature {
                votes: tally.total(),
                deadline: rec.voting_deadline,
                now,
            });
        }
        let (learner, neighbor, reward) = (rec.learner, rec.neighbor, rec.reward);
        let yes: Vec<ParticipantId> = rec
            .votes
            .iter()
            .filter(|v| v.verdict)
            .map(|v| v.validator)
            .collect();
        let no: Vec<ParticipantId> = rec
            .votes
            .iter()
            .filter(|v| !v.verdict)
            .map(|v| v.validator)
            .collect();
        let stake_of = |p: &ParticipantId| self.accounts.get(p).map_or(0, |a| a.staked);
        let nominal = settlement::nominal(reward, self.config.neighbor_share, tally.yes, tally.no);
        let plan = settlement::plan(
            reward,
            &nominal,
            stake_of(&neighbor),
            &yes.iter().map(stake_of).collect::<Vec<_>>(),
            &no.iter().map(stake_of).collect::<Vec<_>>(),
        );

        {
            let rec = self.record_mut(id)?;
            rec.escrow = 0;
            rec.state = EncounterState::Finalized;
        }
        self.log(Some(id), EventKind::Finalize, None, 0);

        let mut postings = Vec::new();
        self.credit(
            id,
            learner,
            plan.learner_refund,
            EventKind::Refund,
            &mut postings,
        );
        self.credit(
            id,
            neighbor,
            plan.neighbor_credit,
            EventKind::Credit,
            &mut postings,
        );
        self.slash(id, neighbor, plan.neighbor_slash, &mut postings);
        for (&v, &s) in yes.iter().zip(&plan.yes_slashes) {
            self.credit(
                id,
                v,
                plan.yes_credit_each,
                EventKind::Credit,
                &mut postings,
            );
            self.slash(id, v, s, &mut postings);
        }
        for (&v, &s) in no.iter().zip(&plan.no_slashes) {
            self.credit(id, v, plan.no_credit_each, EventKind::Credit, &mut postings);
            self.slash(id, v, s, &mut postings);
        }
        if plan.treasury > 0 {
            self.treasury += plan.treasury;
            self.log(Some(id), EventKind::Treasury, None, plan.treasury);
        }
        self.push_history(id, Outcome::Finalized(nominal.case));

        Ok(FinalizationOutcome {
            encounter: id,
            settlement: Settlement::Case(nominal.case),
            n_v_t: tally.yes,
            n_v_f: tally.no,
            r_n: nominal.r_n,
            r_v_t_each: nominal.r_v_t,
            r_v_f_each: nominal.r_v_f,
            learner_refund: plan.learner_refund,
            remainder_to_treasury: plan.treasury,
            clamp_shortfall: plan.shortfall,
            postings,
        })
    }

    fn credit(
        &mut self,
        id: EncounterId,
        p: ParticipantId,
        amount: Tokens,
        kind: EventKind,
        postings: &mut Vec<Posting>,
    ) {
        if amount == 0 {
            return;
        }
        self.accounts
            .entry(p)
            .or_insert_with(|| Account::new(p))
            .balance += amount;
        postings.push(Posting {
            participant: p,
            kind,
            amount,
        });
        self.log(Some(id), kind, Some(p), amount);
    }

    fn slash(
        &mut self,
        id: EncounterId,
        p: ParticipantId,
        amount: Tokens,
        postings: &mut Vec<Posting>,
    ) {
        if amount == 0 {
            return;
        }
        let threshold = self.config.stake_threshold;
        let taken = self
            .accounts
            .get_mut(&p)
            .map_or(0, |a| a.slash(amount, threshold));
        debug_assert_eq!(taken, amount, "plan must respect stake caps");
        postings.push(Posting {
            participant: p,
            kind: EventKind::Slash,
            amount: taken,
        });
        self.log(Some(id), EventKind::Slash, Some(p), taken);
    }

    fn push_history(&mut self, id: EncounterId, outcome: Outcome) {
        let block = self.clock.height();
        let rec = &self.encounters[id.0 as usize];
        let mut parties = vec![(rec.learner, Role::Learner), (rec.neighbor, Role::Neighbor)];
        parties.extend(rec.validators.iter().map(|&v| (v, Role::Validator)));
        for (p, role) in parties {
            self.history.entry(p).or_default().push(HistoryEntry {
                encounter: id,
                role,
                outcome,
                block,
            });
        }
    }

    /// Closed encounters the participant took part in, oldest first.
    pub fn query_history(&self, p: ParticipantId) -> &[HistoryEntry] {
        self.history.get(&p).map_or(&[], Vec::as_slice)
    }

    /// Number of incomplete encounters in a participant's history.
    pub fn incomplete_count(&self, p: ParticipantId) -> usize {
        self.query_history(p)
            .iter()
            .filter(|h| h.outcome == Outcome::Incomplete)
            .count()
    }
}
