//! Shared oracles and fuzz drivers for the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use idml::learning::{
    flip_labels, generate_synthetic, init_model, partition, train, Arch, PartitionSpec, TrainConfig,
};
use idml::ledger::{
    CaseLabel, ContractConfig, Digest, EncounterId, EncounterState, Ledger, ParticipantId,
    Settlement, Share,
};
use idml::protocol::{
    run_encounter, Algorithm, Behavior, Directory, EncounterConfig, Faults, Peer,
};
use idml::{Dataset, ModelParams};

type Q = Ratio<i128>;

fn floor(q: Q) -> i64 {
    q.floor().to_integer() as i64
}

/// Per-party net token change of one finalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nets {
    pub learner: i64,
    pub neighbor: i64,
    pub yes_each: i64,
    pub no_each: i64,
    pub treasury: i64,
}

/// Exact rational payouts for `t` yes and `f` no votes, each floored toward
/// negative infinity. Case 4 derives the yes payout from the floored no payout.
pub fn oracle(r: u64, neighbor_share: Q, t: u32, f: u32) -> Nets {
    let rq = Q::from_integer(i128::from(r));
    let pv = Q::from_integer(1) - neighbor_share;
    let (tq, fq) = (
        Q::from_integer(i128::from(t)),
        Q::from_integer(i128::from(f)),
    );
    let r_i = r as i64;
    let (learner, neighbor, yes_each, no_each) = if t == 0 && f == 0 {
        (-r_i, r_i, 0, 0)
    } else if f == 0 {
        (-r_i, floor(neighbor_share * rq), floor(pv * rq / tq), 0)
    } else if t == 0 {
        (0, -r_i, 0, floor(rq / fq))
    } else if t >= f {
        let vf = floor(-(pv * rq) / (tq + fq));
        let vt = floor((pv * rq - fq * Q::from_integer(i128::from(vf))) / tq);
        (-r_i, floor(neighbor_share * rq), vt, vf)
    } else {
        let vt = floor(-rq / (tq + fq));
        let vf = floor((rq - tq * Q::from_integer(i128::from(vt))) / fq);
        (0, -r_i, vt, vf)
    };
    let distributed = learner + neighbor + yes_each * i64::from(t) + no_each * i64::from(f);
    Nets {
        learner,
        neighbor,
        yes_each,
        no_each,
        treasury: -distributed,
    }
}

pub fn case_of(t: u32, f: u32) -> CaseLabel {
    match (t, f) {
        (0, 0) => CaseLabel::Case1,
        (_, 0) => CaseLabel::Case2,
        (0, _) => CaseLabel::Case3,
        (t, f) if t >= f => CaseLabel::Case4,
        _ => CaseLabel::Case5,
    }
}

fn holdings(l: &Ledger, p: ParticipantId) -> i64 {
    l.account(p).map_or(0, |a| (a.balance + a.staked) as i64)
}

/// Drives a real ledger through one encounter with `t` yes and `f` no votes
/// and returns the observed nets and case.
pub fn observe(r: u64, neighbor_share_ppm: u32, t: u32, f: u32) -> (CaseLabel, Nets) {
    let total = t + f;
    let cfg = ContractConfig {
        neighbor_share: Share::from_ppm(neighbor_share_ppm).unwrap(),
        voting_threshold: total.max(1),
        ..ContractConfig::default()
    };
    let mut l = Ledger::new(cfg).unwrap();
    let n = 2 + total;
    for i in 0..n {
        l.exchange_tokens(ParticipantId(i), 100_000).unwrap();
        l.stake(ParticipantId(i), 10_000).unwrap();
    }
    let (lr, nb) = (ParticipantId(0), ParticipantId(1));
    let validators: Vec<_> = (2..n).map(ParticipantId).collect();
    let before: Vec<i64> = (0..n).map(|i| holdings(&l, ParticipantId(i))).collect();
    let treasury_before = l.treasury() as i64;

    let id = l.open_encounter(lr, nb, r).unwrap();
    let d = Digest([7; 16]);
    l.report_complete(id, nb, d).unwrap();
    l.report_complete(id, lr, d).unwrap();
    l.register_validation(id, &validators).unwrap();
    for (i, &v) in validators.iter().enumerate() {
        l.cast_vote(id, v, (i as u32) < t).unwrap();
    }
    if total == 0 {
        l.advance_block(l.config().max_voting_blocks + 1);
    }
    let out = l.finalize(id).unwrap();
    let case = out.case().unwrap();
    let net = |i: u32| holdings(&l, ParticipantId(i)) - before[i as usize];
    let yes_each = if t > 0 { net(2) } else { 0 };
    let no_each = if f > 0 { net(2 + t) } else { 0 };
    for i in 0..t {
        assert_eq!(net(2 + i), yes_each, "yes voters paid unequally");
    }
    for i in 0..f {
        assert_eq!(net(2 + t + i), no_each, "no voters paid unequally");
    }
    (
        case,
        Nets {
            learner: net(0),
            neighbor: net(1),
            yes_each,
            no_each,
            treasury: l.treasury() as i64 - treasury_before,
        },
    )
}

/// Tally of a fuzz campaign.
#[derive(Debug, Default, Clone)]
pub struct FuzzReport {
    pub lifecycles: usize,
    pub checks: usize,
    pub conservation_failures: Vec<String>,
    pub outcomes: BTreeMap<String, usize>,
    pub rollback_checked: usize,
    pub rollback_failures: Vec<String>,
    pub terminal_failures: Vec<String>,
}

struct Fuzz {
    ledger: Ledger,
    minted: u64,
    rng: ChaCha8Rng,
    report: FuzzReport,
}

impl Fuzz {
    fn conserved(&mut self, ctx: &str) {
        self.report.checks += 1;
        let held: u64 = self.ledger.accounts().map(|a| a.balance + a.staked).sum();
        let escrow: u64 = self.ledger.encounters().iter().map(|e| e.escrow).sum();
        let total = held + escrow + self.ledger.treasury();
        if total != self.minted {
            self.report
                .conservation_failures
                .push(format!("{ctx}: holdings {total} != minted {}", self.minted));
        }
    }

    fn mint(&mut self, p: ParticipantId, amount: u64) {
        if self.ledger.exchange_tokens(p, amount).is_ok() {
            self.minted += amount;
        }
        self.conserved("exchange");
    }

    fn outcome(&mut self, key: &str) {
        *self.report.outcomes.entry(key.into()).or_insert(0) += 1;
    }

    fn timeout(&mut self, id: EncounterId) {
        let deadline = self.ledger.encounter(id).unwrap().voting_deadline;
        let now = self.ledger.height();
        if now <= deadline {
            self.ledger.advance_block(deadline - now + 1);
        }
    }

    fn close_terminal(&mut self, id: EncounterId, ctx: &str) {
        let rec = self.ledger.encounter(id).unwrap();
        if !rec.state.is_terminal() || rec.escrow != 0 {
            self.report.terminal_failures.push(format!(
                "{ctx}: encounter {id} left in {:?} with escrow {}",
                rec.state, rec.escrow
            ));
        }
    }

    /// One random contract-level lifecycle, including invalid calls.
    fn ledger_lifecycle(&mut self, n: u32) {
        let pick = |rng: &mut ChaCha8Rng| ParticipantId(rng.random_range(0..n));
        if self.rng.random_bool(0.1) {
            let p = pick(&mut self.rng);
            let amt = self.rng.random_range(1..500);
            self.mint(p, amt);
        }
        if self.rng.random_bool(0.15) {
            let p = pick(&mut self.rng);
            let amt = self.rng.random_range(1..300);
            let _ = self.ledger.stake(p, amt);
            self.conserved("stake");
        }
        let learner = pick(&mut self.rng);
        let neighbor = pick(&mut self.rng);
        let reward = if self.rng.random_bool(0.05) {
            0
        } else {
            self.rng.random_range(1..400)
        };
        let id = match self.ledger.open_encounter(learner, neighbor, reward) {
            Ok(id) => id,
            Err(_) => {
                self.conserved("open rejected");
                self.outcome("open rejected");
                return;
            }
        };
        self.conserved("open");
        if self.rng.random_bool(0.03) {
            // Left dangling on purpose; a later timeout may never come.
            self.outcome("dangling");
            return;
        }
        let good = Digest(self.rng.random());
        match self.rng.random_range(0..10) {
            0 => {
                self.timeout(id);
                self.ledger.resolve_incomplete(id).unwrap();
                self.outcome("timeout before report");
            }
            1 => {
                let reporter = if self.rng.random_bool(0.5) {
                    learner
                } else {
                    neighbor
                };
                self.ledger.report_complete(id, reporter, good).unwrap();
                assert!(self.ledger.report_complete(id, reporter, good).is_err());
                assert!(self.ledger.resolve_incomplete(id).is_err());
                self.timeout(id);
                self.ledger.resolve_incomplete(id).unwrap();
                self.outcome("one report then timeout");
            }
            2 => {
                let mut bad = good;
                bad.0[0] ^= 1;
                self.ledger.report_complete(id, neighbor, good).unwrap();
                let st = self.ledger.report_complete(id, learner, bad).unwrap();
                assert_eq!(st, EncounterState::Incomplete);
                self.ledger.resolve_incomplete(id).unwrap();
                self.outcome("digest mismatch");
            }
            _ => {
                self.ledger.report_complete(id, learner, good).unwrap();
                self.conserved("report");
                self.ledger.report_complete(id, neighbor, good).unwrap();
                self.conserved("report");
                self.validate_path(id, learner, neighbor, n);
            }
        }
        self.conserved("close");
        self.close_terminal(id, "ledger lifecycle");
    }

    fn validate_path(
        &mut self,
        id: EncounterId,
        learner: ParticipantId,
        neighbor: ParticipantId,
        n: u32,
    ) {
        if self.rng.random_bool(0.05) {
            self.timeout(id);
            self.ledger.resolve_incomplete(id).unwrap();
            self.outcome("no validators");
            return;
        }
        if self.rng.random_bool(0.2) {
            // Conflicted or ineligible sets must be refused without side effects.
            let bad = vec![learner, ParticipantId(self.rng.random_range(0..n))];
            assert!(self.ledger.register_validation(id, &bad).is_err());
            self.conserved("bad registration");
        }
        let mut pool: Vec<ParticipantId> = self
            .ledger
            .eligible()
            .filter(|&p| p != learner && p != neighbor)
            .collect();
        pool.shuffle(&mut self.rng);
        let k = self.rng.random_range(0..=5).min(pool.len());
        if k == 0 {
            self.timeout(id);
            self.ledger.resolve_incomplete(id).unwrap();
            self.outcome("no validators");
            return;
        }
        let validators = pool[..k].to_vec();
        self.ledger.register_validation(id, &validators).unwrap();
        self.conserved("register");
        let mut order = validators.clone();
        order.shuffle(&mut self.rng);
        if self.rng.random_bool(0.05) {
            // Every validator stays silent.
            order.clear();
        }
        for v in order {
            if self.ledger.can_finalize(id) && self.rng.random_bool(0.7) {
                break;
            }
            if self.rng.random_bool(0.1) {
                assert!(self.ledger.cast_vote(id, learner, true).is_err());
            }
            if self.rng.random_bool(0.08) {
                let now = self.ledger.height();
                let left = self
                    .ledger
                    .encounter(id)
                    .unwrap()
                    .voting_deadline
                    .saturating_sub(now);
                self.ledger
                    .advance_block(self.rng.random_range(0..=left + 10));
            }
            if !self.ledger.can_finalize(id) {
                assert!(self.ledger.finalize(id).is_err());
            }
            let verdict = self.rng.random_bool(0.6);
            if self.ledger.cast_vote(id, v, verdict).is_ok() && self.rng.random_bool(0.1) {
                assert!(self.ledger.cast_vote(id, v, verdict).is_err());
            }
            self.conserved("vote");
        }
        if !self.ledger.can_finalize(id) {
            self.timeout(id);
        }
        let out = self.ledger.finalize(id).unwrap();
        assert!(self.ledger.finalize(id).is_err());
        let key = match out.settlement {
            Settlement::Case(c) => c.as_str(),
            Settlement::Incomplete => "Incomplete",
        };
        self.outcome(key);
    }
}

/// Participants for protocol-level fuzzing.
pub struct World {
    pub data: Vec<Dataset>,
    pub behavior: Vec<Behavior>,
    pub models: Vec<ModelParams>,
}

impl Directory for World {
    fn local_data(&self, p: ParticipantId) -> Option<&Dataset> {
        self.data.get(p.0 as usize)
    }
    fn behavior(&self, p: ParticipantId) -> Option<Behavior> {
        self.behavior.get(p.0 as usize).copied()
    }
}

pub const WORLD_BEHAVIORS: [Behavior; 10] = [
    Behavior::Honest,
    Behavior::Honest,
    Behavior::Honest,
    Behavior::Honest,
    Behavior::Honest,
    Behavior::Honest,
    Behavior::LabelFlipAttacker,
    Behavior::RandomModelAttacker,
    Behavior::MaliciousPositiveValidator,
    Behavior::Honest,
];

pub fn world(seed: u64) -> World {
    world_with(&WORLD_BEHAVIORS, 0, seed)
}

/// Small IID world; honest models get `pretrain_steps` of local training.
pub fn world_with(behaviors: &[Behavior], pretrain_steps: usize, seed: u64) -> World {
    let all = generate_synthetic(3, 4, 100, 1.0, seed).unwrap();
    let spec = PartitionSpec {
        n_nodes: behaviors.len(),
        ..PartitionSpec::default()
    };
    let shares = partition(&all, &spec, seed).unwrap();
    let arch = Arch::linear(4, 3).unwrap();
    let mut w = World {
        data: Vec::new(),
        behavior: behaviors.to_vec(),
        models: Vec::new(),
    };
    for (i, share) in shares.into_iter().enumerate() {
        let share = if w.behavior[i] == Behavior::LabelFlipAttacker {
            flip_labels(&share, seed)
        } else {
            share
        };
        let mut model = init_model(&arch, seed + i as u64);
        if pretrain_steps > 0 && w.behavior[i].is_honest() {
            let cfg = TrainConfig {
                learning_rate: 0.1,
                steps: pretrain_steps,
                batch_size: 16,
                seed: seed + i as u64,
            };
            model = train(&model, &share, &cfg).unwrap();
        }
        w.data.push(share);
        w.models.push(model);
    }
    w
}

impl Fuzz {
    /// One full encounter through the protocol adapter with random faults.
    fn protocol_lifecycle(&mut self, w: &mut World, seed: u64) {
        let n = w.behavior.len() as u32;
        let learner = ParticipantId(self.rng.random_range(0..n));
        let mut neighbor = ParticipantId(self.rng.random_range(0..n - 1));
        if neighbor >= learner {
            neighbor.0 += 1;
        }
        if self.rng.random_bool(0.2) {
            let p = ParticipantId(self.rng.random_range(0..n));
            let _ = self.ledger.stake(p, self.rng.random_range(50..200));
            self.conserved("restake");
        }
        let algorithm = if self.rng.random_bool(0.5) {
            Algorithm::Gossip
        } else {
            Algorithm::Oppcl
        };
        let cfg = EncounterConfig {
            reward: self.rng.random_range(1..120),
            tau: [0.0, 0.03, 0.2, 1.0][self.rng.random_range(0..4)],
            validators_k: self.rng.random_range(1..=5),
            train: TrainConfig {
                learning_rate: 0.1,
                steps: self.rng.random_range(1..6),
                batch_size: 8,
                seed: 0,
            },
            seed,
            faults: Faults {
                neighbor_drops: self.rng.random_bool(0.05),
                validators_silent: self.rng.random_bool(0.05),
            },
            shared_validation: None,
        };
        let before = w.models[learner.0 as usize].clone();
        let peer = |p: ParticipantId| Peer {
            id: p,
            model: &w.models[p.0 as usize],
            data: &w.data[p.0 as usize],
            behavior: w.behavior[p.0 as usize],
        };
        let res = run_encounter(
            algorithm,
            peer(learner),
            peer(neighbor),
            &*w,
            &mut self.ledger,
            &cfg,
        );
        self.conserved("protocol encounter");
        let res = match res {
            Ok(r) => r,
            Err(_) => {
                self.outcome("refused");
                return;
            }
        };
        self.close_terminal(res.encounter_id, "protocol lifecycle");
        let case = res.finalization.case();
        self.outcome(case.map_or("Incomplete", |c| c.as_str()));
        if matches!(case, Some(CaseLabel::Case3 | CaseLabel::Case5)) {
            self.report.rollback_checked += 1;
            if !res.learner_model_after.bit_eq(&before) {
                self.report.rollback_failures.push(format!(
                    "encounter {} ({algorithm:?}) changed the learner model",
                    res.encounter_id
                ));
            }
        }
        w.models[learner.0 as usize] = res.learner_model_after;
    }
}

/// Runs `lifecycles` random encounter lifecycles on one ledger. Roughly a
/// fifth go through the protocol adapters with real models.
pub fn fuzz(lifecycles: usize, seed: u64) -> FuzzReport {
    let mut f = Fuzz {
        ledger: Ledger::new(ContractConfig::default()).unwrap(),
        minted: 0,
        rng: idml::seed::rng(seed),
        report: FuzzReport::default(),
    };
    let n = 12;
    for i in 0..n {
        let amt = f.rng.random_range(0..3_000);
        f.mint(ParticipantId(i), amt);
        let s = f.rng.random_range(0..400);
        let _ = f.ledger.stake(ParticipantId(i), s);
        f.conserved("setup stake");
    }
    // Protocol participants live on their own ledger so attackers and
    // honest nodes keep a realistic token history.
    let mut proto = Fuzz {
        ledger: Ledger::new(ContractConfig::default()).unwrap(),
        minted: 0,
        rng: idml::seed::rng(idml::seed::derive(seed, "protocol", 0)),
        report: FuzzReport::default(),
    };
    let mut w = world(seed);
    for i in 0..w.behavior.len() as u32 {
        proto.mint(ParticipantId(i), 1_000_000);
        proto.ledger.stake(ParticipantId(i), 200).unwrap();
    }
    for i in 0..lifecycles {
        if i % 5 == 0 {
            proto.protocol_lifecycle(&mut w, idml::seed::derive(seed, "encounter", i as u64));
        } else {
            f.ledger_lifecycle(n);
        }
    }
    let mut r = f.report;
    let p = proto.report;
    r.lifecycles = lifecycles;
    r.checks += p.checks;
    r.conservation_failures.extend(p.conservation_failures);
    r.terminal_failures.extend(p.terminal_failures);
    r.rollback_checked = p.rollback_checked;
    r.rollback_failures = p.rollback_failures;
    for (k, v) in p.outcomes {
        *r.outcomes.entry(format!("protocol {k}")).or_insert(0) += v;
    }
    r
}
