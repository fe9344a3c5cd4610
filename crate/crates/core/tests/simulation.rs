use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use idml::learning::PartitionMode;
use idml::ledger::{EventKind, ParticipantId};
use idml::protocol::{Algorithm, Behavior};
use idml::simulation::{
    attack_study, generate_trace, run, voting_sweep, AttackerCounts, MetricsSink, SimConfig,
};

fn small() -> SimConfig {
    let mut c = SimConfig {
        n_participants: 12,
        n_rounds: 20,
        ..SimConfig::default()
    };
    c.data.samples_per_participant = 100;
    c.data.test_samples = 500;
    c
}

fn attacked(n: usize) -> SimConfig {
    SimConfig {
        attackers: AttackerCounts::only(Behavior::RandomModelAttacker, n),
        ..SimConfig::default()
    }
}

/// Replays stake and slash events to find who was excluded at each event.
fn exclusion_violations(m: &MetricsSink, threshold: u64) -> Vec<String> {
    let neighbors: BTreeMap<_, _> = m
        .encounters
        .iter()
        .map(|e| (e.encounter_id, e.neighbor))
        .collect();
    let mut staked: BTreeMap<ParticipantId, u64> = BTreeMap::new();
    let excluded = |s: &BTreeMap<ParticipantId, u64>, p: ParticipantId| {
        s.get(&p).is_some_and(|&x| x < threshold)
    };
    let mut bad = Vec::new();
    for e in &m.events {
        match e.kind {
            EventKind::Stake => *staked.entry(e.actor.unwrap()).or_insert(0) += e.amount,
            EventKind::Slash => *staked.get_mut(&e.actor.unwrap()).unwrap() -= e.amount,
            EventKind::Open => {
                let n = neighbors[&e.encounter.unwrap()];
                if excluded(&staked, n) || excluded(&staked, e.actor.unwrap()) {
                    bad.push(format!("excluded party in encounter {:?}", e.encounter));
                }
            }
            EventKind::RegisterValidator | EventKind::Vote
                if excluded(&staked, e.actor.unwrap()) =>
            {
                bad.push(format!(
                    "excluded validator {:?} in {:?}",
                    e.actor, e.encounter
                ));
            }
            _ => {}
        }
    }
    bad
}

#[test]
fn honest_run_improves_accuracy() {
    let m = run(&SimConfig::default()).unwrap();
    let s = m.summary();
    assert!(
        s.final_mean_accuracy > s.initial_mean_accuracy + 0.3,
        "{s:?}"
    );
    assert!(
        s.honest_below_threshold.is_empty(),
        "honest neighbors slashed out: {:?}",
        s.honest_below_threshold
    );
    assert_eq!(m.accuracy.len(), 101 * 50);
    assert_eq!(m.encounters.len(), 2_500);
}

#[test]
fn random_model_attackers_lose_their_stake() {
    let cfg = attacked(10);
    let m = run(&cfg).unwrap();
    let attackers = m.attackers();
    assert_eq!(attackers.len(), 10);
    for (p, b) in attackers {
        assert_eq!(b, Behavior::RandomModelAttacker);
        let series = m.stake_series(p);
        assert!(
            series.windows(2).all(|w| w[1].1 <= w[0].1),
            "{p} stake rose: {series:?}"
        );
        assert!(
            series.last().unwrap().1 < cfg.contract.stake_threshold,
            "{p} still eligible"
        );
    }
    assert!(exclusion_violations(&m, cfg.contract.stake_threshold).is_empty());
    assert!(m.summary().honest_below_threshold.is_empty());
}

#[test]
fn excluded_participants_never_act_again() {
    for kind in [
        Behavior::LabelFlipAttacker,
        Behavior::MaliciousPositiveValidator,
    ] {
        let cfg = SimConfig {
            attackers: AttackerCounts::only(kind, 4),
            ..small()
        };
        let m = run(&cfg).unwrap();
        let bad = exclusion_violations(&m, cfg.contract.stake_threshold);
        assert!(bad.is_empty(), "{kind:?}: {bad:?}");
    }
}

#[test]
fn incentives_recover_from_attack() {
    let with = attack_study(&SimConfig::default(), &[0, 10], true).unwrap();
    let without = attack_study(&SimConfig::default(), &[10], false).unwrap();
    let (clean, hit, base) = (&with[0], &with[1], &without[0]);
    // Early on the attacked run tracks the unprotected baseline more than the clean run.
    assert!(hit.rounds[5].mean < clean.rounds[5].mean);
    assert!(hit.final_mean() > base.final_mean() + 0.2);
    assert!(clean.final_mean() - hit.final_mean() < 0.05);
}

#[test]
fn clean_runs_differ_only_by_rejections() {
    let cfg = small();
    let on = attack_study(&cfg, &[0], true).unwrap();
    let off = attack_study(&cfg, &[0], false).unwrap();
    let m = run(&cfg).unwrap();
    if m.encounters.iter().all(|e| e.accepted) {
        assert_eq!(on[0].rounds, off[0].rounds);
    }
    assert!((on[0].final_mean() - off[0].final_mean()).abs() < 0.05);
}

#[test]
fn runs_are_deterministic() {
    let a = run(&small()).unwrap();
    let b = run(&small()).unwrap();
    assert_eq!(a.accuracy, b.accuracy);
    assert_eq!(a.events, b.events);
    let c = run(&SimConfig {
        master_seed: 7,
        ..small()
    })
    .unwrap();
    assert_ne!(a.accuracy, c.accuracy);
}

#[test]
fn gossip_and_non_iid_runs_complete() {
    let mut cfg = SimConfig {
        algorithm: Algorithm::Gossip,
        ..small()
    };
    cfg.partition.mode = PartitionMode::NonIid;
    let s = run(&cfg).unwrap().summary();
    assert!(s.encounters > 0);
    assert!(s.final_mean_accuracy > s.initial_mean_accuracy);

    let hetero = SimConfig {
        hidden_widths: vec![0, 8, 16],
        ..small()
    };
    assert!(run(&hetero).unwrap().summary().encounters > 0);
}

#[test]
fn infeasible_configs_are_rejected() {
    let mut cfg = small();
    cfg.partition.mode = PartitionMode::NonIid;
    cfg.partition.classes_per_node = 11;
    assert!(run(&cfg).is_err());

    let mut cfg = small();
    cfg.contract.initial_stake = 50;
    assert!(run(&cfg).is_err(), "nobody is eligible to validate");

    let cfg = SimConfig {
        attackers: AttackerCounts::only(Behavior::RandomModelAttacker, 13),
        ..small()
    };
    assert!(run(&cfg).is_err());
    assert!(attack_study(&small(), &[12], true).is_err());
    assert!(voting_sweep(&attacked(1), &[0.03], &[3]).is_err());
}

#[test]
fn voting_sweep_is_sorted_and_saturates() {
    let cells = voting_sweep(&small(), &[1.0, 0.0], &[5, 3]).unwrap();
    let keys: Vec<_> = cells.iter().map(|c| (c.tau, c.voters)).collect();
    assert_eq!(keys, vec![(0.0, 3), (0.0, 5), (1.0, 3), (1.0, 5)]);
    assert!(cells
        .iter()
        .filter(|c| c.tau == 1.0)
        .all(|c| c.validated_fraction == 1.0));
    assert!(cells[0].validated_fraction <= cells[2].validated_fraction);
}

#[test]
fn metrics_files_have_one_row_per_key() {
    let cfg = small();
    let m = run(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    m.write_csvs(dir.path()).unwrap();
    let acc = std::fs::read_to_string(dir.path().join("accuracy.csv")).unwrap();
    assert_eq!(acc.lines().next(), Some("round,participant_id,accuracy"));
    let keys: BTreeSet<_> = acc
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(2).collect::<Vec<_>>().join(","))
        .collect();
    assert_eq!(keys.len(), (cfg.n_rounds + 1) * cfg.n_participants);
    let stakes = std::fs::read_to_string(dir.path().join("stakes.csv")).unwrap();
    assert_eq!(stakes.lines().next(), Some("block,participant_id,staked"));
    assert!(stakes.lines().last().unwrap().starts_with("20000,"));
    let enc = std::fs::read_to_string(dir.path().join("encounters.csv")).unwrap();
    assert_eq!(
        enc.lines().next(),
        Some("block,encounter_id,event,actor,amount,state_after")
    );
    let votes = std::fs::read_to_string(dir.path().join("votes.csv")).unwrap();
    assert_eq!(votes.lines().count() - 1, m.votes.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn traces_are_fair_matchings(n in 2usize..60, rounds in 1usize..40, seed: u64) {
        let t = generate_trace(n, rounds, seed);
        prop_assert_eq!(t.rounds.len(), rounds);
        for round in &t.rounds {
            prop_assert_eq!(round.len(), n / 2);
            let mut seen = BTreeSet::new();
            for &(a, b) in round {
                prop_assert!(a != b);
                prop_assert!(seen.insert(a) && seen.insert(b));
            }
        }
        let counts = t.encounter_counts(n);
        prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
    }
}
