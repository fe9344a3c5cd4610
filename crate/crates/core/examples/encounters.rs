//! Gossip and OppCL encounters against honest and malicious neighbors.

use idml::learning::{
    generate_synthetic, init_model, partition, train, Arch, PartitionSpec, TrainConfig,
};
use idml::protocol::{
    run_encounter, Algorithm, Behavior, Directory, EncounterConfig, Faults, Peer,
};
use idml::{ContractConfig, Dataset, Ledger, ModelParams, ParticipantId};

struct Town {
    data: Vec<Dataset>,
    behavior: Vec<Behavior>,
}

impl Directory for Town {
    fn local_data(&self, p: ParticipantId) -> Option<&Dataset> {
        self.data.get(p.0 as usize)
    }
    fn behavior(&self, p: ParticipantId) -> Option<Behavior> {
        self.behavior.get(p.0 as usize).copied()
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 8;
    let pool = generate_synthetic(4, 8, 200, 1.0, 3)?;
    let spec = PartitionSpec {
        n_nodes: n,
        ..PartitionSpec::default()
    };
    let mut behavior = vec![Behavior::Honest; n];
    behavior[1] = Behavior::RandomModelAttacker;
    let town = Town {
        data: partition(&pool, &spec, 4)?,
        behavior,
    };
    let arch = Arch::linear(8, 4)?;
    let warmup = TrainConfig {
        steps: 300,
        ..TrainConfig::default()
    };
    let models: Vec<ModelParams> = (0..n)
        .map(|i| train(&init_model(&arch, i as u64), &town.data[i], &warmup))
        .collect::<Result<_, _>>()?;

    let mut ledger = Ledger::new(ContractConfig::default())?;
    for i in 0..n as u32 {
        ledger.exchange_tokens(ParticipantId(i), 1_000)?;
        ledger.stake(ParticipantId(i), 200)?;
    }
    let peer = |i: usize| Peer {
        id: ParticipantId(i as u32),
        model: &models[i],
        data: &town.data[i],
        behavior: town.behavior[i],
    };
    for algorithm in [Algorithm::Gossip, Algorithm::Oppcl] {
        for (learner, neighbor) in [(0, 2), (0, 1)] {
            let cfg = EncounterConfig {
                reward: 40,
                tau: 0.03,
                validators_k: 3,
                train: TrainConfig::default(),
                seed: 11,
                faults: Faults::default(),
                shared_validation: None,
            };
            let res = run_encounter(
                algorithm,
                peer(learner),
                peer(neighbor),
                &town,
                &mut ledger,
                &cfg,
            )?;
            println!(
                "{algorithm:?} with {:?}: {} yes / {} no -> {:?}, model kept: {}, neighbor net {:+}",
                town.behavior[neighbor],
                res.tally.yes,
                res.tally.no,
                res.finalization.settlement,
                res.accepted,
                res.finalization.net_for(ParticipantId(neighbor as u32)),
            );
        }
    }
    Ok(())
}
