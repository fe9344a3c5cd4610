use rand::seq::index;

use super::{SimConfig, SimError};
use crate::learning::{
    flip_labels, generate_synthetic, init_model, partition, Arch, Dataset, ModelParams,
};
use crate::ledger::ParticipantId;
use crate::protocol::{Behavior, Directory};
use crate::seed;

/// A simulated device.
#[derive(Debug, Clone)]
pub struct Participant {
    pub id: ParticipantId,
    /// Local data; already label-flipped for label-flip attackers.
    pub dataset: Dataset,
    pub model: ModelParams,
    pub behavior: Behavior,
}

#[derive(Debug, Clone)]
pub struct Population {
    pub participants: Vec<Participant>,
    /// Held-out set for reported accuracy.
    pub test: Dataset,
    /// Held-out set for shared-set validation.
    pub validation: Dataset,
}

impl Population {
    pub fn get(&self, p: ParticipantId) -> Option<&Participant> {
        self.participants.get(p.0 as usize)
    }

    pub fn honest(&self) -> impl Iterator<Item = &Participant> {
        self.participants.iter().filter(|p| p.behavior.is_honest())
    }
}

impl Directory for Population {
    fn local_data(&self, p: ParticipantId) -> Option<&Dataset> {
        self.get(p).map(|x| &x.dataset)
    }

    fn behavior(&self, p: ParticipantId) -> Option<Behavior> {
        self.get(p).map(|x| x.behavior)
    }
}

/// Behavior per participant id; attackers are placed at seeded random ids.
pub fn assign_behaviors(cfg: &SimConfig) -> Vec<Behavior> {
    let n = cfg.n_participants;
    let mut behaviors = vec![Behavior::Honest; n];
    let a = &cfg.attackers;
    let kinds = std::iter::repeat_n(Behavior::LabelFlipAttacker, a.label_flip)
        .chain(std::iter::repeat_n(
            Behavior::RandomModelAttacker,
            a.random_model,
        ))
        .chain(std::iter::repeat_n(
            Behavior::MaliciousPositiveValidator,
            a.malicious_positive,
        ));
    let mut rng = seed::rng(seed::derive(cfg.master_seed, "attackers", 0));
    let picks = index::sample(&mut rng, n, a.total().min(n));
    for (slot, kind) in picks.into_iter().zip(kinds) {
        behaviors[slot] = kind;
    }
    behaviors
}

pub fn build_population(cfg: &SimConfig) -> Result<Population, SimError> {
    let cfg = cfg.resolved();
    let d = &cfg.data;
    let n = cfg.n_participants;
    let train_rows = n * d.samples_per_participant;
    let total = train_rows + d.test_samples + d.validation_samples;
    let per_class = total.div_ceil(d.num_classes);
    let s = cfg.master_seed;
    let pool = generate_synthetic(
        d.num_classes,
        d.dims,
        per_class,
        d.spread,
        seed::derive(s, "data", 0),
    )?;
    let (test, rest) = pool.split(d.test_samples, seed::derive(s, "split", 0))?;
    let (validation, train_pool) = rest.split(d.validation_samples, seed::derive(s, "split", 1))?;
    let shares = partition(&train_pool, &cfg.partition, seed::derive(s, "partition", 0))?;
    let behaviors = assign_behaviors(&cfg);
    let participants = shares
        .into_iter()
        .zip(behaviors)
        .enumerate()
        .map(|(i, (share, behavior))| {
            let width = cfg.hidden_widths[i % cfg.hidden_widths.len()];
            let arch = Arch::with_hidden(d.dims, width, d.num_classes)?;
            let dataset = if behavior == Behavior::LabelFlipAttacker {
                flip_labels(&share, seed::derive(s, "flip", i as u64))
            } else {
                share
            };
            Ok(Participant {
                id: ParticipantId(i as u32),
                dataset,
                model: init_model(&arch, seed::derive(s, "init", i as u64)),
                behavior,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(Population {
        participants,
        test,
        validation,
    })
}
