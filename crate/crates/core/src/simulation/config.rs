use serde::{Deserialize, Serialize};

use super::SimError;
use crate::learning::{PartitionMode, PartitionSpec, TrainConfig};
use crate::ledger::ContractConfig;
use crate::protocol::{Algorithm, Behavior};

/// Attackers planted per behavior.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackerCounts {
    pub label_flip: usize,
    pub random_model: usize,
    pub malicious_positive: usize,
}

impl AttackerCounts {
    pub fn total(&self) -> usize {
        self.label_flip + self.random_model + self.malicious_positive
    }

    /// `n` attackers of one kind.
    pub fn only(kind: Behavior, n: usize) -> Self {
        let mut c = Self::default();
        match kind {
            Behavior::LabelFlipAttacker => c.label_flip = n,
            Behavior::RandomModelAttacker => c.random_model = n,
            Behavior::MaliciousPositiveValidator => c.malicious_positive = n,
            Behavior::Honest => {}
        }
        c
    }
}

/// Synthetic task shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub num_classes: usize,
    pub dims: usize,
    /// Standard deviation of each class cluster around its mean.
    pub spread: f64,
    pub samples_per_participant: usize,
    /// Shared held-out set for reported accuracy.
    pub test_samples: usize,
    /// Shared set honest validators use when `shared_validation` is on.
    pub validation_samples: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            num_classes: 10,
            dims: 16,
            spread: 1.5,
            samples_per_participant: 200,
            test_samples: 2_000,
            validation_samples: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_participants: usize,
    pub n_rounds: usize,
    pub algorithm: Algorithm,
    /// `n_nodes` always follows `n_participants`.
    pub partition: PartitionSpec,
    pub contract: ContractConfig,
    pub tau: f64,
    pub validators_k: usize,
    pub attackers: AttackerCounts,
    /// Attacker kind planted by attack studies.
    pub attack_kind: Behavior,
    pub blocks_per_round: u64,
    pub master_seed: u64,
    /// Off runs plain learning with no ledger, validation or penalties.
    pub incentives: bool,
    /// Honest validators evaluate on a shared held-out set instead of local data.
    pub shared_validation: bool,
    /// Hidden width per model size, assigned round-robin; 0 means linear.
    pub hidden_widths: Vec<usize>,
    pub data: DataConfig,
    pub train: TrainConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_participants: 50,
            n_rounds: 100,
            algorithm: Algorithm::Oppcl,
            partition: PartitionSpec::default(),
            contract: ContractConfig::default(),
            tau: 0.03,
            validators_k: 3,
            attackers: AttackerCounts::default(),
            attack_kind: Behavior::RandomModelAttacker,
            blocks_per_round: 1_000,
            master_seed: 42,
            incentives: true,
            shared_validation: false,
            hidden_widths: vec![0],
            data: DataConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

impl SimConfig {
    /// Copy with derived fields filled in.
    pub fn resolved(&self) -> SimConfig {
        let mut c = self.clone();
        c.partition.n_nodes = c.n_participants;
        c
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |field: &str, msg: String| {
            Err(SimError::Config {
                field: field.into(),
                msg,
            })
        };
        if self.n_participants < 2 {
            return bad(
                "n_participants",
                "at least two participants are needed".into(),
            );
        }
        if self.attackers.total() > self.n_participants {
            return bad(
                "attackers",
                format!(
                    "{} attackers exceed {} participants",
                    self.attackers.total(),
                    self.n_participants
                ),
            );
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return bad(
                "tau",
                format!("must be a non-negative number, got {}", self.tau),
            );
        }
        if self.hidden_widths.is_empty() {
            return bad(
                "hidden_widths",
                "list at least one width (0 for linear)".into(),
            );
        }
        if self.algorithm == Algorithm::Gossip && self.hidden_widths.len() > 1 {
            return bad(
                "hidden_widths",
                "gossip merges models and needs one shared architecture".into(),
            );
        }
        if self.partition.mode == PartitionMode::NonIid
            && self.partition.classes_per_node > self.data.num_classes
        {
            return bad(
                "partition.classes_per_node",
                format!(
                    "{} exceeds {} classes",
                    self.partition.classes_per_node, self.data.num_classes
                ),
            );
        }
        if self.data.samples_per_participant == 0 || self.data.test_samples == 0 {
            return bad("data", "sample counts must be positive".into());
        }
        if self.incentives && self.validators_k + 2 > self.n_participants {
            return bad(
                "validators_k",
                format!(
                    "{} validators cannot be chosen from {} participants",
                    self.validators_k, self.n_participants
                ),
            );
        }
        if self.incentives && self.validators_k < self.contract.voting_threshold as usize {
            return bad(
                "validators_k",
                format!(
                    "{} validators can never reach the voting threshold of {}",
                    self.validators_k, self.contract.voting_threshold
                ),
            );
        }
        self.contract.validate().map_err(|e| SimError::Config {
            field: "contract".into(),
            msg: e.to_string(),
        })?;
        self.train.validate().map_err(|e| SimError::Config {
            field: "train".into(),
            msg: e.to_string(),
        })?;
        Ok(())
    }
}
