use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LedgerError;

/// Token amount in base units.
pub type Tokens = u64;

/// Block height or block count.
pub type Block = u64;

/// A fraction in `[0, 1]` stored exactly as parts per million.
///
/// Serializes as a decimal number so config files read naturally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Share(u32);

impl Share {
    pub const DENOMINATOR: u32 = 1_000_000;
    pub const ZERO: Share = Share(0);
    pub const ONE: Share = Share(Self::DENOMINATOR);

    pub fn from_ppm(ppm: u32) -> Result<Self, LedgerError> {
        if ppm > Self::DENOMINATOR {
            return Err(LedgerError::InvalidConfig(format!(
                "share {ppm} ppm exceeds 1"
            )));
        }
        Ok(Share(ppm))
    }

    /// Rounds to the nearest part per million.
    pub fn from_fraction(f: f64) -> Result<Self, LedgerError> {
        if !f.is_finite() || !(0.0..=1.0).contains(&f) {
            return Err(LedgerError::InvalidConfig(format!(
                "share {f} outside [0, 1]"
            )));
        }
        Ok(Share((f * f64::from(Self::DENOMINATOR)).round() as u32))
    }

    pub fn ppm(self) -> u32 {
        self.0
    }

    pub fn complement(self) -> Share {
        Share(Self::DENOMINATOR - self.0)
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / f64::from(Self::DENOMINATOR)
    }

    /// `floor(self * amount)`.
    pub fn floor_mul(self, amount: Tokens) -> Tokens {
        ((u128::from(amount) * u128::from(self.0)) / u128::from(Self::DENOMINATOR)) as Tokens
    }
}

impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

impl Serialize for Share {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Share {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = f64::deserialize(d)?;
        Share::from_fraction(f).map_err(serde::de::Error::custom)
    }
}

/// Contract-wide parameters. Defaults follow the reference deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractConfig {
    /// Minimum stake (inclusive) to serve as neighbor or validator.
    pub stake_threshold: Tokens,
    /// Tokens each participant exchanges on joining.
    pub initial_exchange: Tokens,
    /// Tokens each participant stakes on joining.
    pub initial_stake: Tokens,
    /// Votes needed before finalization may run early.
    pub voting_threshold: u32,
    /// Blocks from opening after which an encounter may be timed out.
    pub max_voting_blocks: Block,
    /// Neighbor's share of the reward; validators share the complement.
    pub neighbor_share: Share,
    /// Reward the learner prepays per encounter.
    pub default_reward: Tokens,
    /// Part of the prepayment paid to the neighbor when an encounter is incomplete.
    pub incomplete_fraction: Share,
}

impl Default for ContractConfig {
    fn default() -> Self {
        Self {
            stake_threshold: 100,
            initial_exchange: 1_000_000,
            initial_stake: 200,
            voting_threshold: 3,
            max_voting_blocks: 50_000,
            neighbor_share: Share(800_000),
            default_reward: 40,
            incomplete_fraction: Share(200_000),
        }
    }
}

impl ContractConfig {
    /// Validators' share of the reward.
    pub fn validator_share(&self) -> Share {
        self.neighbor_share.complement()
    }

    pub fn validate(&self) -> Result<(), LedgerError> {
        let bad = |m: &str| Err(LedgerError::InvalidConfig(m.to_string()));
        if self.stake_threshold > self.initial_stake {
            return bad("stake_threshold must not exceed initial_stake");
        }
        if self.initial_stake > self.initial_exchange {
            return bad("initial_stake must not exceed initial_exchange");
        }
        if self.neighbor_share == Share::ZERO || self.neighbor_share == Share::ONE {
            return bad("neighbor_share must lie strictly between 0 and 1");
        }
        if self.incomplete_fraction == Share::ONE {
            return bad("incomplete_fraction must be below 1");
        }
        if self.voting_threshold == 0 {
            return bad("voting_threshold must be positive");
        }
        if self.default_reward == 0 {
            return bad("default_reward must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn share_complement_sums_to_one() {
        let s = Share::from_fraction(0.8).unwrap();
        assert_eq!(s.ppm() + s.complement().ppm(), Share::DENOMINATOR);
        assert_eq!(s.floor_mul(100), 80);
        assert_eq!(s.complement().floor_mul(100), 20);
    }

    #[test]
    fn share_rejects_out_of_range() {
        assert!(Share::from_fraction(1.5).is_err());
        assert!(Share::from_fraction(-0.1).is_err());
        assert!(Share::from_fraction(f64::NAN).is_err());
        assert!(Share::from_ppm(1_000_001).is_err());
    }

    #[test]
    fn defaults_are_consistent() {
        let c = ContractConfig::default();
        c.validate().unwrap();
        assert_eq!(c.stake_threshold, 100);
        assert_eq!(c.initial_exchange, 1_000_000);
        assert_eq!(c.initial_stake, 200);
        assert_eq!(c.voting_threshold, 3);
        assert_eq!(c.max_voting_blocks, 50_000);
    }

    #[test]
    fn threshold_above_initial_stake_is_invalid() {
        let c = ContractConfig {
            stake_threshold: 300,
            ..ContractConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
