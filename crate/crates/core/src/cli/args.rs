use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::learning::PartitionMode;
use crate::protocol::Algorithm;

#[derive(Debug, Parser)]
#[command(
    name = "idml",
    version,
    about = "Incentive ledger and opportunistic learning simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write the metric files.
    Simulate(SimulateArgs),
    /// Validated fraction over a grid of tolerances and voter counts.
    VotingSweep(SweepArgs),
    /// Honest accuracy curves for several attacker counts.
    AttackStudy(AttackArgs),
    /// Gas breakdown for one encounter.
    Cost(CostArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Gossip,
    Oppcl,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Gossip => Algorithm::Gossip,
            AlgorithmArg::Oppcl => Algorithm::Oppcl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionArg {
    Iid,
    Noniid,
}

impl From<PartitionArg> for PartitionMode {
    fn from(p: PartitionArg) -> Self {
        match p {
            PartitionArg::Iid => PartitionMode::Iid,
            PartitionArg::Noniid => PartitionMode::NonIid,
        }
    }
}

/// Options shared by the simulation subcommands.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML config; omitted keys take their defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmArg>,
    #[arg(long, value_enum)]
    pub partition: Option<PartitionArg>,
    #[arg(long, value_name = "FLOAT")]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Validators invited per encounter; also the vote threshold.
    #[arg(long, value_name = "N")]
    pub voters: Option<usize>,
    /// Number of attackers of the configured attack kind.
    #[arg(long, value_name = "N")]
    pub attackers: Option<usize>,
    #[arg(long, value_enum)]
    pub incentives: Option<Switch>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_values_t = [0.0, 0.03, 1.0])]
    pub taus: Vec<f64>,
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_values_t = [3, 5, 7])]
    pub voters: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_values_t = [0, 3, 10])]
    pub attackers: Vec<usize>,
    #[arg(long, value_enum, default_value = "on")]
    pub incentives: Switch,
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub votes: u64,
}
