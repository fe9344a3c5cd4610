//! Config loading, subcommands and artifact emission behind the `idml` binary.
//!
//! Every subcommand is a pure function of the config file, the flags and the
//! seed. Exit status is 0 on success, 2 on a config error and 3 on a runtime
//! failure.

mod args;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;
use thiserror::Error;

use crate::ledger::gas::{gas_breakdown, gas_total_per_encounter, GasLine};
use crate::simulation::{
    self, AttackCurve, AttackerCounts, SimConfig, SimError, Summary, SweepCell,
};

pub use args::{
    AlgorithmArg, AttackArgs, Cli, Command, CommonArgs, CostArgs, PartitionArg, SimulateArgs,
    SweepArgs, Switch,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config { .. } => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Reproducibility record echoed into every `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub config: SimConfig,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    pub tool_version: String,
}

impl RunManifest {
    fn new(command: &str, common: &CommonArgs, config: SimConfig) -> Self {
        Self {
            command: command.into(),
            config_path: common.config.clone(),
            master_seed: config.master_seed,
            config,
            out_dir: common.out.clone(),
            tool_version: format!("idml {}", env!("CARGO_PKG_VERSION")),
        }
    }
}

/// Parses a TOML config. Missing keys take their defaults and unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<SimConfig, CliError> {
    let cfg: SimConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn base_config(common: &CommonArgs) -> Result<SimConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(a) = common.algorithm {
        cfg.algorithm = a.into();
    }
    if let Some(p) = common.partition {
        cfg.partition.mode = p.into();
    }
    if let Some(tau) = common.tau {
        cfg.tau = tau;
    }
    Ok(cfg)
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn write_rows<W: Write>(
    w: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_csv_file(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    write_rows(io::BufWriter::new(f), header, rows)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct GasReport {
    total: u64,
    per_encounter_one_vote: u64,
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    manifest: &'a RunManifest,
    summary: &'a Summary,
    gas: GasReport,
}

/// Runs one simulation and writes the four CSVs plus `summary.json`.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<Summary, CliError> {
    let mut cfg = base_config(&args.common)?;
    if let Some(k) = args.voters {
        cfg.validators_k = k;
        cfg.contract.voting_threshold =
            u32::try_from(k).map_err(|_| CliError::Config(format!("--voters {k} is too large")))?;
    }
    if let Some(n) = args.attackers {
        cfg.attackers = AttackerCounts::only(cfg.attack_kind, n);
    }
    if let Some(s) = args.incentives {
        cfg.incentives = s.is_on();
    }
    cfg.validate()?;
    let cfg = cfg.resolved();
    let manifest = RunManifest::new("simulate", &args.common, cfg.clone());

    let metrics = simulation::run(&cfg)?;
    let out = &args.common.out;
    prepare_out(out)?;
    metrics.write_csvs(out).map_err(io_err(out))?;
    let summary = metrics.summary();
    let report = SimulateReport {
        manifest: &manifest,
        gas: GasReport {
            total: summary.gas_total,
            per_encounter_one_vote: gas_total_per_encounter(1),
        },
        summary: &summary,
    };
    write_json(&out.join("summary.json"), &report)?;
    Ok(summary)
}

#[derive(Serialize)]
struct SweepReport<'a> {
    manifest: &'a RunManifest,
    cells: &'a [SweepCell],
}

/// Writes `voting_sweep.csv` with rows sorted by tau then voters.
pub fn cmd_voting_sweep(args: &SweepArgs) -> Result<Vec<SweepCell>, CliError> {
    let cfg = base_config(&args.common)?;
    if args.taus.is_empty() || args.voters.is_empty() {
        return Err(CliError::Config(
            "--taus and --voters need at least one value".into(),
        ));
    }
    if let Some(bad) = args.taus.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(CliError::Config(format!(
            "--taus: {bad} is not a non-negative number"
        )));
    }
    if let Some(&k) = args.voters.iter().find(|&&k| k + 2 > cfg.n_participants) {
        return Err(CliError::Config(format!(
            "--voters: {k} validators cannot be chosen from {} participants",
            cfg.n_participants
        )));
    }
    let manifest = RunManifest::new("voting-sweep", &args.common, cfg.resolved());
    let cells = simulation::voting_sweep(&cfg, &args.taus, &args.voters)?;
    let out = &args.common.out;
    prepare_out(out)?;
    write_csv_file(
        &out.join("voting_sweep.csv"),
        &["tau", "voters", "validated_fraction"],
        cells.iter().map(|c| {
            vec![
                c.tau.to_string(),
                c.voters.to_string(),
                c.validated_fraction.to_string(),
            ]
        }),
    )?;
    write_json(
        &out.join("summary.json"),
        &SweepReport {
            manifest: &manifest,
            cells: &cells,
        },
    )?;
    Ok(cells)
}

#[derive(Serialize)]
struct CurveSummary {
    attackers: usize,
    incentives: bool,
    final_mean_accuracy: f64,
    attacker_final_stakes: Vec<(u32, u64)>,
}

#[derive(Serialize)]
struct AttackReport<'a> {
    manifest: &'a RunManifest,
    curves: Vec<CurveSummary>,
}

/// Writes `attack_curves.csv` and `attacker_stakes.csv`.
pub fn cmd_attack_study(args: &AttackArgs) -> Result<Vec<AttackCurve>, CliError> {
    let cfg = base_config(&args.common)?;
    if args.attackers.is_empty() {
        return Err(CliError::Config(
            "--attackers needs at least one value".into(),
        ));
    }
    let manifest = RunManifest::new("attack-study", &args.common, cfg.resolved());
    let curves = simulation::attack_study(&cfg, &args.attackers, args.incentives.is_on())?;
    let out = &args.common.out;
    prepare_out(out)?;
    write_csv_file(
        &out.join("attack_curves.csv"),
        &["incentives", "attackers", "round", "mean", "min", "max"],
        curves.iter().flat_map(|c| {
            c.rounds.iter().map(|r| {
                vec![
                    c.incentives.to_string(),
                    c.attackers.to_string(),
                    r.round.to_string(),
                    r.mean.to_string(),
                    r.min.to_string(),
                    r.max.to_string(),
                ]
            })
        }),
    )?;
    write_csv_file(
        &out.join("attacker_stakes.csv"),
        &["attackers", "participant_id", "block", "staked"],
        curves.iter().flat_map(|c| {
            c.attacker_stake_series.iter().flat_map(move |(p, series)| {
                series.iter().map(move |(b, s)| {
                    vec![
                        c.attackers.to_string(),
                        p.to_string(),
                        b.to_string(),
                        s.to_string(),
                    ]
                })
            })
        }),
    )?;
    let report = AttackReport {
        manifest: &manifest,
        curves: curves
            .iter()
            .map(|c| CurveSummary {
                attackers: c.attackers,
                incentives: c.incentives,
                final_mean_accuracy: c.final_mean(),
                attacker_final_stakes: c.attacker_stakes.iter().map(|(p, s)| (p.0, *s)).collect(),
            })
            .collect(),
    };
    write_json(&out.join("summary.json"), &report)?;
    Ok(curves)
}

/// Itemized gas estimate for one encounter with `votes` votes.
pub fn cmd_cost(args: &CostArgs) -> (Vec<GasLine>, u64) {
    (
        gas_breakdown(args.votes),
        gas_total_per_encounter(args.votes),
    )
}

pub fn render_cost(lines: &[GasLine], total: u64) -> String {
    let mut s = format!(
        "{:<36} {:<14} {:>6} {:>10}\n",
        "step", "payer", "count", "gas"
    );
    for l in lines {
        s.push_str(&format!(
            "{:<36} {:<14} {:>6} {:>10}\n",
            l.step.to_string(),
            l.payer.to_string(),
            l.count,
            l.gas
        ));
    }
    s.push_str(&format!(
        "{:<36} {:<14} {:>6} {:>10}\n",
        "Total", "", "", total
    ));
    s
}

fn dispatch(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Simulate(a) => {
            let s = cmd_simulate(a)?;
            Ok(format!(
                "{} encounters, {} validated, final honest accuracy {:.4}, wrote {}\n",
                s.encounters,
                s.validated_encounters,
                s.final_mean_accuracy,
                a.common.out.display()
            ))
        }
        Command::VotingSweep(a) => {
            let cells = cmd_voting_sweep(a)?;
            let mut s = String::from("tau,voters,validated_fraction\n");
            for c in cells {
                s.push_str(&format!(
                    "{},{},{}\n",
                    c.tau, c.voters, c.validated_fraction
                ));
            }
            Ok(s)
        }
        Command::AttackStudy(a) => {
            let curves = cmd_attack_study(a)?;
            let mut s = String::new();
            for c in curves {
                s.push_str(&format!(
                    "{} attackers: final honest accuracy {:.4}\n",
                    c.attackers,
                    c.final_mean()
                ));
            }
            Ok(s)
        }
        Command::Cost(a) => {
            let (lines, total) = cmd_cost(a);
            Ok(render_cost(&lines, total))
        }
    }
}

/// Parses `args`, runs the subcommand and returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("idml: {e}");
            e.exit_code()
        }
    }
}
