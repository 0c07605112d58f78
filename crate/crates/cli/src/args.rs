//! Command-line flags and their mapping onto a batch configuration.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, ValueEnum};
use hyperqkd_core::adversary::EveBasisStrategy;
use hyperqkd_core::{AttackConfig, BasisType, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackArg {
    None,
    Single,
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EveBasesArg {
    /// Eve picks each basis uniformly at random, every round
    Random,
    /// Eve always measures in the type-I basis
    Same,
    /// Eve measures photon 1 in type-I and photon 2 in type-II (double only)
    Different,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "hyperqkd",
    version,
    about = "Monte Carlo simulation of hyperentangled Bell-state key distribution"
)]
struct Cli {
    /// Number of rounds to simulate
    #[arg(long, value_name = "N", allow_negative_numbers = true, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    rounds: u64,

    /// Master seed
    #[arg(
        long,
        value_name = "S",
        allow_negative_numbers = true,
        default_value_t = 42
    )]
    seed: u64,

    /// Per-photon detection efficiency in (0, 1]
    #[arg(long, value_name = "F", allow_negative_numbers = true, default_value_t = 1.0, value_parser = efficiency)]
    efficiency: f64,

    /// Eavesdropping model
    #[arg(long, value_enum, default_value_t = AttackArg::None)]
    attack: AttackArg,

    /// How Eve chooses her measurement bases
    #[arg(long, value_enum, default_value_t = EveBasesArg::Random)]
    eve_bases: EveBasesArg,

    /// Fraction of same-basis rounds disclosed for verification, in [0, 1)
    #[arg(long, value_name = "F", allow_negative_numbers = true, default_value_t = 0.1, value_parser = verify_fraction)]
    verify_fraction: f64,

    /// Worker threads
    #[arg(long, value_name = "N", allow_negative_numbers = true, default_value_t = 1, value_parser = workers)]
    workers: usize,

    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Compare the estimators against the expected values and fail on any miss
    #[arg(long)]
    check: bool,

    /// Write the report here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Omit the generation timestamp so identical runs give identical bytes
    #[arg(long)]
    deterministic_output: bool,
}

fn efficiency(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1]"))
    }
}

fn verify_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1)"))
    }
}

fn workers(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("at least one worker is required".to_string())
    }
}

/// Everything that shapes the report but not the simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub format: Format,
    pub check: bool,
    pub out: Option<PathBuf>,
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub config: SimConfig,
    pub output: OutputOptions,
}

/// Parses the flags (without the program name) into a batch configuration.
pub fn parse_config<I, T>(args: I) -> Result<Invocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("hyperqkd")).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv)?;

    let strategy = match cli.eve_bases {
        EveBasesArg::Random => EveBasisStrategy::RandomPerRound,
        EveBasesArg::Same => EveBasisStrategy::FixedSame(BasisType::TypeI),
        EveBasesArg::Different => EveBasisStrategy::FixedDifferent(BasisType::TypeI),
    };
    let attack = match cli.attack {
        AttackArg::None => None,
        AttackArg::Single if cli.eve_bases == EveBasesArg::Different => {
            return Err(Cli::command().error(
                ErrorKind::ArgumentConflict,
                "--eve-bases different needs two intercepted photons; use it with --attack double",
            ));
        }
        AttackArg::Single => Some(AttackConfig::single(strategy)),
        AttackArg::Double => Some(AttackConfig::double(strategy)),
    };

    Ok(Invocation {
        config: SimConfig {
            rounds: cli.rounds,
            seed: cli.seed,
            efficiency: cli.efficiency,
            attack,
            verify_fraction: cli.verify_fraction,
            workers: cli.workers,
        },
        output: OutputOptions {
            format: cli.format,
            check: cli.check,
            out: cli.out,
            deterministic: cli.deterministic_output,
        },
    })
}
