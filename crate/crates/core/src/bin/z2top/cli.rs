use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "z2top", version, about = "Integrable tops on the binary projective spaces PG(n-1, 2)")]
pub struct Cli {
    /// TOML file with default settings; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Points, lines and hyperplanes of PG(n-1, 2).
    Geometry(GeometryArgs),
    /// The equations of motion, one line per component.
    Equations(EquationsArgs),
    /// Integrate the top and report invariant drift.
    Run(RunArgs),
    /// Compare the full flow against the scalar reduction.
    Reduce(ReduceArgs),
    /// Integrate the (k+1)-variable product flow.
    Zk(ZkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Dot,
    Text,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Dot => "dot",
            Format::Text => "text",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Labelling {
    Canonical,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coords {
    Omega,
    A,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[arg(long)]
    pub n: Option<u32>,
    /// json, dot or text (default json).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EquationsArgs {
    #[arg(long)]
    pub n: Option<u32>,
    /// canonical (default) or paper; paper needs n <= 4.
    #[arg(long, value_enum)]
    pub labelling: Option<Labelling>,
    /// text (default) or json.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Where the initial state comes from and how far to integrate.
#[derive(Debug, Args)]
pub struct StateArgs {
    /// Literal initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub omega0: Option<Vec<f64>>,
    /// Seed for a random initial state (used when --omega0 is absent; default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampling range `lo,hi` for random states (default 0.1,0.5).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub range: Option<Vec<f64>>,
    /// End time; defaults to the pole-free guarded horizon of the initial state.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Sample spacing; defaults to t_end / 100.
    #[arg(long)]
    pub output_interval: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, value_enum)]
    pub labelling: Option<Labelling>,
    /// Integrate in omega (default) or a coordinates.
    #[arg(long, value_enum)]
    pub coords: Option<Coords>,
    /// csv (default) or json.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Exit with status 6 when the worst invariant drift exceeds this.
    #[arg(long)]
    pub drift_threshold: Option<f64>,
    #[command(flatten)]
    pub state: StateArgs,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub n: Option<u32>,
    /// json (default) or text.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub state: StateArgs,
}

#[derive(Debug, Args)]
pub struct ZkArgs {
    #[arg(long)]
    pub k: Option<u32>,
    /// csv (default) or json.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub drift_threshold: Option<f64>,
    #[command(flatten)]
    pub state: StateArgs,
}

/// Settings read from `--config`. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub omega0: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub range: Option<[f64; 2]>,
    pub t_end: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub output_interval: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub labelling: Option<Labelling>,
    pub coords: Option<Coords>,
    pub drift_threshold: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

pub const DEFAULT_RANGE: (f64, f64) = (0.1, 0.5);

/// Flags merged over the config file.
#[derive(Debug, Clone)]
pub struct StateSettings {
    pub omega0: Option<Vec<f64>>,
    pub seed: u64,
    pub range: (f64, f64),
    pub t_end: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub output_interval: Option<f64>,
    pub out: Option<PathBuf>,
}

impl StateArgs {
    pub fn merge(self, file: &FileConfig) -> Result<StateSettings, CliError> {
        let range = match self.range {
            Some(r) if r.len() == 2 => (r[0], r[1]),
            Some(r) => return Err(CliError::Usage(format!("--range takes lo,hi, got {} values", r.len()))),
            None => file.range.map_or(DEFAULT_RANGE, |[lo, hi]| (lo, hi)),
        };
        if !(range.0 < range.1) {
            return Err(CliError::Usage(format!("--range needs lo < hi, got {},{}", range.0, range.1)));
        }
        Ok(StateSettings {
            omega0: self.omega0.or_else(|| file.omega0.clone()),
            seed: self.seed.or(file.seed).unwrap_or(0),
            range,
            t_end: self.t_end.or(file.t_end),
            rel_tol: self.rel_tol.or(file.rel_tol),
            abs_tol: self.abs_tol.or(file.abs_tol),
            output_interval: self.output_interval.or(file.output_interval),
            out: self.out.or_else(|| file.out.clone()),
        })
    }
}

/// Picks the flag, then the file value, then the default, and checks it is
/// one of the formats the command accepts.
pub fn pick_format(flag: Option<Format>, file: Option<Format>, allowed: &[Format]) -> Result<Format, CliError> {
    let f = flag.or(file).unwrap_or(allowed[0]);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let names: Vec<_> = allowed.iter().map(|f| f.name()).collect();
        Err(CliError::Usage(format!("format {} is not available here (use {})", f.name(), names.join(", "))))
    }
}

pub fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("{flag} is required (flag or config file)")))
}
