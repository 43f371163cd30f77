//! Config files and the flag syntax shared by several subcommands.

use std::path::Path;
use std::str::FromStr;

use gateset_forge::channels::{standard_library, ErrorKind, ErrorModel, GateLibrary, LibraryJson, LibraryName, Placement};
use gateset_forge::superop::{MeasurementVector, PauliTransferMatrix, PtmJson, StateVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "GATESET_FORGE_SEED";

/// Flag, then config, then `GATESET_FORGE_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(CliError::Validation(format!("{}: file is empty", path.display())));
    }
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// A standard library by name or an explicit one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LibrarySource {
    Named(LibraryName),
    Explicit(LibraryJson),
}

impl LibrarySource {
    pub fn load(&self) -> CliResult<GateLibrary> {
        match self {
            LibrarySource::Named(n) => Ok(standard_library(*n)),
            LibrarySource::Explicit(j) => Ok(GateLibrary::from_json(j)?),
        }
    }
}

/// `kind:strength[:seed][:pre|post]`, e.g. `depolarizing:1e-3` or
/// `random-unitary-per-gate:0.02:5`.
pub fn parse_error_spec(s: &str) -> CliResult<ErrorModel> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Validation(format!("error model {s:?} is not kind:strength[:seed][:pre|post]"));
    if parts.len() < 2 || parts.len() > 4 {
        return Err(bad());
    }
    let kind = ErrorKind::from_str(parts[0])?;
    let strength: f64 = parts[1].parse().map_err(|_| bad())?;
    let mut model = ErrorModel::new(kind, strength);
    for p in &parts[2..] {
        match *p {
            "pre" => model = model.with_placement(Placement::PreGate),
            "post" => model = model.with_placement(Placement::PostGate),
            other => model = model.with_seed(other.parse().map_err(|_| bad())?),
        }
    }
    model.validate()?;
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// `m_ij` around one channel.
    Pairs,
    /// `m_ijk` over the whole library.
    #[default]
    Triples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementKind {
    /// `|0⟩⟨0|`.
    #[default]
    Projector,
    /// Pauli Z.
    Z,
}

impl MeasurementKind {
    pub fn vector(&self, dim: usize) -> CliResult<MeasurementVector> {
        Ok(match self {
            MeasurementKind::Projector => MeasurementVector::ground_projector(dim)?,
            MeasurementKind::Z => MeasurementVector::pauli_z(dim)?,
        })
    }
}

/// `simulate` configuration; every field can be overridden by a flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub library: LibrarySource,
    #[serde(default)]
    pub errors: Vec<ErrorModel>,
    /// Experimental noise power `N`.
    #[serde(default = "default_noise")]
    pub noise_power: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub measurement: MeasurementKind,
    /// Channel probed by pair experiments (identity if absent).
    #[serde(default)]
    pub channel: Option<PtmJson>,
}

fn default_noise() -> f64 {
    gateset_forge::sim::DEFAULT_NOISE_POWER
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            library: LibrarySource::Named(LibraryName::CardinalSix),
            errors: Vec::new(),
            noise_power: default_noise(),
            seed: None,
            experiment: ExperimentKind::Triples,
            measurement: MeasurementKind::Projector,
            channel: None,
        }
    }
}

/// A PTM or a library on disk, told apart by its keys.
pub enum ChannelFile {
    Single(PauliTransferMatrix),
    Library(GateLibrary),
}

pub fn read_channel_file(path: &Path) -> CliResult<ChannelFile> {
    let value: serde_json::Value = read_json(path)?;
    if value.get("gates").is_some() {
        let j: LibraryJson = serde_json::from_value(value)?;
        Ok(ChannelFile::Library(GateLibrary::from_json(&j)?))
    } else {
        let j: PtmJson = serde_json::from_value(value)?;
        Ok(ChannelFile::Single(PauliTransferMatrix::from_json(&j)?))
    }
}

impl ChannelFile {
    /// A lone PTM becomes a one-gate library labelled after the file.
    pub fn into_library(self, label: &str) -> CliResult<GateLibrary> {
        match self {
            ChannelFile::Library(l) => Ok(l),
            ChannelFile::Single(r) => Ok(GateLibrary::new(vec![label.to_string()], vec![r])?),
        }
    }
}

pub fn ground_state(dim: usize) -> CliResult<StateVector> {
    Ok(StateVector::ground(dim)?)
}
