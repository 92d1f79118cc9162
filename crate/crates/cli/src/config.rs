//! Experiment configuration. Every section rejects unknown keys.

use oupinball_core::bounds::AggregateOptions;
use oupinball_core::isoperimetry::CandidateSet;
use oupinball_core::pinball::{Bins, Target};
use oupinball_core::spectral::SpectralOptions;
use oupinball_core::DomainSpec;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const SCHEMA: &str = include_str!("../config.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Bounds,
    Spectral,
    Simulate,
    #[serde(alias = "exit-time")]
    ExitTime,
    Cheeger,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Spectral => "spectral",
            Command::Simulate => "simulate",
            Command::ExitTime => "exit-time",
            Command::Cheeger => "cheeger",
            Command::Sweep => "sweep",
        }
    }

    pub fn needs_seed(self) -> bool {
        matches!(self, Command::Simulate | Command::ExitTime)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; must agree with the subcommand when present.
    #[serde(default)]
    pub command: Option<Command>,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub spec: Option<DomainSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub bounds: AggregateOptions,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub exit_time: Option<ExitSection>,
    #[serde(default)]
    pub cheeger: Option<CheegerSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub h: Vec<f64>,
    pub options: SpectralOptions,
}

impl Default for SpectralSection {
    fn default() -> Self {
        SpectralSection {
            h: vec![0.2, 0.1, 0.05],
            options: SpectralOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub start: Vec<f64>,
    #[serde(default)]
    pub target: Option<Target>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Exponential-moment orders evaluated on the hitting times.
    #[serde(default)]
    pub thetas: Vec<f64>,
    #[serde(default)]
    pub occupation: Option<Bins>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitSection {
    pub lambda: f64,
    pub r: f64,
    pub dt: f64,
    pub n_paths: usize,
    /// Laplace variables: the table compares `E exp(-theta S)` with the closed form.
    pub thetas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheegerSection {
    #[serde(default)]
    pub sets: Vec<CandidateSet>,
    /// Trap positions for the test-function lower bound at stiffness 1.
    #[serde(default)]
    pub trap_y: Vec<f64>,
    #[serde(default = "one")]
    pub trap_arm: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Obstacle radius, cube half width or trap arm.
    Radius,
    /// First coordinate of the obstacle centre (trap position).
    CenterX,
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    #[serde(default = "yes")]
    pub spectral: bool,
    /// Optional Monte Carlo evidence at every point.
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
}

fn yes() -> bool {
    true
}
