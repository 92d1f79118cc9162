use oupinball_core::bounds::BoundsError;
use oupinball_core::isoperimetry::IsoError;
use oupinball_core::pinball::SimError;
use oupinball_core::special::SpecialError;
use oupinball_core::spectral::SpectralError;
use oupinball_core::GeometryError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("spectral estimator: {0}")]
    Spectral(SpectralError),
    #[error("simulation: {0}")]
    Simulation(SimError),
    #[error("special function: {0}")]
    Special(SpecialError),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Spectral(_) => 3,
            CliError::Simulation(_) => 4,
            CliError::Special(_) => 5,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Config(_) => "invalid_config",
            CliError::Spectral(SpectralError::Disconnected { .. }) => "domain_disconnected",
            CliError::Spectral(_) => "spectral_failure",
            CliError::Simulation(_) => "simulation_failure",
            CliError::Special(_) => "special_function_failure",
        }
    }

    /// One-line JSON document for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
        }
        serde_json::to_string(&Doc {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        })
        .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SpecialError> for CliError {
    fn from(e: SpecialError) -> Self {
        match e {
            SpecialError::InvalidInput(m) => CliError::Config(m),
            e => CliError::Special(e),
        }
    }
}

impl From<IsoError> for CliError {
    fn from(e: IsoError) -> Self {
        match e {
            IsoError::Special(s) => s.into(),
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Special(s) => s.into(),
            BoundsError::Iso(i) => i.into(),
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Input(m) => CliError::Config(m),
            SpectralError::Geometry(g) => g.into(),
            e => CliError::Spectral(e),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Input(m) => CliError::Config(m),
            SimError::Geometry(g) => g.into(),
            SimError::Special(s) => s.into(),
            SimError::Iso(i) => i.into(),
            e => CliError::Simulation(e),
        }
    }
}
