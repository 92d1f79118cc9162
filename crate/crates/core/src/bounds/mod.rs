//! Closed-form upper and lower bounds on the Poincare constant and their aggregation.

mod catalogue;
mod formulas;
mod lyapunov;
mod report;

pub use catalogue::{aggregate, AggregateOptions, BoundCatalogue};
pub use formulas::*;
pub use lyapunov::{verify_local_lyapunov, LyapunovCheck};
pub use report::{BoundReport, FreeConstant, Quantity, Side};

use crate::geometry::GeometryError;
use crate::isoperimetry::IsoError;
use crate::special::SpecialError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Iso(#[from] IsoError),
}

/// Values given to the unspecified universal constants. They only scale reports flagged
/// `explicit = false`, which never enter the envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreeConstants {
    pub c: f64,
    pub big_c: f64,
    pub c_prime: f64,
    pub big_c_prime: f64,
    pub c_d: f64,
    pub big_c_d: f64,
    pub c_of_d: f64,
    pub c_plus: f64,
}

impl Default for FreeConstants {
    fn default() -> Self {
        FreeConstants {
            c: 1.0,
            big_c: 1.0,
            c_prime: 1.0,
            big_c_prime: 1.0,
            c_d: 1.0,
            big_c_d: 1.0,
            c_of_d: 1.0,
            c_plus: 1.0,
        }
    }
}
