//! Special functions: confluent hypergeometric series, error functions, incomplete gamma,
//! radial Gaussian masses and closed forms for OU exit and hitting times.

mod dd;
mod erf;
mod gamma;
mod kummer;
mod masses;
mod ou;

use thiserror::Error;

pub use dd::Dd;
pub use erf::{erf, erfc, erfcx, gaussian_tail};
pub use gamma::{chi_square_sf, gamma_p, gamma_q, ln_gamma, ln_gamma_q, ln_upper_gamma};
pub use kummer::{kummer_1f1, B_HALF};
pub use masses::{ln_radial_gaussian_mass, radial_gaussian_mass, xi_second_moment};
pub use ou::{
    brownian_exit_moment, exit_moment_threshold, ou_exit_laplace, ou_hitting_cdf, ou_hitting_density, ExitThreshold,
    MomentValue,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{0} did not converge")]
    NotConverged(&'static str),
    #[error("overflow in {0}")]
    Overflow(&'static str),
    #[error("no zero of 1F1(a; 1/2; {z}) for a in (-50, 0)")]
    RootNotFound { z: f64 },
}
