//! Poincare constants of the Gaussian measure restricted to a punctured domain: explicit
//! bounds, a finite-volume spectral estimator, a reflected OU simulator and isoperimetric
//! test sets.

pub mod bounds;
pub mod geometry;
pub mod isoperimetry;
pub mod pinball;
pub mod quad;
pub mod special;
pub mod spectral;

pub use geometry::{DomainSpec, GeometryError, Obstacle};
