//! Reflected Ornstein-Uhlenbeck process `dX = dW - lambda X dt` on a punctured domain:
//! Euler steps with orthogonal projection back onto the closed domain.

mod exit;
mod occupation;
mod rng;
mod rotation;
mod stats;

pub use exit::{exit_interval_ou_1d, ExitSamples};
pub use occupation::{occupation_fraction, occupation_test, Bins, OccupationFraction, OccupationTest};
pub use rng::{words_per_step, PathRng};
pub use rotation::{rotation_comparison, rotation_functional, ComparisonKs, RotationPath, RotationRun};
pub use stats::{empirical_exp_moment, kolmogorov_sf, ks_statistic, mean_stderr, ExpMoment};

use crate::geometry::{DomainSpec, GeometryError};
use crate::isoperimetry::IsoError;
use crate::special::SpecialError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fresh increments tried after an ambiguous projection before the step is abandoned.
pub const MAX_RETRIES: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("path {path}: projection failed {retries} times at step {step}")]
    StepFailure { path: u64, step: u64, retries: u32 },
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Iso(#[from] IsoError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub spec: DomainSpec,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub n_paths: usize,
    pub start: Vec<f64>,
    /// Allowed overshoot into the obstacle for recorded states; defaults to the domain's
    /// boundary tolerance.
    #[serde(default)]
    pub tol: Option<f64>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.spec.validate()?;
        let lam = self.spec.lambda;
        if !(self.dt > 0.0 && self.dt <= 0.01 / lam) {
            return Err(SimError::Input(format!(
                "dt must lie in (0, 0.01/lambda], got {}",
                self.dt
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SimError::Input("horizon must be positive and finite".into()));
        }
        if self.horizon / self.dt > 1e9 {
            return Err(SimError::Input("horizon/dt exceeds 1e9 steps per path".into()));
        }
        if self.n_paths == 0 {
            return Err(SimError::Input("n_paths must be positive".into()));
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0) {
                return Err(SimError::Input("tol must be nonnegative".into()));
            }
        }
        if !self.spec.contains(&self.start)? {
            return Err(SimError::Input("start point lies inside the obstacle".into()));
        }
        Ok(())
    }

    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or_else(|| self.spec.tol_boundary())
    }

    pub fn n_steps(&self) -> u64 {
        (self.horizon / self.dt).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: Vec<f64>,
    /// The proposal left the domain and was projected back.
    pub contact: bool,
    pub displacement: f64,
}

/// One Euler step followed by projection onto the closed domain. Does not validate `spec`,
/// so `lambda = 0` gives a reflected Brownian step.
pub fn step(x: &[f64], spec: &DomainSpec, dt: f64, xi: &[f64]) -> Result<StepOutcome, GeometryError> {
    if x.len() != spec.dim || xi.len() != spec.dim {
        return Err(GeometryError::DimensionMismatch {
            expected: spec.dim,
            got: if x.len() != spec.dim { x.len() } else { xi.len() },
        });
    }
    let sq = dt.sqrt();
    let proposal: Vec<f64> = x
        .iter()
        .zip(xi)
        .map(|(a, z)| a - spec.lambda * a * dt + sq * z)
        .collect();
    if spec.obstacle.contains(&proposal) {
        return Ok(StepOutcome {
            state: proposal,
            contact: false,
            displacement: 0.0,
        });
    }
    let state = spec.obstacle.project(&proposal)?;
    let displacement = state
        .iter()
        .zip(&proposal)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(StepOutcome {
        state,
        contact: true,
        displacement,
    })
}

/// Set whose first visit ends a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Target {
    Whole,
    /// `x[axis] >= threshold`.
    HalfSpace {
        axis: usize,
        threshold: f64,
    },
    /// `|x[axis]| >= half_width`.
    SlabExit {
        axis: usize,
        half_width: f64,
    },
    /// Closed ball.
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
}

impl Target {
    pub fn validate(&self, dim: usize) -> Result<(), SimError> {
        match self {
            Target::Whole => Ok(()),
            Target::HalfSpace { axis, threshold } if *axis < dim && threshold.is_finite() => Ok(()),
            Target::SlabExit { axis, half_width } if *axis < dim && *half_width > 0.0 => Ok(()),
            Target::Ball { center, radius } if center.len() == dim && *radius >= 0.0 => Ok(()),
            _ => Err(SimError::Input(format!("target {self:?} does not fit dimension {dim}"))),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Target::Whole => true,
            Target::HalfSpace { axis, threshold } => x[*axis] >= *threshold,
            Target::SlabExit { axis, half_width } => x[*axis].abs() >= *half_width,
            Target::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>() <= radius * radius
            }
        }
    }

    /// Probability that a Brownian bridge with variance `var` between two states outside
    /// the target touched a flat target face in between. Zero for targets without one.
    fn bridge_probability(&self, a: &[f64], b: &[f64], var: f64) -> f64 {
        let cross = |ga: f64, gb: f64| (-2.0 * ga * gb / var).exp();
        match self {
            Target::HalfSpace { axis, threshold } => cross(threshold - a[*axis], threshold - b[*axis]),
            Target::SlabExit { axis, half_width } => {
                let (xa, xb) = (a[*axis], b[*axis]);
                let up = cross(half_width - xa, half_width - xb);
                let down = cross(half_width + xa, half_width + xb);
                1.0 - (1.0 - up) * (1.0 - down)
            }
            _ => 0.0,
        }
    }

    /// Flat targets get a bridge correction and a mid-step hitting time.
    fn is_flat(&self) -> bool {
        matches!(self, Target::HalfSpace { .. } | Target::SlabExit { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    pub path: u64,
    pub hit_time: Option<f64>,
    pub censored: bool,
    pub contacts: u64,
    /// Sum of projection distances: a discrete local-time proxy.
    pub displacement_sum: f64,
    pub final_state: Vec<f64>,
    pub retries: u32,
    pub steps: u64,
    /// Recorded states further than the tolerance inside the obstacle.
    pub violations: u64,
}

/// Per-path state of the Euler scheme.
pub(crate) struct Walker<'a> {
    spec: &'a DomainSpec,
    dt: f64,
    tol: f64,
    path: u64,
    rng: PathRng,
    pub x: Vec<f64>,
    pub prev: Vec<f64>,
    xi: Vec<f64>,
    pub steps: u64,
    contacts: u64,
    displacement_sum: f64,
    retries: u32,
    violations: u64,
}

impl<'a> Walker<'a> {
    pub fn new(cfg: &'a SimConfig, path: u64) -> Self {
        let d = cfg.spec.dim;
        Walker {
            spec: &cfg.spec,
            dt: cfg.dt,
            tol: cfg.tolerance(),
            path,
            rng: PathRng::new(cfg.seed, path, d),
            x: cfg.start.clone(),
            prev: cfg.start.clone(),
            xi: vec![0.0; d],
            steps: 0,
            contacts: 0,
            displacement_sum: 0.0,
            retries: 0,
            violations: 0,
        }
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// Takes one step and returns the step's spare uniform.
    pub fn advance(&mut self) -> Result<f64, SimError> {
        let u = self.rng.next_step(&mut self.xi);
        let mut attempt = 0;
        let out = loop {
            match step(&self.x, self.spec, self.dt, &self.xi) {
                Ok(out) => break out,
                Err(GeometryError::AmbiguousProjection) => {
                    attempt += 1;
                    self.retries += 1;
                    if attempt > MAX_RETRIES {
                        return Err(SimError::StepFailure {
                            path: self.path,
                            step: self.steps,
                            retries: attempt - 1,
                        });
                    }
                    self.rng.retry_normals(attempt as u64, &mut self.xi);
                }
                Err(e) => return Err(e.into()),
            }
        };
        self.prev = std::mem::replace(&mut self.x, out.state);
        if out.contact {
            self.contacts += 1;
            self.displacement_sum += out.displacement;
        }
        self.steps += 1;
        if self.spec.obstacle.signed_distance(&self.x) < -self.tol {
            self.violations += 1;
        }
        Ok(u)
    }

    pub fn finish(self, hit_time: Option<f64>) -> PathStats {
        PathStats {
            path: self.path,
            censored: hit_time.is_none(),
            hit_time,
            contacts: self.contacts,
            displacement_sum: self.displacement_sum,
            final_state: self.x,
            retries: self.retries,
            steps: self.steps,
            violations: self.violations,
        }
    }
}

/// Paths in index order, run in parallel.
pub(crate) fn par_paths<T: Send>(n: usize, f: impl Fn(u64) -> Result<T, SimError> + Sync) -> Result<Vec<T>, SimError> {
    (0..n as u64).into_par_iter().map(&f).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitSamples {
    pub horizon: f64,
    pub paths: Vec<PathStats>,
    pub warning: Option<String>,
}

impl HitSamples {
    /// Hitting times with censored paths at the horizon.
    pub fn times(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p.hit_time.unwrap_or(self.horizon)).collect()
    }

    pub fn censored(&self) -> Vec<bool> {
        self.paths.iter().map(|p| p.censored).collect()
    }

    pub fn censored_fraction(&self) -> f64 {
        self.paths.iter().filter(|p| p.censored).count() as f64 / self.paths.len() as f64
    }

    pub fn exp_moment(&self, theta: f64, censor_aware: bool) -> Result<ExpMoment, SimError> {
        empirical_exp_moment(&self.times(), &self.censored(), self.horizon, theta, censor_aware)
    }
}

fn hit_path(cfg: &SimConfig, target: &Target, path: u64) -> Result<PathStats, SimError> {
    let mut w = Walker::new(cfg, path);
    let n = cfg.n_steps();
    let flat = target.is_flat();
    let mut hit = target.contains(&w.x).then_some(0.0);
    while hit.is_none() && w.steps < n {
        let u = w.advance()?;
        if target.contains(&w.x) {
            hit = Some(if flat { w.time() - 0.5 * cfg.dt } else { w.time() });
        } else if flat && u < target.bridge_probability(&w.prev, &w.x, cfg.dt) {
            hit = Some(w.time() - 0.5 * cfg.dt);
        }
    }
    Ok(w.finish(hit))
}

/// First visit of `target` for every path, censored at the horizon. Half-space and slab
/// targets are also checked between steps with a Brownian-bridge crossing test.
pub fn hit_time(cfg: &SimConfig, target: &Target) -> Result<HitSamples, SimError> {
    cfg.validate()?;
    target.validate(cfg.spec.dim)?;
    let paths = par_paths(cfg.n_paths, |p| hit_path(cfg, target, p))?;
    let warning = paths
        .iter()
        .all(|p| p.censored)
        .then(|| format!("all {} paths censored at horizon {}", paths.len(), cfg.horizon));
    Ok(HitSamples {
        horizon: cfg.horizon,
        paths,
        warning,
    })
}

/// Full-horizon trajectories with no target.
pub fn run_paths(cfg: &SimConfig) -> Result<Vec<PathStats>, SimError> {
    cfg.validate()?;
    par_paths(cfg.n_paths, |p| {
        let mut w = Walker::new(cfg, p);
        for _ in 0..cfg.n_steps() {
            w.advance()?;
        }
        Ok(w.finish(None))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Obstacle;
    use crate::special::{ou_hitting_cdf, ou_hitting_density};

    fn free(d: usize, lambda: f64) -> DomainSpec {
        DomainSpec::new(d, lambda, Obstacle::None).unwrap()
    }

    fn ball(r: f64) -> DomainSpec {
        DomainSpec::new(
            2,
            1.0,
            Obstacle::Ball {
                center: vec![0.0, 0.0],
                radius: r,
            },
        )
        .unwrap()
    }

    fn cfg(spec: DomainSpec, start: Vec<f64>, dt: f64, horizon: f64, n: usize) -> SimConfig {
        SimConfig {
            spec,
            dt,
            horizon,
            seed: 11,
            n_paths: n,
            start,
            tol: None,
        }
    }

    #[test]
    fn single_steps() {
        let brownian = DomainSpec {
            dim: 2,
            lambda: 0.0,
            obstacle: Obstacle::None,
        };
        let s = step(&[0.3, -0.2], &brownian, 1.0, &[0.0, 0.0]).unwrap();
        assert_eq!(s.state, vec![0.3, -0.2]);
        let s = step(&[10.0, 0.0], &free(2, 1.0), 0.001, &[0.0, 0.0]).unwrap();
        assert!((s.state[0] - 9.99).abs() < 1e-12 && s.state[1] == 0.0 && !s.contact);
        // noise pushes the proposal into the unit ball
        let s = step(&[1.0005, 0.0], &ball(1.0), 1e-4, &[-0.2, 0.0]).unwrap();
        assert!(s.contact);
        assert!((s.state[0] - 1.0).abs() < 1e-15 && s.state[1] == 0.0);
        let proposal = 1.0005 - 1.0005e-4 - 0.002;
        assert!((s.displacement - (1.0 - proposal)).abs() < 1e-12);
        assert!(matches!(
            step(&[0.0], &free(2, 1.0), 0.1, &[0.0, 0.0]),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn config_guards() {
        let good = cfg(free(2, 2.0), vec![0.0, 0.0], 0.005, 1.0, 1);
        assert!(good.validate().is_ok());
        assert!(SimConfig {
            dt: 0.006,
            ..good.clone()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            horizon: 2e7,
            dt: 0.001,
            ..good.clone()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            n_paths: 0,
            ..good.clone()
        }
        .validate()
        .is_err());
        let inside = cfg(ball(1.0), vec![0.5, 0.0], 0.001, 1.0, 1);
        assert!(inside.validate().is_err());
        assert!(Target::HalfSpace {
            axis: 2,
            threshold: 0.0
        }
        .validate(2)
        .is_err());
    }

    #[test]
    fn whole_target_hits_at_zero() {
        let c = cfg(ball(1.0), vec![2.0, 0.0], 0.001, 1.0, 50);
        let h = hit_time(&c, &Target::Whole).unwrap();
        assert!(h.paths.iter().all(|p| p.hit_time == Some(0.0) && p.steps == 0));
        assert!(h.warning.is_none());
    }

    #[test]
    fn all_censored_warns() {
        let c = cfg(free(2, 1.0), vec![0.0, 0.0], 0.01, 0.1, 20);
        let h = hit_time(
            &c,
            &Target::HalfSpace {
                axis: 0,
                threshold: 50.0,
            },
        )
        .unwrap();
        assert!(h.warning.is_some() && h.censored_fraction() == 1.0);
    }

    #[test]
    fn seeds_reproduce_bit_for_bit() {
        let c = cfg(ball(1.0), vec![1.0, 0.0], 0.001, 2.0, 64);
        let a = run_paths(&c).unwrap();
        let b = run_paths(&c).unwrap();
        assert_eq!(a, b);
        let other = run_paths(&SimConfig { seed: 12, ..c }).unwrap();
        assert_ne!(a[0].final_state, other[0].final_state);
    }

    #[test]
    fn reflection_keeps_paths_in_domain() {
        for obstacle in [
            Obstacle::Ball {
                center: vec![0.5, 0.0],
                radius: 1.0,
            },
            Obstacle::Hypercube {
                center: vec![1.0, 0.0],
                half_width: 1.0,
            },
            Obstacle::Shell {
                center: vec![0.0, 0.0],
                inner: 1.0,
                outer: 2.0,
            },
            Obstacle::Trap { y: 1.0, arm: 1.0 },
        ] {
            let spec = DomainSpec::new(2, 1.0, obstacle).unwrap();
            let start = if matches!(spec.obstacle, Obstacle::Shell { .. }) {
                vec![1.5, 0.0]
            } else {
                vec![-2.0, 0.0]
            };
            let c = cfg(spec, start, 0.001, 10.0, 20);
            let paths = run_paths(&c).unwrap();
            assert!(paths.iter().all(|p| p.violations == 0), "{:?}", c.spec.obstacle);
            assert!(paths.iter().map(|p| p.contacts).sum::<u64>() > 0);
        }
    }

    #[test]
    fn no_contacts_far_from_obstacle() {
        // drift-only path from far away heads straight to the origin, away from the ball
        let spec = DomainSpec::new(
            2,
            1.0,
            Obstacle::Ball {
                center: vec![0.0, 5.0],
                radius: 1.0,
            },
        )
        .unwrap();
        let mut x = vec![3.0, 0.0];
        let mut local = 0.0;
        for _ in 0..10_000 {
            let s = step(&x, &spec, 1e-3, &[0.0, 0.0]).unwrap();
            local += s.displacement;
            x = s.state;
        }
        assert_eq!(local, 0.0);
    }

    #[test]
    fn hitting_time_matches_density() {
        let c = cfg(free(2, 1.0), vec![-1.0, 0.0], 1e-3, 20.0, 20_000);
        let h = hit_time(
            &c,
            &Target::HalfSpace {
                axis: 0,
                threshold: 0.0,
            },
        )
        .unwrap();
        let t: Vec<f64> = h.paths.iter().map(|p| p.hit_time.unwrap_or(f64::INFINITY)).collect();
        let d = ks_statistic(&t, |s| ou_hitting_cdf(s, 1.0).unwrap());
        assert!(kolmogorov_sf(d, t.len()) > 0.01, "D = {d}");
        assert!(ou_hitting_density(1.0, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn weak_error_shrinks_with_dt() {
        // continuous time from (1, 0): E|X_1|^2 = e^-2 + d (1 - e^-2) / 2
        let mut prev = None;
        for dt in [0.01, 0.005] {
            let c = cfg(free(2, 1.0), vec![1.0, 0.0], dt, 1.0, 4000);
            let paths = run_paths(&c).unwrap();
            let sq: Vec<f64> = paths
                .iter()
                .map(|p| p.final_state.iter().map(|v| v * v).sum())
                .collect();
            let (m, se) = mean_stderr(&sq);
            let exact = 2.0 * (1.0 - (-2.0f64).exp()) / 2.0 + (-2.0f64).exp();
            assert!((m - exact).abs() < 2.0 * dt + 4.0 * se, "dt={dt}: {m} vs {exact}");
            if let Some((pm, pse)) = prev {
                let pse: f64 = pse;
                let diff: f64 = m - pm;
                assert!(diff.abs() <= 2.0 * dt + 3.0 * (se * se + pse * pse).sqrt());
            }
            prev = Some((m, se));
        }
    }
}
