use super::{empirical_exp_moment, par_paths, ExpMoment, SimConfig, SimError, Walker};
use crate::geometry::Obstacle;
use crate::special::erfc;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationPath {
    pub path: u64,
    /// First entry into the segment behind the inner circle; `None` when censored.
    pub t_m: Option<f64>,
    /// Angle from the `+x1` axis at the recording times, frozen after `t_m`.
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationRun {
    pub inner: f64,
    pub outer: f64,
    pub tol_m: f64,
    pub horizon: f64,
    /// Recording times; `z[k]` of every path belongs to `times[k]`.
    pub times: Vec<f64>,
    pub paths: Vec<RotationPath>,
}

impl RotationRun {
    pub fn t_m_moment(&self, theta: f64) -> Result<ExpMoment, SimError> {
        let t: Vec<f64> = self.paths.iter().map(|p| p.t_m.unwrap_or(self.horizon)).collect();
        let c: Vec<bool> = self.paths.iter().map(|p| p.t_m.is_none()).collect();
        empirical_exp_moment(&t, &c, self.horizon, theta, true)
    }
}

/// Angle and first visit of the segment `M = {-outer <= x1 - c1 <= -inner, |x2 - c2| <= tol_M}`
/// for the process reflected inside a planar annulus. `tol_M = max(2 sqrt(dt), 1e-4 inner)`.
pub fn rotation_functional(cfg: &SimConfig, record_every: f64) -> Result<RotationRun, SimError> {
    cfg.validate()?;
    let (center, inner, outer) = match &cfg.spec.obstacle {
        Obstacle::Shell { center, inner, outer } if cfg.spec.dim == 2 => (center.clone(), *inner, *outer),
        _ => {
            return Err(SimError::Input(
                "the rotation functional needs a planar shell domain".into(),
            ))
        }
    };
    if !(record_every >= cfg.dt) {
        return Err(SimError::Input("record_every must be at least dt".into()));
    }
    let tol_m = (2.0 * cfg.dt.sqrt()).max(1e-4 * inner);
    let angle = |x: &[f64]| {
        let (a, b) = (x[0] - center[0], x[1] - center[1]);
        (a / a.hypot(b)).clamp(-1.0, 1.0).acos()
    };
    let in_m = |x: &[f64]| {
        let (a, b) = (x[0] - center[0], x[1] - center[1]);
        (-outer..=-inner).contains(&a) && b.abs() <= tol_m
    };
    let n = cfg.n_steps();
    let stride = ((record_every / cfg.dt).round() as u64).max(1);
    let records = (n / stride) as usize + 1;
    let times: Vec<f64> = (0..records).map(|k| (k as u64 * stride) as f64 * cfg.dt).collect();
    let paths = par_paths(cfg.n_paths, |p| {
        let mut w = Walker::new(cfg, p);
        let mut z = Vec::with_capacity(records);
        z.push(angle(&w.x));
        let mut t_m = in_m(&w.x).then_some(0.0);
        while t_m.is_none() && w.steps < n {
            w.advance()?;
            if in_m(&w.x) {
                t_m = Some(w.time());
            }
            if w.steps % stride == 0 {
                z.push(angle(&w.x));
            }
        }
        let last = angle(&w.x);
        z.resize(records, last);
        Ok(RotationPath { path: p, t_m, z })
    })?;
    Ok(RotationRun {
        inner,
        outer,
        tol_m,
        horizon: cfg.horizon,
        times,
        paths,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonKs {
    pub time: f64,
    /// `sup (F_Z - F_ref)`: positive when `Z` is stochastically smaller somewhere.
    pub d_plus: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sided KS check that `Z` at recording `k` dominates `min(|Z_0 + B_s|, pi)` with
/// `s = t / outer^2`. All paths must share the same starting angle.
pub fn rotation_comparison(run: &RotationRun, k: usize) -> Result<ComparisonKs, SimError> {
    if k >= run.times.len() || run.paths.is_empty() {
        return Err(SimError::Input(format!("no recording {k}")));
    }
    let z0 = run.paths[0].z[0];
    if run.paths.iter().any(|p| (p.z[0] - z0).abs() > 1e-12) {
        return Err(SimError::Input("paths start at different angles".into()));
    }
    let time = run.times[k];
    let s = time / (run.outer * run.outer);
    let phi = |x: f64| 0.5 * erfc(-x / SQRT_2);
    let reference = |z: f64| {
        if z >= PI {
            1.0
        } else if s == 0.0 {
            if z >= z0 {
                1.0
            } else {
                0.0
            }
        } else {
            let sd = s.sqrt();
            phi((z - z0) / sd) - phi((-z - z0) / sd)
        }
    };
    let mut zs: Vec<f64> = run.paths.iter().map(|p| p.z[k]).collect();
    zs.sort_by(f64::total_cmp);
    let n = zs.len();
    let d_plus = zs
        .iter()
        .enumerate()
        .map(|(i, &z)| (i + 1) as f64 / n as f64 - reference(z))
        .fold(0.0f64, f64::max);
    Ok(ComparisonKs {
        time,
        d_plus,
        p_value: (-2.0 * n as f64 * d_plus * d_plus).exp(),
        n,
    })
}
