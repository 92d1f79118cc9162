use super::{empirical_exp_moment, par_paths, ExpMoment, PathRng, SimError};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitSamples {
    pub times: Vec<f64>,
    pub censored: Vec<bool>,
    pub horizon: f64,
}

impl ExitSamples {
    pub fn exp_moment(&self, theta: f64) -> Result<ExpMoment, SimError> {
        empirical_exp_moment(&self.times, &self.censored, self.horizon, theta, true)
    }
}

/// First exit times of `[-r, r]` for the one-dimensional OU process started at 0.
///
/// Steps use the exact Gaussian transition of the OU process, so the only discretization
/// error is from monitoring; a Brownian-bridge test between steps covers most of it and a
/// detected exit is dated at the middle of its step.
pub fn exit_interval_ou_1d(lambda: f64, r: f64, dt: f64, n_paths: usize, seed: u64) -> Result<ExitSamples, SimError> {
    if !(lambda > 0.0 && lambda.is_finite() && r > 0.0 && r.is_finite() && dt > 0.0 && n_paths > 0) {
        return Err(SimError::Input(format!(
            "need lambda > 0, r > 0, dt > 0 and paths > 0 (lambda={lambda}, r={r}, dt={dt})"
        )));
    }
    // survival decays at least like exp(-t / (r^2 + 1/lambda)); this horizon is never reached
    let horizon = 200.0 * (r * r + 1.0 / lambda);
    let max_steps = (horizon / dt).ceil() as u64;
    let decay = (-lambda * dt).exp();
    let var = -(-2.0 * lambda * dt).exp_m1() / (2.0 * lambda);
    let sd = var.sqrt();
    let out = par_paths(n_paths, |path| {
        let mut rng = PathRng::new(seed, path, 1);
        let mut xi = [0.0];
        let mut x = 0.0f64;
        for k in 1..=max_steps {
            let u = rng.next_step(&mut xi);
            let next = x * decay + sd * xi[0];
            let crossed = next.abs() >= r || {
                let up = (-2.0 * (r - x) * (r - next) / var).exp();
                let down = (-2.0 * (r + x) * (r + next) / var).exp();
                u < 1.0 - (1.0 - up) * (1.0 - down)
            };
            if crossed {
                return Ok((k as f64 - 0.5) * dt);
            }
            x = next;
        }
        Ok(f64::INFINITY)
    })?;
    let censored: Vec<bool> = out.iter().map(|t| !t.is_finite()).collect();
    let times = out.iter().map(|&t| if t.is_finite() { t } else { horizon }).collect();
    Ok(ExitSamples {
        times,
        censored,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{brownian_exit_moment, ou_exit_laplace};

    #[test]
    fn laplace_transform_matches() {
        let s = exit_interval_ou_1d(1.0, 1.0, 1e-3, 20_000, 3).unwrap();
        assert_eq!(s.exp_moment(0.0).unwrap().estimate, 1.0);
        for theta in [0.5, 1.0, 2.0] {
            let m = s.exp_moment(-theta).unwrap();
            let want = ou_exit_laplace(theta, 1.0, 1.0).unwrap().finite().unwrap();
            assert!(
                (m.estimate - want).abs() < 3.0 * m.stderr + 1e-3,
                "theta={theta}: {} vs {want}",
                m.estimate
            );
        }
    }

    #[test]
    fn small_lambda_is_brownian() {
        let s = exit_interval_ou_1d(0.01, 1.0, 1e-3, 10_000, 4).unwrap();
        let m = s.exp_moment(0.5).unwrap();
        let want = brownian_exit_moment(0.5, 1.0).unwrap().finite().unwrap();
        assert!(
            (m.estimate - want).abs() < 3.0 * m.stderr + 0.05 * want,
            "{} vs {want}",
            m.estimate
        );
        assert!(!m.divergence_flag && s.censored.iter().all(|c| !c));
    }
}
