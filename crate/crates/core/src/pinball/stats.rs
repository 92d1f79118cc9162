use super::SimError;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpMoment {
    pub estimate: f64,
    pub ln_estimate: f64,
    pub stderr: f64,
    /// The estimate keeps growing when the sample size doubles.
    pub divergence_flag: bool,
    pub censored_fraction: f64,
    pub samples: usize,
}

fn ln_mean_exp(values: &[f64]) -> (f64, f64) {
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = values.len() as f64;
    let scaled: Vec<f64> = values.iter().map(|v| (v - top).exp()).collect();
    let mean = scaled.iter().sum::<f64>() / n;
    let var = scaled.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (top + mean.ln(), top + (var / n).sqrt().ln())
}

/// Plug-in estimate of `E exp(theta T)`. With `censor_aware`, censored samples count as
/// `exp(theta * horizon)`, which makes the estimate a lower bound; otherwise they are dropped.
/// Sums run in the log domain, so large `theta * horizon` does not overflow intermediate
/// terms.
pub fn empirical_exp_moment(
    times: &[f64],
    censored: &[bool],
    horizon: f64,
    theta: f64,
    censor_aware: bool,
) -> Result<ExpMoment, SimError> {
    if times.is_empty() || times.len() != censored.len() {
        return Err(SimError::Input(
            "need one censoring flag per sample and at least one sample".into(),
        ));
    }
    let exps: Vec<f64> = times
        .iter()
        .zip(censored)
        .filter(|(_, &c)| censor_aware || !c)
        .map(|(&t, &c)| theta * if c { horizon } else { t })
        .collect();
    let n_cens = censored.iter().filter(|&&c| c).count();
    let censored_fraction = n_cens as f64 / times.len() as f64;
    if exps.is_empty() {
        return Ok(ExpMoment {
            estimate: f64::NAN,
            ln_estimate: f64::NAN,
            stderr: f64::NAN,
            divergence_flag: false,
            censored_fraction,
            samples: 0,
        });
    }
    let (ln_est, ln_se) = ln_mean_exp(&exps);
    let mut divergence_flag = false;
    if exps.len() >= 64 {
        let sizes: Vec<usize> = (0..4).rev().map(|k| exps.len() >> k).collect();
        let ests: Vec<f64> = sizes.iter().map(|&m| ln_mean_exp(&exps[..m]).0).collect();
        divergence_flag = ests.windows(2).skip(1).any(|w| w[1] - w[0] > 1.5f64.ln());
    }
    Ok(ExpMoment {
        estimate: ln_est.exp(),
        ln_estimate: ln_est,
        stderr: if theta == 0.0 { 0.0 } else { ln_se.exp() },
        divergence_flag,
        censored_fraction,
        samples: exps.len(),
    })
}

/// Mean and standard error.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Asymptotic Kolmogorov tail `P(sqrt(n) D > x)` with the usual small-sample correction.
pub fn kolmogorov_sf(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let x = (sn + 0.12 + 0.11 / sn) * d;
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sided KS distance between samples and a distribution function; censored values
/// (reported as `+inf`) only count towards the sample size.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut s: Vec<f64> = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        if !x.is_finite() {
            break;
        }
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_zero_is_one() {
        let m = empirical_exp_moment(&[1.0, 2.0, 3.0], &[false, false, true], 3.0, 0.0, true).unwrap();
        assert_eq!((m.estimate, m.stderr), (1.0, 0.0));
        assert!(empirical_exp_moment(&[], &[], 1.0, 1.0, true).is_err());
    }

    #[test]
    fn log_domain_survives_huge_exponents() {
        let m = empirical_exp_moment(&[900.0, 900.0], &[false, false], 1000.0, 1.0, false).unwrap();
        assert!((m.ln_estimate - 900.0).abs() < 1e-12 && m.estimate.is_infinite());
    }

    #[test]
    fn censoring_lowers_or_drops() {
        let t = [1.0, 2.0, 5.0];
        let c = [false, false, true];
        let aware = empirical_exp_moment(&t, &c, 5.0, 0.5, true).unwrap();
        let dropped = empirical_exp_moment(&t, &c, 5.0, 0.5, false).unwrap();
        assert!((aware.estimate - ((0.5f64).exp() + 1f64.exp() + 2.5f64.exp()) / 3.0).abs() < 1e-12);
        assert!((dropped.estimate - ((0.5f64).exp() + 1f64.exp()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // P(K > 1.36) ~ 0.05, P(K > 1.63) ~ 0.01
        assert!((kolmogorov_sf(1.358 / 1e3, 1_000_000) - 0.05).abs() < 2e-3);
        assert!((kolmogorov_sf(1.628 / 1e3, 1_000_000) - 0.01).abs() < 1e-3);
        assert_eq!(ks_statistic(&[0.5], |x| x), 0.5);
    }
}
