use super::kummer::kummer_1f1;
use super::{erfc, SpecialError};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Value of an exponential moment that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentValue {
    Finite(f64),
    Divergent,
}

impl MomentValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            MomentValue::Finite(v) => Some(v),
            MomentValue::Divergent => None,
        }
    }
}

/// First positive zero `beta` of `beta -> 1F1(-beta / 2 lambda; 1/2; lambda r^2)`: the
/// critical rate of the exponential moments of the OU exit time from `[-r, r]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitThreshold {
    pub beta_star: f64,
    /// `(lo, hi)` in rate units with `lo <= beta_star <= hi`.
    pub bracket: (f64, f64),
    /// `|1F1|` at the reported root.
    pub residual: f64,
}

const SCAN_STEP: f64 = 0.01;
const SCAN_LIMIT: f64 = 50.0;

fn check_lr(lambda: f64, r: f64) -> Result<(), SpecialError> {
    if !(lambda > 0.0 && lambda.is_finite() && r > 0.0 && r.is_finite()) {
        return Err(SpecialError::InvalidInput(format!(
            "need lambda > 0 and r > 0 (lambda={lambda}, r={r})"
        )));
    }
    Ok(())
}

/// Scan `a = -0.01 k` for the first sign change of `1F1(a; 1/2; z)`, then bisect down to
/// adjacent doubles. The reported root is the end of the bracket where the series is
/// still positive.
pub fn exit_moment_threshold(lambda: f64, r: f64) -> Result<ExitThreshold, SpecialError> {
    check_lr(lambda, r)?;
    let z = lambda * r * r;
    let steps = (SCAN_LIMIT / SCAN_STEP).round() as usize;
    let mut hi = 0.0f64;
    let mut f_hi = 1.0f64;
    let mut lo = None;
    for k in 1..=steps {
        let a = -(k as f64) * SCAN_STEP;
        let f = kummer_1f1(a, z)?;
        if f <= 0.0 {
            lo = Some((a, f));
            break;
        }
        hi = a;
        f_hi = f;
    }
    let (mut lo, mut f_lo) = lo.ok_or(SpecialError::RootNotFound { z })?;
    while f_lo != 0.0 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = kummer_1f1(mid, z)?;
        if f > 0.0 {
            hi = mid;
            f_hi = f;
        } else {
            lo = mid;
            f_lo = f;
        }
    }
    let (root, residual) = if f_lo == 0.0 { (lo, 0.0) } else { (hi, f_hi.abs()) };
    Ok(ExitThreshold {
        beta_star: -2.0 * lambda * root,
        bracket: (-2.0 * lambda * hi, -2.0 * lambda * lo),
        residual,
    })
}

/// `E[exp(-theta S)]` for the exit time `S` of `dX = dW - lambda X dt` from `[-r, r]`
/// started at 0; negative `theta` continues analytically until the first zero.
pub fn ou_exit_laplace(theta: f64, lambda: f64, r: f64) -> Result<MomentValue, SpecialError> {
    check_lr(lambda, r)?;
    if !theta.is_finite() {
        return Err(SpecialError::InvalidInput(format!("theta must be finite, got {theta}")));
    }
    let z = lambda * r * r;
    let f = kummer_1f1(theta / (2.0 * lambda), z)?;
    if theta >= 0.0 {
        return Ok(MomentValue::Finite(1.0 / f));
    }
    if f <= 0.0 {
        return Ok(MomentValue::Divergent);
    }
    let threshold = exit_moment_threshold(lambda, r)?;
    if -theta >= threshold.beta_star {
        Ok(MomentValue::Divergent)
    } else {
        Ok(MomentValue::Finite(1.0 / f))
    }
}

/// `E[exp(theta S)]` for standard Brownian motion leaving `[-r, r]` from 0.
pub fn brownian_exit_moment(theta: f64, r: f64) -> Result<MomentValue, SpecialError> {
    if !(theta >= 0.0) || !(r > 0.0) {
        return Err(SpecialError::InvalidInput(format!(
            "need theta >= 0 and r > 0 (theta={theta}, r={r})"
        )));
    }
    if theta >= PI * PI / (8.0 * r * r) {
        return Ok(MomentValue::Divergent);
    }
    Ok(MomentValue::Finite(1.0 / (r * (2.0 * theta).sqrt()).cos()))
}

fn ln_sinh(t: f64) -> f64 {
    if t > 1.0 {
        t + (-(-2.0 * t).exp_m1()).ln() - std::f64::consts::LN_2
    } else {
        t.sinh().ln()
    }
}

fn check_tb(t: f64, b: f64) -> Result<(), SpecialError> {
    if !(t > 0.0) || !(b > 0.0) {
        return Err(SpecialError::InvalidInput(format!(
            "need t > 0 and b > 0 (t={t}, b={b})"
        )));
    }
    Ok(())
}

/// Density of the first time `dX = dW - X dt`, started at `-b`, reaches 0.
pub fn ou_hitting_density(t: f64, b: f64) -> Result<f64, SpecialError> {
    check_tb(t, b)?;
    if t.is_infinite() {
        return Ok(0.0);
    }
    let ls = ln_sinh(t);
    // e^{-t} / (2 sinh t) = 1 / (e^{2t} - 1)
    let quad = b * b / (2.0 * t).exp_m1();
    let ln_p = (b / (2.0 * PI).sqrt()).ln() - 1.5 * ls - quad + 0.5 * t;
    Ok(ln_p.exp())
}

/// Distribution function of the same hitting time: via the time change
/// `tau = e^t sinh t` it is a Brownian first passage, `erfc(b / sqrt(2 tau))`.
pub fn ou_hitting_cdf(t: f64, b: f64) -> Result<f64, SpecialError> {
    if t <= 0.0 {
        check_tb(1.0, b)?;
        return Ok(0.0);
    }
    check_tb(t, b)?;
    let tau = 0.5 * (2.0 * t).exp_m1();
    Ok(erfc(b / (2.0 * tau).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_to_inf};

    #[test]
    fn laplace_examples() {
        assert_eq!(ou_exit_laplace(0.0, 2.0, 0.7).unwrap(), MomentValue::Finite(1.0));
        for &lambda in &[0.3f64, 1.0, 8.0] {
            let r = (0.5 / lambda).sqrt();
            assert_eq!(
                ou_exit_laplace(-2.0 * lambda, lambda, r).unwrap(),
                MomentValue::Divergent
            );
        }
        // 1F1(-1/2; 1/2; 1) = e - sqrt(pi) erfi(1) < 0: theta = -1 lies past the first zero
        let f = kummer_1f1(-0.5, 1.0).unwrap();
        assert!((f - KUMMER_NEG_HALF_AT_ONE).abs() < 1e-14, "{f}");
        assert_eq!(ou_exit_laplace(-1.0, 1.0, 1.0).unwrap(), MomentValue::Divergent);
        let inside = ou_exit_laplace(-0.7, 1.0, 1.0).unwrap().finite().unwrap();
        assert!((inside - 1.0 / kummer_1f1(-0.35, 1.0).unwrap()).abs() < 1e-15 && inside > 1.0);
        let e = ou_exit_laplace(1.0, 1.0, 1.0).unwrap().finite().unwrap();
        assert!((e - (-1.0f64).exp()).abs() < 1e-15);
    }

    // 40-digit evaluations, frozen
    const KUMMER_NEG_HALF_AT_ONE: f64 = -0.207_021_663_355_317_98;
    const BETA_STAR_Z1: f64 = 0.798_459_832_032_056_7;
    const BETA_STAR_Z4: f64 = 0.037_461_209_281_675_16;
    const BETA_STAR_Z9: f64 = 3.910_829_297_485_906e-4;

    #[test]
    fn laplace_decreases_in_theta() {
        let mut prev = f64::INFINITY;
        for k in 0..60 {
            let v = ou_exit_laplace(0.25 * k as f64, 1.3, 0.9).unwrap().finite().unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn threshold_examples() {
        for &(r, frozen) in &[(1.0, BETA_STAR_Z1), (2.0, BETA_STAR_Z4), (3.0, BETA_STAR_Z9)] {
            let t = exit_moment_threshold(1.0, r).unwrap();
            assert!((t.beta_star / frozen - 1.0).abs() < 1e-12, "r={r}: {}", t.beta_star);
            assert!(t.residual <= 1e-10);
            assert!(t.bracket.0 <= t.beta_star && t.beta_star <= t.bracket.1);
            assert!(t.beta_star <= PI * PI / (8.0 * r * r));
        }
        for &lambda in &[0.1f64, 1.0, 7.0] {
            let r = (0.5 / lambda).sqrt();
            let t = exit_moment_threshold(lambda, r).unwrap();
            assert!((t.beta_star / (2.0 * lambda) - 1.0).abs() < 1e-14);
        }
        assert!(matches!(
            exit_moment_threshold(1.0, 0.01),
            Err(SpecialError::RootNotFound { .. })
        ));
    }

    #[test]
    fn no_earlier_zero_than_the_polynomial_one() {
        // at z = 1/2 the series is positive on (-1, 0): dense scan oracle
        for k in 1..1000 {
            let a = -(k as f64) / 1000.0;
            assert!(kummer_1f1(a, 0.5).unwrap() > 0.0);
        }
    }

    #[test]
    fn brownian_moment() {
        assert_eq!(brownian_exit_moment(0.0, 1.0).unwrap(), MomentValue::Finite(1.0));
        let v = brownian_exit_moment(PI * PI / 72.0, 2.0).unwrap().finite().unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        assert_eq!(
            brownian_exit_moment(PI * PI / 8.0 + 1e-9, 1.0).unwrap(),
            MomentValue::Divergent
        );
        assert!(brownian_exit_moment(-1.0, 1.0).is_err());
    }

    #[test]
    fn hitting_density_normalizes_and_matches_cdf() {
        for &b in &[0.5, 1.0, 2.0] {
            let total = integrate_to_inf(|t| ou_hitting_density(t.max(1e-300), b).unwrap(), 0.0, 1e-12, 1e-12).value;
            assert!((total - 1.0).abs() < 1e-6, "b={b}: {total}");
            for &t in &[0.1, 0.5, 1.0, 3.0] {
                let q = integrate(|s| ou_hitting_density(s.max(1e-300), b).unwrap(), 0.0, t, 1e-14, 1e-12).value;
                assert!((q - ou_hitting_cdf(t, b).unwrap()).abs() < 1e-10);
            }
        }
        assert!(ou_hitting_density(1e-3, 1.0).unwrap() < 1e-200);
        assert!(ou_hitting_density(0.0, 1.0).is_err());
        // derivative of the distribution function
        let (t, b, h) = (0.8, 1.3, 1e-5);
        let fd = (ou_hitting_cdf(t + h, b).unwrap() - ou_hitting_cdf(t - h, b).unwrap()) / (2.0 * h);
        assert!((fd - ou_hitting_density(t, b).unwrap()).abs() < 1e-8);
    }
}
