use super::SpecialError;
use crate::quad::gl20_integrate;
use std::f64::consts::PI;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const CF_SWITCH: f64 = 1.5;

/// Positive-term series `erf(x) = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!`, x >= 0.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        term *= 2.0 * x2 / (2.0 * n + 3.0);
        sum += term;
        n += 1.0;
        if term <= 1e-17 * sum {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// Continued fraction for `erfcx(x) = e^{x^2} erfc(x)`, x >= 1.5 (modified Lentz).
fn erfcx_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let x2 = x * x;
    let mut f = x2 + 0.5;
    let mut c = f;
    let mut d = 0.0;
    for n in 1..500 {
        let nf = n as f64;
        let a = -nf * (nf - 0.5);
        let b = x2 + 0.5 + 2.0 * nf;
        d = b + a * d;
        if d == 0.0 {
            d = TINY;
        }
        d = 1.0 / d;
        c = b + a / c;
        if c == 0.0 {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    x / (PI.sqrt() * f)
}

pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return -erf(-x);
    }
    if x < CF_SWITCH {
        erf_series(x)
    } else {
        1.0 - erfc(x)
    }
}

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < CF_SWITCH {
        1.0 - erf_series(x)
    } else if x > 27.3 {
        0.0
    } else {
        (-x * x).exp() * erfcx_cf(x)
    }
}

/// Scaled complementary error function `e^{x^2} erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x < 0.0 {
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < CF_SWITCH {
        (x * x).exp() * (1.0 - erf_series(x))
    } else if x > 1e8 {
        1.0 / (PI.sqrt() * x)
    } else {
        erfcx_cf(x)
    }
}

/// `int_b^c e^{-u^2} du` for `b <= c` (c may be infinite).
pub fn gaussian_tail(b: f64, c: f64) -> Result<f64, SpecialError> {
    if b.is_nan() || c.is_nan() || b == f64::INFINITY || c == f64::NEG_INFINITY || c < b {
        return Err(SpecialError::InvalidInput(format!(
            "gaussian_tail needs b <= c (b={b}, c={c})"
        )));
    }
    if b == c {
        return Ok(0.0);
    }
    if b < 0.0 {
        if c <= 0.0 {
            return gaussian_tail(-c, -b);
        }
        return Ok(gaussian_tail(0.0, -b)? + gaussian_tail(0.0, c)?);
    }
    let gap = (c - b) * (c + b);
    if gap < 0.5 {
        return Ok(gl20_integrate(|u| (-u * u).exp(), b, c));
    }
    let far = if c.is_infinite() { 0.0 } else { (-gap).exp() * erfcx(c) };
    Ok(0.5 * PI.sqrt() * (-b * b).exp() * (erfcx(b) - far))
}
