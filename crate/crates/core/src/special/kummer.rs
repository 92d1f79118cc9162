use super::dd::Dd;
use super::SpecialError;

/// Lower parameter `b` of every confluent series used here.
pub const B_HALF: f64 = 0.5;
const MAX_TERMS: usize = 10_000;
const CANCELLATION_LIMIT: f64 = 1e6;

fn past_peak(a: f64, z: f64, k: usize) -> bool {
    let k = k as f64;
    // once k exceeds |a| + z the term ratio is below 1 and keeps shrinking
    k > a.abs() + z + 2.0 && ((a + k).abs() * z) / ((B_HALF + k) * (k + 1.0)) < 0.5
}

fn series_f64(a: f64, z: f64) -> Result<(f64, f64), SpecialError> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut max_term = 1.0f64;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / (B_HALF + kf) * z / (kf + 1.0);
        if term == 0.0 {
            return Ok((sum, max_term));
        }
        sum += term;
        max_term = max_term.max(term.abs());
        if !term.is_finite() || !sum.is_finite() {
            return Err(SpecialError::Overflow("1F1 series"));
        }
        if past_peak(a, z, k + 1) && term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            return Ok((sum, max_term));
        }
        if past_peak(a, z, k + 1) && term.abs() <= 1e-30 * max_term {
            return Ok((sum, max_term));
        }
    }
    Err(SpecialError::NotConverged("1F1 series"))
}

fn series_dd(a: f64, z: f64) -> Result<f64, SpecialError> {
    let zd = Dd::new(z);
    let ad = Dd::new(a);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut max_term = 1.0f64;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term = term * (ad + Dd::new(kf)) * zd / (Dd::new(B_HALF + kf) * Dd::new(kf + 1.0));
        if term.hi == 0.0 {
            return Ok(sum.to_f64());
        }
        sum = sum + term;
        max_term = max_term.max(term.hi.abs());
        if past_peak(a, z, k + 1) && (term.hi.abs() <= 1e-34 * max_term || term.hi.abs() <= 1e-32 * sum.hi.abs()) {
            return Ok(sum.to_f64());
        }
    }
    Err(SpecialError::NotConverged("1F1 double-double series"))
}

/// Confluent hypergeometric `1F1(a; 1/2; z)` for `z >= 0`.
///
/// Plain summation first; if the largest term dwarfs the result by more than
/// `1e6` the sum is redone in double-double arithmetic.
pub fn kummer_1f1(a: f64, z: f64) -> Result<f64, SpecialError> {
    if !(a.is_finite() && z.is_finite()) || z < 0.0 {
        return Err(SpecialError::InvalidInput(format!(
            "1F1 needs finite a and z >= 0 (a={a}, z={z})"
        )));
    }
    if z > 700.0 {
        return Err(SpecialError::Overflow("1F1 argument above 700"));
    }
    let (sum, max_term) = series_f64(a, z)?;
    if max_term > CANCELLATION_LIMIT * sum.abs() {
        return series_dd(a, z);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_examples() {
        assert_eq!(kummer_1f1(0.0, 5.0).unwrap(), 1.0);
        assert_eq!(kummer_1f1(-1.0, 0.5).unwrap(), 0.0);
        let e = kummer_1f1(0.5, 1.0).unwrap();
        assert!((e - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn polynomial_truncation() {
        // 1F1(-2; 1/2; z) = 1 - 4z + 4z^2/3
        for &z in &[0.0, 0.3, 1.7, 12.0] {
            let exact = 1.0 - 4.0 * z + 4.0 * z * z / 3.0;
            let got = kummer_1f1(-2.0, z).unwrap();
            assert!((got - exact).abs() <= 1e-14 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn cancellation_regime_matches_closed_form() {
        // oracle: Kummer's transformation e^z 1F1(b - a; b; -z), summed independently
        for &(a, z) in &[(-0.3, 25.0), (-1.7, 30.0), (-7.25, 20.0)] {
            let got = kummer_1f1(a, z).unwrap();
            let reference = transformed(a, z);
            assert!(
                (got - reference).abs() <= 1e-12 * (1.0 + got.abs()),
                "a={a} z={z}: {got} vs {reference}"
            );
        }
    }

    fn transformed(a: f64, z: f64) -> f64 {
        let bma = Dd::new(B_HALF - a);
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for k in 0..4000 {
            let kf = k as f64;
            term = term * (bma + Dd::new(kf)) * Dd::new(-z) / (Dd::new(B_HALF + kf) * Dd::new(kf + 1.0));
            sum = sum + term;
        }
        // e^z in double-double via squaring of a Taylor series at z/64
        let mut ex = Dd::ONE;
        let mut t = Dd::ONE;
        let w = Dd::new(z / 64.0);
        for k in 1..60 {
            t = t * w / Dd::new(k as f64);
            ex = ex + t;
        }
        for _ in 0..6 {
            ex = ex * ex;
        }
        (ex * sum).to_f64()
    }

    #[test]
    fn invalid_inputs() {
        assert!(kummer_1f1(0.5, -1.0).is_err());
        assert!(kummer_1f1(f64::NAN, 1.0).is_err());
    }
}
