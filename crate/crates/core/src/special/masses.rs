use super::gamma::ln_upper_gamma;
use super::SpecialError;

fn check(d: usize, lambda: f64, r: f64) -> Result<(), SpecialError> {
    if d == 0 || !(lambda > 0.0) || !(r >= 0.0) || !r.is_finite() {
        return Err(SpecialError::InvalidInput(format!(
            "radial mass needs d >= 1, lambda > 0, r >= 0 (d={d}, lambda={lambda}, r={r})"
        )));
    }
    Ok(())
}

/// `ln int_r^inf rho^{d-1} e^{-lambda rho^2} drho`.
pub fn ln_radial_gaussian_mass(d: usize, lambda: f64, r: f64) -> Result<f64, SpecialError> {
    check(d, lambda, r)?;
    let s = 0.5 * d as f64;
    Ok(ln_upper_gamma(s, lambda * r * r)? - std::f64::consts::LN_2 - s * lambda.ln())
}

/// `int_r^inf rho^{d-1} e^{-lambda rho^2} drho = Gamma(d/2, lambda r^2) / (2 lambda^{d/2})`.
pub fn radial_gaussian_mass(d: usize, lambda: f64, r: f64) -> Result<f64, SpecialError> {
    Ok(ln_radial_gaussian_mass(d, lambda, r)?.exp())
}

/// Second moment of the radial law with density proportional to
/// `rho^{d-1} e^{-lambda rho^2}` on `(r, inf)`.
pub fn xi_second_moment(d: usize, lambda: f64, r: f64) -> Result<f64, SpecialError> {
    let base = d as f64 / (2.0 * lambda);
    if r == 0.0 {
        check(d, lambda, r)?;
        return Ok(base);
    }
    let ln_a = ln_radial_gaussian_mass(d, lambda, r)?;
    let boundary = (d as f64 * r.ln() - lambda * r * r - (2.0 * lambda).ln() - ln_a).exp();
    Ok(base + boundary)
}
