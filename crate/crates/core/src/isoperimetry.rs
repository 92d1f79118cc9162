//! Gaussian masses, boundary measures and test-function ratios for candidate sets in a
//! punctured domain.
//!
//! Masses are normalized by the Gaussian mass of the domain. Boundary measures count only
//! the part of the boundary lying inside the domain: faces glued to the obstacle do not
//! contribute.

use crate::bounds::{BoundReport, Quantity, Side};
use crate::geometry::{DomainSpec, GeometryError, Obstacle};
use crate::quad::integrate;
use crate::special::{gamma_p, gaussian_tail, ln_gamma, SpecialError};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsoError {
    #[error("set does not match the domain: {0}")]
    Mismatch(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

type Result<T> = std::result::Result<T, IsoError>;

/// Sets whose Gaussian mass and boundary measure have closed or one-dimensional forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidateSet {
    /// `{x1 >= threshold}`
    HalfSpace { threshold: f64 },
    /// `{x1 >= a + r, |x_i| <= u for i >= 2}`: the slab behind a cube of half width `r`
    /// centred at `(a, 0, ..)`.
    SquareShadow { a: f64, r: f64, u: f64 },
    /// `{x1 >= a, |(x2, .., xd)| <= u}` minus the ball of radius `r` centred at `(a, 0, ..)`.
    Cap { a: f64, r: f64, u: f64 },
    /// `{y <= x1 <= y + depth, |x2| <= arm / 2}` inside the notch of the planar trap.
    TrapNotch { y: f64, arm: f64, depth: f64 },
}

/// `int_lo^hi exp(-lambda t^2) dt`; empty when `hi <= lo`.
fn g(lambda: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let s = lambda.sqrt();
    Ok(gaussian_tail(lo * s, hi * s)? / s)
}

fn box_mass(lambda: f64, lo: &[f64], hi: &[f64]) -> Result<f64> {
    let mut m = 1.0;
    for (l, h) in lo.iter().zip(hi) {
        m *= g(lambda, *l, *h)?;
        if m == 0.0 {
            break;
        }
    }
    Ok(m)
}

fn intersect(lo: &[f64], hi: &[f64], lo2: &[f64], hi2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (
        lo.iter().zip(lo2).map(|(a, b)| a.max(*b)).collect(),
        hi.iter().zip(hi2).map(|(a, b)| a.min(*b)).collect(),
    )
}

/// Closed axis-aligned pieces whose union is the obstacle (cube or trap).
fn obstacle_boxes(obstacle: &Obstacle) -> Vec<(Vec<f64>, Vec<f64>)> {
    match obstacle {
        Obstacle::Hypercube { center, half_width } => vec![(
            center.iter().map(|c| c - half_width).collect(),
            center.iter().map(|c| c + half_width).collect(),
        )],
        Obstacle::Trap { y, arm } => {
            let (y, a) = (*y, *arm);
            vec![
                (vec![y - a, -a], vec![y, a]),
                (vec![y, a / 2.0], vec![y + a, a]),
                (vec![y, -a], vec![y + a, -a / 2.0]),
            ]
        }
        _ => Vec::new(),
    }
}

fn ln_unit_sphere_area(k: usize) -> f64 {
    // area of the unit sphere in R^k
    let h = 0.5 * k as f64;
    std::f64::consts::LN_2 + h * PI.ln() - ln_gamma(h)
}

/// Gaussian mass of the `(d-1)`-ball of radius `rad` centred at `center` with coordinate
/// `skip` removed, clipped to the box (coordinate `skip` ignored).
fn ball_section(lambda: f64, center: &[f64], skip: usize, rad: f64, lo: &[f64], hi: &[f64]) -> Result<f64> {
    if !(rad > 0.0) {
        return Ok(0.0);
    }
    let others: Vec<usize> = (0..center.len()).filter(|&j| j != skip).collect();
    if others
        .iter()
        .any(|&j| lo[j] >= center[j] + rad || hi[j] <= center[j] - rad)
    {
        return Ok(0.0);
    }
    if others.len() == 1 {
        let j = others[0];
        return g(lambda, (center[j] - rad).max(lo[j]), (center[j] + rad).min(hi[j]));
    }
    let centred = others.iter().all(|&j| center[j] == 0.0);
    let covered = others.iter().all(|&j| lo[j] <= -rad && hi[j] >= rad);
    if !(centred && covered) {
        return Err(IsoError::Unsupported(
            "clipped or off-axis ball sections need d = 2".into(),
        ));
    }
    let k = others.len() as f64;
    Ok((PI / lambda).powf(0.5 * k) * gamma_p(0.5 * k, lambda * rad * rad)?)
}

/// Gaussian mass of `ball(center, rho) ∩ box`, slicing along the first axis.
fn ball_box_mass(lambda: f64, center: &[f64], rho: f64, lo: &[f64], hi: &[f64]) -> Result<f64> {
    let c1 = center[0];
    let s_lo = (lo[0] - c1).max(-rho);
    let s_hi = (hi[0] - c1).min(rho);
    if !(s_hi > s_lo) {
        return Ok(0.0);
    }
    let (p_lo, p_hi) = ((s_lo / rho).asin(), (s_hi / rho).asin());
    // probe once so that unsupported sections surface as errors
    ball_section(lambda, center, 0, rho * (0.5 * (p_lo + p_hi)).cos(), lo, hi)?;
    let f = |p: f64| {
        let x1 = c1 + rho * p.sin();
        let rad = rho * p.cos();
        (-lambda * x1 * x1).exp() * ball_section(lambda, center, 0, rad, lo, hi).unwrap_or(0.0) * rad
    };
    Ok(integrate(f, p_lo, p_hi, 1e-300, 1e-13).value)
}

/// The ball centre rotated onto the positive first axis; the Gaussian weight is invariant.
fn on_axis(center: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; center.len()];
    c[0] = center.iter().map(|v| v * v).sum::<f64>().sqrt();
    c
}

fn infinite_box(d: usize) -> (Vec<f64>, Vec<f64>) {
    (vec![f64::NEG_INFINITY; d], vec![f64::INFINITY; d])
}

/// Unnormalized Gaussian mass `int_{D ∩ box} exp(-lambda |x|^2) dx`.
fn domain_box_mass_raw(spec: &DomainSpec, lo: &[f64], hi: &[f64]) -> Result<f64> {
    let l = spec.lambda;
    match &spec.obstacle {
        Obstacle::None => box_mass(l, lo, hi),
        Obstacle::Ball { center, radius } => Ok(box_mass(l, lo, hi)? - ball_box_mass(l, center, *radius, lo, hi)?),
        Obstacle::Shell { center, inner, outer } => {
            Ok(ball_box_mass(l, center, *outer, lo, hi)? - ball_box_mass(l, center, *inner, lo, hi)?)
        }
        Obstacle::Hypercube { .. } | Obstacle::Trap { .. } => {
            let mut m = box_mass(l, lo, hi)?;
            for (blo, bhi) in obstacle_boxes(&spec.obstacle) {
                let (ilo, ihi) = intersect(lo, hi, &blo, &bhi);
                m -= box_mass(l, &ilo, &ihi)?;
            }
            Ok(m.max(0.0))
        }
    }
}

/// Unnormalized Gaussian mass of the whole domain.
pub fn domain_gaussian_mass(spec: &DomainSpec) -> Result<f64> {
    spec.validate()?;
    let d = spec.dim;
    let (lo, hi) = infinite_box(d);
    let rotated = match &spec.obstacle {
        Obstacle::Ball { center, radius } => DomainSpec {
            obstacle: Obstacle::Ball {
                center: on_axis(center),
                radius: *radius,
            },
            ..spec.clone()
        },
        Obstacle::Shell { center, inner, outer } => DomainSpec {
            obstacle: Obstacle::Shell {
                center: on_axis(center),
                inner: *inner,
                outer: *outer,
            },
            ..spec.clone()
        },
        _ => spec.clone(),
    };
    domain_box_mass_raw(&rotated, &lo, &hi)
}

/// Normalized mass of `D ∩ [lo, hi]`; bounds may be infinite.
pub fn region_mass(spec: &DomainSpec, lo: &[f64], hi: &[f64]) -> Result<f64> {
    if lo.len() != spec.dim || hi.len() != spec.dim {
        return Err(GeometryError::DimensionMismatch {
            expected: spec.dim,
            got: lo.len().min(hi.len()),
        }
        .into());
    }
    Ok(domain_box_mass_raw(spec, lo, hi)? / domain_gaussian_mass(spec)?)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl CandidateSet {
    /// Checks that the set is well formed and consistent with the domain.
    pub fn check(&self, spec: &DomainSpec) -> Result<()> {
        spec.validate()?;
        let bad = |m: &str| Err(IsoError::Mismatch(m.to_string()));
        match self {
            CandidateSet::HalfSpace { threshold } => {
                if !threshold.is_finite() {
                    return bad("threshold must be finite");
                }
            }
            CandidateSet::SquareShadow { a, r, u } => {
                if !(a.is_finite() && *r > 0.0 && *u > 0.0 && u.is_finite()) {
                    return bad("shadow needs r > 0 and u > 0");
                }
            }
            CandidateSet::Cap { a, r, u } => {
                if !(*u > 0.0 && u <= r) {
                    return bad("cap needs 0 < u <= r");
                }
                match &spec.obstacle {
                    Obstacle::Ball { center, radius }
                        if close(*radius, *r) && close(center[0], *a) && center[1..].iter().all(|c| *c == 0.0) => {}
                    _ => return bad("cap needs a ball obstacle of radius r centred at (a, 0, ..)"),
                }
            }
            CandidateSet::TrapNotch { y, arm, depth } => {
                if spec.obstacle != (Obstacle::Trap { y: *y, arm: *arm }) {
                    return bad("notch parameters must match the trap obstacle");
                }
                if !(*depth > 0.0 && depth <= arm) {
                    return bad("notch depth must lie in (0, arm]");
                }
            }
        }
        Ok(())
    }

    /// The set as `D ∩ [lo, hi]`, when it has that form.
    fn as_box(&self, d: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let (mut lo, mut hi) = infinite_box(d);
        match self {
            CandidateSet::HalfSpace { threshold } => lo[0] = *threshold,
            CandidateSet::SquareShadow { a, r, u } => {
                lo[0] = a + r;
                for i in 1..d {
                    lo[i] = -u;
                    hi[i] = *u;
                }
            }
            CandidateSet::TrapNotch { y, arm, depth } => {
                lo = vec![*y, -arm / 2.0];
                hi = vec![y + depth, arm / 2.0];
            }
            CandidateSet::Cap { .. } => return None,
        }
        Some((lo, hi))
    }

    fn widened(&self, h: f64) -> CandidateSet {
        match self.clone() {
            CandidateSet::HalfSpace { threshold } => CandidateSet::HalfSpace {
                threshold: threshold - h,
            },
            CandidateSet::SquareShadow { a, r, u } => CandidateSet::SquareShadow { a: a - h, r, u: u + h },
            CandidateSet::Cap { a, r, u } => CandidateSet::Cap { a, r, u: u + h },
            CandidateSet::TrapNotch { y, arm, depth } => CandidateSet::TrapNotch {
                y,
                arm,
                depth: depth + h,
            },
        }
    }
}

/// `int_{s0}^{s1} s^{d-2} e^{-lambda s^2} int_{a + sqrt(r^2 - s^2)}^inf e^{-lambda t^2} dt ds`
/// times the area of the unit sphere in `R^{d-1}`: the cap mass between two widths.
fn cap_shell_raw(lambda: f64, d: usize, a: f64, r: f64, s0: f64, s1: f64) -> Result<f64> {
    if !(s1 > s0) {
        return Ok(0.0);
    }
    let sigma = ln_unit_sphere_area(d - 1).exp();
    let k = (d - 2) as i32;
    let f = |s: f64| {
        let front = a + (r * r - s * s).max(0.0).sqrt();
        s.powi(k) * (-lambda * s * s).exp() * g(lambda, front, f64::INFINITY).unwrap_or(0.0)
    };
    Ok(sigma * integrate(f, s0, s1, 1e-300, 1e-12).value)
}

/// Normalized Gaussian mass of the set.
pub fn set_mass(spec: &DomainSpec, set: &CandidateSet) -> Result<f64> {
    set.check(spec)?;
    let raw = match set {
        CandidateSet::Cap { a, r, u } => cap_shell_raw(spec.lambda, spec.dim, *a, *r, 0.0, *u)?,
        _ => {
            let (lo, hi) = set.as_box(spec.dim).expect("box-shaped set");
            domain_box_mass_raw(spec, &lo, &hi)?
        }
    };
    Ok(raw / domain_gaussian_mass(spec)?)
}

/// `(d-1)`-dimensional Gaussian mass of the face `{x_k = v} ∩ box` covered by the closed
/// obstacle, without the factor `exp(-lambda v^2)`.
fn face_in_obstacle(spec: &DomainSpec, k: usize, v: f64, lo: &[f64], hi: &[f64]) -> Result<f64> {
    let l = spec.lambda;
    let tol = spec.tol_boundary();
    match &spec.obstacle {
        Obstacle::None | Obstacle::Shell { .. } => Ok(0.0),
        Obstacle::Ball { center, radius } => {
            let dist = v - center[k];
            ball_section(l, center, k, (radius * radius - dist * dist).max(0.0).sqrt(), lo, hi)
        }
        Obstacle::Hypercube { .. } | Obstacle::Trap { .. } => {
            let mut pieces = Vec::new();
            for (blo, bhi) in obstacle_boxes(&spec.obstacle) {
                if v < blo[k] - tol || v > bhi[k] + tol {
                    continue;
                }
                let (ilo, ihi) = intersect(lo, hi, &blo, &bhi);
                if (0..spec.dim).all(|j| j == k || ihi[j] > ilo[j]) {
                    pieces.push((ilo, ihi));
                }
            }
            if spec.dim == 2 {
                // pieces of a planar trap face may overlap at their ends: merge intervals
                let j = 1 - k;
                let mut iv: Vec<(f64, f64)> = pieces.iter().map(|(a, b)| (a[j], b[j])).collect();
                iv.sort_by(|x, y| x.0.total_cmp(&y.0));
                let mut total = 0.0;
                let mut cur: Option<(f64, f64)> = None;
                for (a, b) in iv {
                    match cur {
                        Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
                        Some((ca, cb)) => {
                            total += g(l, ca, cb)?;
                            cur = Some((a, b));
                        }
                        None => cur = Some((a, b)),
                    }
                }
                if let Some((ca, cb)) = cur {
                    total += g(l, ca, cb)?;
                }
                return Ok(total);
            }
            let mut total = 0.0;
            for (ilo, ihi) in pieces {
                let mut m = 1.0;
                for j in (0..spec.dim).filter(|&j| j != k) {
                    m *= g(l, ilo[j], ihi[j])?;
                }
                total += m;
            }
            Ok(total)
        }
    }
}

/// Mass of the face `{x_k = v} ∩ box ∩ D`, without the factor `exp(-lambda v^2)`.
fn face_in_domain(spec: &DomainSpec, k: usize, v: f64, lo: &[f64], hi: &[f64]) -> Result<f64> {
    let l = spec.lambda;
    if let Obstacle::Shell { center, inner, outer } = &spec.obstacle {
        let dist = v - center[k];
        let big = ball_section(l, center, k, (outer * outer - dist * dist).max(0.0).sqrt(), lo, hi)?;
        let small = ball_section(l, center, k, (inner * inner - dist * dist).max(0.0).sqrt(), lo, hi)?;
        return Ok(big - small);
    }
    let mut full = 1.0;
    for j in (0..spec.dim).filter(|&j| j != k) {
        full *= g(l, lo[j], hi[j])?;
    }
    Ok((full - face_in_obstacle(spec, k, v, lo, hi)?).max(0.0))
}

/// Gaussian measure of the boundary of the set inside the domain (normalized).
pub fn surface_mass(spec: &DomainSpec, set: &CandidateSet) -> Result<f64> {
    set.check(spec)?;
    let l = spec.lambda;
    let raw = match set {
        CandidateSet::Cap { a, r, u } => {
            let d = spec.dim;
            let sigma = ln_unit_sphere_area(d - 1).exp();
            let front = a + (r * r - u * u).max(0.0).sqrt();
            sigma * u.powi(d as i32 - 2) * (-l * u * u).exp() * g(l, front, f64::INFINITY)?
        }
        _ => {
            let (lo, hi) = set.as_box(spec.dim).expect("box-shaped set");
            let mut total = 0.0;
            for k in 0..spec.dim {
                for v in [lo[k], hi[k]] {
                    if v.is_finite() {
                        total += (-l * v * v).exp() * face_in_domain(spec, k, v, &lo, &hi)?;
                    }
                }
            }
            total
        }
    };
    Ok(raw / domain_gaussian_mass(spec)?)
}

/// `(mass(A_h) - mass(A)) / h` for the enlargement of the set by `h` across its free faces.
pub fn enlargement_quotient(spec: &DomainSpec, set: &CandidateSet, h: f64) -> Result<f64> {
    set.check(spec)?;
    let z = domain_gaussian_mass(spec)?;
    let wide = set.widened(h);
    let diff = match (set, &wide) {
        (CandidateSet::Cap { a, r, u }, CandidateSet::Cap { u: uw, .. }) => {
            cap_shell_raw(spec.lambda, spec.dim, *a, *r, *u, *uw)?
        }
        _ => {
            let (lo, hi) = set.as_box(spec.dim).expect("box-shaped set");
            let (wlo, whi) = wide.as_box(spec.dim).expect("box-shaped set");
            domain_box_mass_raw(spec, &wlo, &whi)? - domain_box_mass_raw(spec, &lo, &hi)?
        }
    };
    Ok(diff / (z * h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheegerRatio {
    /// `mass / surface`, infinite for a set without free boundary.
    pub ratio: f64,
    pub mass: f64,
    pub surface: f64,
    /// The set had mass above one half and the complement was used.
    pub complement: bool,
}

/// Cheeger ratio of one set: lower-bound evidence for the Cheeger constant only.
pub fn cheeger_ratio(spec: &DomainSpec, set: &CandidateSet) -> Result<CheegerRatio> {
    let mass = set_mass(spec, set)?;
    let surface = surface_mass(spec, set)?;
    let complement = mass > 0.5;
    let m = if complement { 1.0 - mass } else { mass };
    let ratio = if surface > 0.0 { m / surface } else { f64::INFINITY };
    Ok(CheegerRatio {
        ratio,
        mass,
        surface,
        complement,
    })
}

/// Closed-form lower bound for the Cheeger ratio of the slab behind a cube of half width `r`.
pub fn shadow_cheeger_lower(lambda: f64, d: usize, r: f64) -> f64 {
    let s = r * lambda.sqrt();
    (s * s).exp() * (1.0 - (-s * s).exp() / s) / (2.0 * (d as f64 - 1.0) * lambda.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapBound {
    pub report: BoundReport,
    pub mass_a: f64,
    pub mass_b: f64,
    /// `mass_a / (mass_b - mass_a)`
    pub ratio: f64,
    /// Closed-form lower estimate of `ratio`.
    pub chain_bound: f64,
    pub chain_holds: bool,
}

/// Test-function lower bound for the planar trap at stiffness 1: a `2/arm`-Lipschitz
/// function equal to 1 on the front half of the notch and 0 beyond it.
pub fn trap_lower_bound(y: f64, arm: f64) -> Result<TrapBound> {
    let spec = DomainSpec::new(2, 1.0, Obstacle::Trap { y, arm })?;
    let mass_a = set_mass(
        &spec,
        &CandidateSet::TrapNotch {
            y,
            arm,
            depth: arm / 2.0,
        },
    )?;
    let mass_b = set_mass(&spec, &CandidateSet::TrapNotch { y, arm, depth: arm })?;
    let back = region_mass(&spec, &[y + arm / 2.0, -arm / 2.0], &[y + arm, arm / 2.0])?;
    let ratio = mass_a / back;
    // variance >= mass_a - mass_b^2 >= mass_a / 2, energy <= (4 / arm^2) back
    let var_ok = mass_b * mass_b <= 0.5 * mass_a;
    let value = arm * arm * ratio / 8.0;
    let q = arm * (y + arm / 4.0);
    let chain_bound =
        2.0 * y * y / (1.0 + 2.0 * y * y) * q.exp() * (-(-q).exp_m1()) / (-(-arm * (y + 0.75 * arm)).exp_m1());
    let chain_holds = y > 0.0 && ratio >= chain_bound * (1.0 - 1e-12);
    let report = BoundReport::explicit(
        "trap/test-function-lower",
        Side::Lower,
        value,
        var_ok,
        format!(
            "mass_b^2 <= mass_a / 2 ({:.3e} vs {:.3e})",
            mass_b * mass_b,
            0.5 * mass_a
        ),
    );
    Ok(TrapBound {
        report,
        mass_a,
        mass_b,
        ratio,
        chain_bound,
        chain_holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapScanOptions {
    /// Largest admitted `a / r`.
    pub max_aspect: f64,
    pub n_u: usize,
    pub n_eps: usize,
    /// Value of the free dimensional constant in the envelope report.
    pub c_d: f64,
}

impl Default for CapScanOptions {
    fn default() -> Self {
        CapScanOptions {
            max_aspect: 4.0,
            n_u: 48,
            n_eps: 48,
            c_d: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapScanRow {
    pub u: f64,
    pub eps: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapScan {
    /// Best closed-form value over the scan whose variance condition was verified.
    pub best: BoundReport,
    /// Exact variance over energy bound of the same test function, from computed masses.
    pub certificate: BoundReport,
    pub envelope: BoundReport,
    pub rows: Vec<CapScanRow>,
}

/// Closed-form cap lower bound at stiffness 1 (0 outside its range).
fn cap_formula(d: usize, a: f64, r: f64, u: f64, eps: f64) -> f64 {
    if !(u > 2.0 * eps && eps > 0.0 && u <= r) {
        return 0.0;
    }
    let w = |s: f64| (r * r - s * s).max(0.0).sqrt();
    let (v0, v1, v2) = (w(u), w(u - eps), w(u - 2.0 * eps));
    if a + v0 < 1.0 {
        return 0.0;
    }
    let x = eps * (2.0 * u - 3.0 * eps) / (v1 + v2);
    let y = eps * (2.0 * u - eps) / (v1 + v0);
    let h = if a > 0.0 {
        -(-2.0 * a * x).exp_m1() / (2.0 * a * y).exp_m1()
    } else {
        x / y
    };
    eps * eps * (a + v0) * (a + v1) / (1.0 + 2.0 * (a + v2).powi(2)) * ((u - 2.0 * eps) / u).powi(d as i32 - 2) * h
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
}

/// Scans widths `u` and margins `eps` of the cap test function behind a ball of radius `r`
/// centred at distance `a` from the origin.
pub fn cap_lower_scan(lambda: f64, d: usize, a: f64, r: f64, opts: &CapScanOptions) -> Result<CapScan> {
    let s = lambda.sqrt();
    let (a1, r1) = (a * s, r * s);
    let mut center = vec![0.0; d];
    center[0] = a1;
    let unit = DomainSpec::new(d, 1.0, Obstacle::Ball { center, radius: r1 })?;
    let ok_aspect = a >= 0.0 && a / r <= opts.max_aspect;

    let mut rows = Vec::new();
    if ok_aspect {
        for u in log_grid(1e-3 * r1, r1, opts.n_u) {
            for eps in log_grid(1e-3 * u, 0.4999 * u, opts.n_eps) {
                rows.push(CapScanRow {
                    u: u / s,
                    eps: eps / s,
                    value: cap_formula(d, a1, r1, u, eps) / lambda,
                });
            }
        }
    }
    let mut order: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].value > 0.0).collect();
    order.sort_by(|&i, &j| rows[j].value.total_cmp(&rows[i].value));

    let z = domain_gaussian_mass(&unit)?;
    let mut chosen = None;
    for &i in order.iter().take(200) {
        let (u, eps) = (rows[i].u * s, rows[i].eps * s);
        let inner = cap_shell_raw(1.0, d, a1, r1, 0.0, u - eps)? / z;
        let rim = cap_shell_raw(1.0, d, a1, r1, u - eps, u)? / z;
        let outer = inner + rim;
        if outer * outer <= 0.5 * inner {
            chosen = Some((i, inner, outer, rim));
            break;
        }
    }
    let condition = format!(
        "a / r <= {}, u > 2 eps, a + sqrt(r^2 - u^2) >= 1, variance check",
        opts.max_aspect
    );
    let (best, certificate) = match chosen {
        Some((i, inner, outer, rim)) => {
            let row = rows[i];
            let eps1 = row.eps * s;
            let cert = (inner - outer * outer) * eps1 * eps1 / rim / lambda;
            (
                BoundReport::explicit("cap/closed-form-lower", Side::Lower, row.value, true, condition.clone()),
                BoundReport::explicit(
                    "cap/test-function-certificate",
                    Side::Lower,
                    cert,
                    true,
                    format!("u = {}, eps = {}", row.u, row.eps),
                ),
            )
        }
        None => (
            BoundReport::explicit("cap/closed-form-lower", Side::Lower, f64::NAN, false, condition.clone()),
            BoundReport::explicit("cap/test-function-certificate", Side::Lower, f64::NAN, false, condition),
        ),
    };
    let envelope = BoundReport::symbolic(
        "cap/dimensional-envelope",
        Side::Lower,
        (1.0 + r / a.abs().max(1.0)) / lambda,
        ("C_d", opts.c_d),
        true,
        "all centres and radii",
    );
    Ok(CapScan {
        best,
        certificate,
        envelope,
        rows,
    })
}

/// Evidence about the Cheeger constant fed to the conversion into a Poincare bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum CheegerEvidence {
    /// A proven upper bound on the Cheeger constant.
    CertifiedUpper(f64),
    /// The ratio of one set: bounds the Cheeger constant from below only.
    SingleSetRatio(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheegerConversion {
    /// `4 c^2`
    pub value: f64,
    pub quantity: Quantity,
    pub warning: Option<String>,
}

/// `C_P <= 4 C_C^2`. Only meaningful when the input bounds the Cheeger constant from above.
pub fn cheeger_to_poincare(evidence: CheegerEvidence) -> CheegerConversion {
    match evidence {
        CheegerEvidence::CertifiedUpper(c) => CheegerConversion {
            value: 4.0 * c * c,
            quantity: Quantity::PoincareConstant,
            warning: None,
        },
        CheegerEvidence::SingleSetRatio(c) => CheegerConversion {
            value: 4.0 * c * c,
            quantity: Quantity::CheegerConstant,
            warning: Some(
                "a single-set ratio bounds the Cheeger constant from below; 4 c^2 is not a Poincare upper bound".into(),
            ),
        },
    }
}
