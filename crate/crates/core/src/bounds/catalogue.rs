//! All bounds that apply to one domain, and the resulting explicit envelope.

use super::formulas::*;
use super::{BoundReport, BoundsError, FreeConstants, Quantity, Side};
use crate::geometry::{DomainSpec, Obstacle};
use crate::isoperimetry::{cap_lower_scan, region_mass, trap_lower_bound, CapScanOptions, IsoError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregateOptions {
    pub constants: FreeConstants,
    /// Transition width of the slab test function, in units of `1 / sqrt(lambda)`.
    pub iso_eps: f64,
    /// Smallest `r sqrt(lambda)` for which the slab test function is evaluated.
    pub iso_guard: f64,
    pub shell_q: f64,
    pub shell_s: f64,
    pub cap_scan: CapScanOptions,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions {
            constants: FreeConstants::default(),
            iso_eps: 1.0,
            iso_guard: 1.0,
            shell_q: 3.0,
            shell_s: 1.0,
            cap_scan: CapScanOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCatalogue {
    pub spec: DomainSpec,
    pub reports: Vec<BoundReport>,
    pub best_explicit_upper: Option<BoundReport>,
    pub best_explicit_lower: Option<BoundReport>,
    /// `best_explicit_lower <= best_explicit_upper`, or one side missing.
    pub envelope_ok: bool,
    pub findings: Vec<String>,
}

impl BoundCatalogue {
    pub fn find(&self, anchor: &str) -> Option<&BoundReport> {
        self.reports.iter().find(|r| r.anchor == anchor)
    }

    pub fn upper(&self) -> Option<f64> {
        self.best_explicit_upper.as_ref().map(|r| r.value)
    }

    pub fn lower(&self) -> Option<f64> {
        self.best_explicit_lower.as_ref().map(|r| r.value)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `mu({x1 >= 0} ∩ D) / (32 lambda)`, valid when the obstacle lies in `{x1 > 0}`: the
/// process started at the obstacle-free side needs the OU hitting time of 0, whose tail
/// decays at rate `lambda`.
fn origin_halfspace_lower(spec: &DomainSpec, applicable: bool) -> Result<BoundReport, BoundsError> {
    let anchor = "hitting-time/origin-halfspace-lower";
    let cond = "obstacle inside the open half space x1 > 0";
    if !applicable {
        return Ok(BoundReport::not_applicable(anchor, Side::Lower, cond));
    }
    let d = spec.dim;
    let mut lo = vec![f64::NEG_INFINITY; d];
    lo[0] = 0.0;
    let mass = region_mass(spec, &lo, &vec![f64::INFINITY; d])?;
    let mut rep = hitting_lower(mass.min(1.0), spec.lambda)?;
    rep.anchor = anchor.into();
    rep.condition = format!("{cond}; mass {mass:.6}");
    Ok(rep)
}

fn ball_reports(
    spec: &DomainSpec,
    y: f64,
    r: f64,
    o: &AggregateOptions,
    out: &mut Vec<BoundReport>,
) -> Result<(), BoundsError> {
    let (lambda, d, k) = (spec.lambda, spec.dim, &o.constants);
    if y == 0.0 {
        let (l, u, s) = centered_bounds(lambda, d, r);
        out.extend([l, u, s]);
    }
    out.push(perturbation_upper(lambda, d, y, r));
    out.push(perturbation_upper_safe(lambda, d, y, r));
    out.push(small_displacement_upper(lambda, d, y, r));
    out.push(small_displacement_upper_safe(lambda, d, y, r));
    out.push(decomposition_upper(lambda, d, y, r, k));
    out.push(lyapunov_small_radius_upper(lambda, d, r, lyapunov_best_b(lambda, d, r)));
    let b = far_best_b(lambda, d, y, r).unwrap_or(0.5);
    let (far, universal) = far_or_small_upper(lambda, d, y, r, b, k);
    out.extend([far, universal]);

    let mut scan_opts = o.cap_scan;
    scan_opts.c_d = k.c_d;
    match cap_lower_scan(lambda, d, y, r, &scan_opts) {
        Ok(scan) => out.extend([scan.best, scan.certificate, scan.envelope]),
        Err(IsoError::Unsupported(why)) => {
            out.push(BoundReport::not_applicable("cap/closed-form-lower", Side::Lower, why));
        }
        Err(e) => return Err(e.into()),
    }

    let mut center = vec![0.0; d];
    center[0] = y;
    let axis = DomainSpec::new(d, lambda, Obstacle::Ball { center, radius: r })?;
    out.push(origin_halfspace_lower(&axis, y > r)?);

    if d == 2 {
        let s = lambda.sqrt();
        for rep in shell_and_2d_reports(r * s, o.shell_q, o.shell_s, y * s, k) {
            out.push(rep.rescaled_from_unit(lambda));
        }
    }
    out.push(conjecture_line(lambda, d, r, k));
    Ok(())
}

fn cube_reports(
    spec: &DomainSpec,
    center: &[f64],
    r: f64,
    o: &AggregateOptions,
    out: &mut Vec<BoundReport>,
) -> Result<(), BoundsError> {
    let (lambda, d, k) = (spec.lambda, spec.dim, &o.constants);
    let on_axis = center[1..].iter().all(|&c| c == 0.0);
    if !on_axis {
        out.push(BoundReport::not_applicable(
            "square/explosion-lower-exact-rate",
            Side::Lower,
            "cube centre must lie on the first axis",
        ));
        return Ok(());
    }
    // reflect x1 -> -x1 so that the centre has a nonnegative first coordinate
    let a = center[0].abs();
    out.extend(square_obstacle_bounds(lambda, d, a, r, k)?);
    out.extend(isoperimetric_lower_reports(lambda, d, a, r, o.iso_eps, o.iso_guard)?);
    let mut c = vec![0.0; d];
    c[0] = a;
    let reflected = DomainSpec::new(
        d,
        lambda,
        Obstacle::Hypercube {
            center: c,
            half_width: r,
        },
    )?;
    out.push(origin_halfspace_lower(&reflected, a > r)?);
    out.push(conjecture_line(lambda, d, r, k));
    Ok(())
}

/// Evaluates every bound that applies to `spec` and computes the certified envelope.
pub fn aggregate(spec: &DomainSpec, options: &AggregateOptions) -> Result<BoundCatalogue, BoundsError> {
    spec.validate()?;
    let lambda = spec.lambda;
    let mut reports = Vec::new();
    match &spec.obstacle {
        Obstacle::None => {
            for side in [Side::Lower, Side::Upper] {
                reports.push(BoundReport::explicit(
                    "gaussian/exact",
                    side,
                    0.5 / lambda,
                    true,
                    "no obstacle",
                ));
            }
        }
        Obstacle::Ball { center, radius } => ball_reports(spec, norm(center), *radius, options, &mut reports)?,
        Obstacle::Hypercube { center, half_width } => cube_reports(spec, center, *half_width, options, &mut reports)?,
        Obstacle::Shell { center, inner, outer } => {
            if spec.dim == 2 {
                let s = lambda.sqrt();
                let q = outer - inner;
                for rep in shell_and_2d_reports(
                    inner * s,
                    q * s,
                    options.shell_s * q.min(1.0) * s,
                    norm(center) * s,
                    &options.constants,
                ) {
                    // the planar far-ball report concerns the punctured plane, not the annulus
                    if rep.quantity != Quantity::PoincareConstant {
                        reports.push(rep.rescaled_from_unit(lambda));
                    }
                }
            }
        }
        Obstacle::Trap { y, arm } => {
            let s = lambda.sqrt();
            reports.push(trap_lower_bound(y * s, arm * s)?.report.rescaled_from_unit(lambda));
            reports.push(origin_halfspace_lower(spec, y - arm > 0.0)?);
        }
    }
    Ok(finish(spec.clone(), reports))
}

fn finish(spec: DomainSpec, reports: Vec<BoundReport>) -> BoundCatalogue {
    let pick = |side: Side| {
        reports
            .iter()
            .filter(|r| r.side == side && r.in_envelope() && r.value.is_finite() && r.value > 0.0)
            .cloned()
            .reduce(|a, b| match side {
                Side::Upper if b.value < a.value => b,
                Side::Lower if b.value > a.value => b,
                _ => a,
            })
    };
    let (upper, lower) = (pick(Side::Upper), pick(Side::Lower));
    let mut findings = Vec::new();
    let envelope_ok = match (&lower, &upper) {
        (Some(l), Some(u)) if l.value > u.value * (1.0 + 1e-12) => {
            findings.push(format!(
                "envelope inverted: {} = {} exceeds {} = {}",
                l.anchor, l.value, u.anchor, u.value
            ));
            false
        }
        _ => true,
    };
    if let Some(l) = &lower {
        for r in reports.iter().filter(|r| {
            r.side == Side::Upper
                && r.applicable
                && r.explicit
                && !r.certified
                && r.quantity == Quantity::PoincareConstant
        }) {
            if r.value < l.value {
                findings.push(format!(
                    "uncertified {} = {} lies below the certified lower bound {} = {}",
                    r.anchor, r.value, l.anchor, l.value
                ));
            }
        }
    }
    BoundCatalogue {
        spec,
        reports,
        best_explicit_upper: upper,
        best_explicit_lower: lower,
        envelope_ok,
        findings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(d: usize, lambda: f64, y: f64, r: f64) -> DomainSpec {
        let mut center = vec![0.0; d];
        center[d - 1] = y;
        DomainSpec::new(d, lambda, Obstacle::Ball { center, radius: r }).unwrap()
    }

    #[test]
    fn centered_ball_envelope() {
        let cat = aggregate(&ball(2, 1.0, 0.0, 1.0), &AggregateOptions::default()).unwrap();
        assert_eq!(cat.lower(), Some(0.5));
        // the strict form 1.5 is reported but the envelope uses the safe form
        assert_eq!(cat.find("centered/upper").unwrap().value, 1.5);
        assert_eq!(cat.upper(), Some(2.0));
        assert!(cat.envelope_ok);
    }

    #[test]
    fn free_space_is_gaussian() {
        let spec = DomainSpec::new(3, 2.0, Obstacle::None).unwrap();
        let cat = aggregate(&spec, &AggregateOptions::default()).unwrap();
        assert_eq!((cat.lower(), cat.upper()), (Some(0.25), Some(0.25)));
    }

    #[test]
    fn cube_and_trap_lower_bounds() {
        let spec = DomainSpec::new(
            2,
            1.0,
            Obstacle::Hypercube {
                center: vec![4.0, 0.0],
                half_width: 2.0,
            },
        )
        .unwrap();
        let cat = aggregate(&spec, &AggregateOptions::default()).unwrap();
        let l = cat.lower().unwrap();
        assert!(l > 0.8, "{l}");
        assert!(cat.upper().is_none());
        let trap = DomainSpec::new(2, 1.0, Obstacle::Trap { y: 3.0, arm: 3.0 }).unwrap();
        let cat = aggregate(&trap, &AggregateOptions::default()).unwrap();
        assert!(cat.lower().unwrap() >= 23.3);
    }

    #[test]
    fn json_rendering() {
        let cat = aggregate(&ball(3, 1.0, 2.0, 0.5), &AggregateOptions::default()).unwrap();
        let text = serde_json::to_string(&cat).unwrap();
        assert!(text.contains("conjecture/upper") && text.contains("\"free_constant\""));
    }
}
