//! Verdicts comparing analytic bounds, spectral estimates and Monte Carlo evidence.
//! Every verdict names the rows it used, so it can be recomputed from the report alone.

use crate::error::CliError;
use oupinball_core::bounds::{aggregate, AggregateOptions, BoundCatalogue, BoundReport, Side};
use oupinball_core::spectral::{RadialGap, SpectralEstimate};
use oupinball_core::{DomainSpec, Obstacle};
use serde::Serialize;

/// Relative agreement required between a bound and its rescaled unit-stiffness counterpart.
const HOMOGENEITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    /// Anomaly consistent with known limits of the bounds, not a defect of the run.
    Finding,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    /// `catalogue:<anchor>`, `spectral`, `radial` or `mc:<label>`.
    pub references: Vec<String>,
    pub detail: String,
}

impl Verdict {
    pub fn new(check: &str, status: Status, references: Vec<String>, detail: impl Into<String>) -> Self {
        Verdict {
            check: check.into(),
            status,
            references,
            detail: detail.into(),
        }
    }

    pub fn pass_if(check: &str, ok: bool, references: Vec<String>, detail: impl Into<String>) -> Self {
        Verdict::new(check, if ok { Status::Pass } else { Status::Fail }, references, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    /// `grid` for the finite-volume estimate, `radial` for the one-dimensional oracle.
    pub source: String,
    pub value: f64,
    pub error_bar: f64,
    pub monotone: bool,
    pub warning: Option<String>,
}

impl SpectralSummary {
    pub fn grid(est: &SpectralEstimate) -> Self {
        SpectralSummary {
            source: "grid".into(),
            value: est.value,
            error_bar: est.error_bar,
            monotone: est.monotone,
            warning: est.warning.clone(),
        }
    }

    pub fn radial(gap: &RadialGap) -> Self {
        SpectralSummary {
            source: "radial".into(),
            value: gap.value,
            error_bar: gap.error * gap.value,
            monotone: true,
            warning: None,
        }
    }

    fn reference(&self) -> String {
        self.source.clone()
    }
}

/// One Monte Carlo estimate, optionally next to the value it should reproduce.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRow {
    pub label: String,
    pub estimate: f64,
    pub stderr: f64,
    pub reference: Option<f64>,
    pub samples: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheckReport {
    pub spec: Option<DomainSpec>,
    pub catalogue: Option<BoundCatalogue>,
    pub spectral: Option<SpectralSummary>,
    pub mc: Vec<McRow>,
    pub verdicts: Vec<Verdict>,
}

impl CrossCheckReport {
    pub fn new(spec: Option<DomainSpec>) -> Self {
        CrossCheckReport {
            spec,
            catalogue: None,
            spectral: None,
            mc: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn count(&self, status: Status) -> usize {
        self.verdicts.iter().filter(|v| v.status == status).count()
    }

    /// Adds the catalogue and its self-consistency verdicts.
    pub fn with_catalogue(&mut self, cat: BoundCatalogue, options: &AggregateOptions) -> Result<(), CliError> {
        self.verdicts.extend(catalogue_verdicts(&cat, options)?);
        self.catalogue = Some(cat);
        Ok(())
    }

    /// Adds a spectral estimate and compares it with the catalogue, if present.
    pub fn with_spectral(&mut self, summary: SpectralSummary) {
        if let Some(cat) = &self.catalogue {
            self.verdicts.extend(spectral_verdicts(cat, &summary));
        }
        self.spectral = Some(summary);
    }

    pub fn push_mc(&mut self, row: McRow) {
        self.mc.push(row);
    }
}

fn cat_ref(r: &BoundReport) -> String {
    format!("catalogue:{}", r.anchor)
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Upper => "upper",
        Side::Lower => "lower",
    }
}

/// Homogeneity against the unit-stiffness problem, envelope order and catalogue findings.
pub fn catalogue_verdicts(cat: &BoundCatalogue, options: &AggregateOptions) -> Result<Vec<Verdict>, CliError> {
    let mut out = Vec::new();
    let lambda = cat.spec.lambda;
    let unit = aggregate(&cat.spec.rescale_to_unit_lambda(), options)?;
    let mut worst = (0.0f64, String::new());
    let mut mismatch = None;
    if unit.reports.len() != cat.reports.len() {
        mismatch = Some(format!(
            "{} reports at lambda=1, {} here",
            unit.reports.len(),
            cat.reports.len()
        ));
    }
    for (a, b) in cat.reports.iter().zip(unit.reports) {
        if a.anchor != b.anchor || a.side != b.side {
            mismatch = Some(format!("report order differs at {}", a.anchor));
            break;
        }
        let b = b.rescaled_from_unit(lambda);
        if a.value.is_nan() && b.value.is_nan() || a.value == b.value {
            continue;
        }
        let rel = (a.value - b.value).abs() / a.value.abs().max(b.value.abs());
        if !(rel <= worst.0) {
            worst = (
                if rel.is_nan() { f64::INFINITY } else { rel },
                format!("{}/{}", a.anchor, side_name(a.side)),
            );
        }
    }
    let refs = vec!["catalogue".to_string(), "catalogue@lambda=1".to_string()];
    out.push(match mismatch {
        Some(m) => Verdict::new("homogeneity", Status::Fail, refs, m),
        None => Verdict::pass_if(
            "homogeneity",
            worst.0 <= HOMOGENEITY_TOL,
            refs,
            if worst.1.is_empty() {
                "every bound equals its rescaled unit-stiffness value exactly".to_string()
            } else {
                format!("largest relative deviation {:.3e} at {}", worst.0, worst.1)
            },
        ),
    });

    if let (Some(l), Some(u)) = (&cat.best_explicit_lower, &cat.best_explicit_upper) {
        out.push(Verdict::pass_if(
            "envelope-order",
            cat.envelope_ok,
            vec![cat_ref(l), cat_ref(u)],
            format!("lower {} vs upper {}", l.value, u.value),
        ));
    }
    for f in cat.findings.iter().filter(|f| f.starts_with("uncertified")) {
        let refs = cat
            .reports
            .iter()
            .filter(|r| f.contains(&r.anchor))
            .map(cat_ref)
            .collect();
        out.push(Verdict::new("catalogue", Status::Finding, refs, f.clone()));
    }
    Ok(out)
}

fn centered_radius(spec: &DomainSpec) -> Option<f64> {
    match &spec.obstacle {
        Obstacle::Ball { center, radius } if center.iter().all(|&c| c == 0.0) => Some(*radius),
        _ => None,
    }
}

/// Inside-envelope, centred sandwich and square-obstacle regime checks.
pub fn spectral_verdicts(cat: &BoundCatalogue, est: &SpectralSummary) -> Vec<Verdict> {
    let mut out = Vec::new();
    let (v, e) = (est.value, est.error_bar);
    let sref = est.reference();
    if cat.best_explicit_lower.is_some() || cat.best_explicit_upper.is_some() {
        let mut refs = vec![sref.clone()];
        let mut ok = true;
        let mut parts = Vec::new();
        if let Some(l) = &cat.best_explicit_lower {
            ok &= v + e >= l.value;
            refs.push(cat_ref(l));
            parts.push(format!("lower {}", l.value));
        }
        if let Some(u) = &cat.best_explicit_upper {
            ok &= v - e <= u.value;
            refs.push(cat_ref(u));
            parts.push(format!("upper {}", u.value));
        }
        out.push(Verdict::pass_if(
            "inside-envelope",
            ok,
            refs,
            format!("estimate {v} +- {e}; {}", parts.join(", ")),
        ));
    }

    if let Some(r) = centered_radius(&cat.spec) {
        let find = |a: &str| cat.find(a).filter(|rep| rep.applicable);
        if let (Some(lo), Some(safe)) = (find("centered/lower"), find("centered/upper-safe")) {
            let rel = if v > 0.0 { e / v } else { 0.0 };
            let (a, b) = (lo.value - e, safe.value * (1.0 + rel));
            out.push(Verdict::pass_if(
                "sandwich",
                v >= a && v <= b,
                vec![sref.clone(), cat_ref(lo), cat_ref(safe)],
                format!("r={r}: {v} in [{a}, {b}]"),
            ));
        }
        if let Some(strict) = find("centered/upper") {
            if v - e > strict.value {
                out.push(Verdict::new(
                    "sandwich-strict",
                    Status::Finding,
                    vec![sref.clone(), cat_ref(strict)],
                    format!("{v} +- {e} exceeds the strict centred upper bound {}", strict.value),
                ));
            }
        }
    }

    if matches!(cat.spec.obstacle, Obstacle::Hypercube { .. }) {
        let square = |r: &&BoundReport| r.anchor.starts_with("square/") || r.anchor.starts_with("hypercube/");
        let regime = if cat
            .reports
            .iter()
            .filter(square)
            .any(|r| r.applicable && r.anchor.contains("explosion-lower") && !r.anchor.ends_with("exact-rate"))
        {
            "explosion"
        } else if cat
            .reports
            .iter()
            .filter(square)
            .any(|r| r.applicable && r.anchor.ends_with("small-upper"))
        {
            "bounded"
        } else {
            "intermediate"
        };
        let rows: Vec<&BoundReport> = cat
            .reports
            .iter()
            .filter(square)
            .filter(|r| r.applicable && r.explicit && r.value.is_finite())
            .collect();
        let mut ok = true;
        let mut refs = vec![sref.clone()];
        for r in &rows {
            let holds = match r.side {
                Side::Upper => v - e <= r.value,
                Side::Lower => v + e >= r.value,
            };
            if r.certified {
                ok &= holds;
                refs.push(cat_ref(r));
            } else if !holds {
                out.push(Verdict::new(
                    "phase-transition-uncertified",
                    Status::Finding,
                    vec![sref.clone(), cat_ref(r)],
                    format!("estimate {v} +- {e} on the wrong side of {} = {}", r.anchor, r.value),
                ));
            }
        }
        if refs.len() > 1 {
            out.push(Verdict::pass_if(
                "phase-transition",
                ok,
                refs,
                format!("{regime} regime; estimate {v} +- {e}"),
            ));
        }
    }
    out
}

/// `|estimate - reference| <= 3 stderr`, with a small absolute floor for exact zeros.
pub fn mc_verdict(check: &str, row: &McRow) -> Verdict {
    let refs = vec![format!("mc:{}", row.label)];
    match row.reference {
        Some(want) => {
            let dev = (row.estimate - want).abs();
            let tol = 3.0 * row.stderr + 1e-12 * want.abs();
            Verdict::pass_if(
                check,
                dev <= tol,
                refs,
                format!(
                    "{} vs {want}: {:.2} standard errors",
                    row.estimate,
                    dev / row.stderr.max(f64::MIN_POSITIVE)
                ),
            )
        }
        None => Verdict::new(
            check,
            Status::Finding,
            refs,
            format!("no finite reference; estimate {}", row.estimate),
        ),
    }
}
