use crate::config::{
    CheegerSection, Command, ExitSection, ExperimentConfig, SimulateSection, SweepParameter, SweepSection,
};
use crate::crosscheck::{mc_verdict, CrossCheckReport, McRow, SpectralSummary, Status, Verdict};
use crate::error::CliError;
use crate::output::{num, opt, Artifacts, Table};
use oupinball_core::bounds::{aggregate, AggregateOptions, BoundCatalogue};
use oupinball_core::isoperimetry::{
    cheeger_ratio, cheeger_to_poincare, shadow_cheeger_lower, trap_lower_bound, CandidateSet, CheegerEvidence,
};
use oupinball_core::pinball::{
    hit_time, kolmogorov_sf, ks_statistic, occupation_test, run_paths, OccupationTest, PathStats, SimConfig, Target,
};
use oupinball_core::special::{exit_moment_threshold, ou_exit_laplace, ou_hitting_cdf};
use oupinball_core::spectral::{poincare_estimate, radial_gap_oracle, RadialGap, SpectralEstimate};
use oupinball_core::{DomainSpec, Obstacle};
use rayon::prelude::*;
use serde::Serialize;

pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    match cmd {
        Command::Bounds => bounds(cfg),
        Command::Spectral => spectral(cfg),
        Command::Simulate => simulate(cfg),
        Command::ExitTime => exit_time(cfg),
        Command::Cheeger => cheeger(cfg),
        Command::Sweep => sweep(cfg),
    }
}

fn require<'a, T>(v: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::Config(format!("missing `{what}`")))
}

fn spec_of(cfg: &ExperimentConfig) -> Result<&DomainSpec, CliError> {
    let spec = require(&cfg.spec, "spec")?;
    spec.validate()?;
    Ok(spec)
}

fn seed_of(cfg: &ExperimentConfig) -> Result<u64, CliError> {
    cfg.seed
        .ok_or_else(|| CliError::Config("a seed is mandatory for Monte Carlo commands".into()))
}

/// Serde name of a unit enum variant.
fn tag<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn catalogue_table(cat: &BoundCatalogue) -> Table {
    let mut t = Table::new(&[
        "anchor",
        "side",
        "quantity",
        "value",
        "coefficient",
        "free_constant",
        "free_constant_value",
        "applicable",
        "explicit",
        "certified",
        "in_envelope",
        "condition",
    ]);
    for r in &cat.reports {
        let (name, value) = match &r.free_constant {
            Some(c) => (c.name.clone(), num(c.value)),
            None => (String::new(), String::new()),
        };
        t.row([
            r.anchor.clone(),
            tag(&r.side),
            tag(&r.quantity),
            num(r.value),
            num(r.coefficient),
            name,
            value,
            flag(r.applicable).into(),
            flag(r.explicit).into(),
            flag(r.certified).into(),
            flag(r.in_envelope()).into(),
            r.condition.clone(),
        ]);
    }
    t
}

fn base_report(spec: &DomainSpec, options: &AggregateOptions) -> Result<CrossCheckReport, CliError> {
    let mut report = CrossCheckReport::new(Some(spec.clone()));
    report.with_catalogue(aggregate(spec, options)?, options)?;
    Ok(report)
}

fn bounds(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let spec = spec_of(cfg)?;
    let report = base_report(spec, &cfg.bounds)?;
    let cat = report.catalogue.as_ref().expect("catalogue just added");
    let mut art = Artifacts::default();
    art.table("catalogue.csv", catalogue_table(cat));
    art.json("catalogue.json", cat);
    art.json("crosscheck.json", &report);
    Ok(art)
}

fn centered_radius(spec: &DomainSpec) -> Option<f64> {
    match &spec.obstacle {
        Obstacle::Ball { center, radius } if center.iter().all(|&c| c == 0.0) => Some(*radius),
        _ => None,
    }
}

struct Spectral {
    grid: Option<SpectralEstimate>,
    radial: Option<RadialGap>,
}

impl Spectral {
    fn summary(&self) -> SpectralSummary {
        match (&self.grid, &self.radial) {
            (Some(g), _) => SpectralSummary::grid(g),
            (None, Some(r)) => SpectralSummary::radial(r),
            (None, None) => unreachable!("constructed with at least one estimate"),
        }
    }

    fn verdicts(&self) -> Vec<Verdict> {
        let (Some(g), Some(r)) = (&self.grid, &self.radial) else {
            return Vec::new();
        };
        let (re, ge) = (r.error * r.value, g.error_bar);
        vec![Verdict::pass_if(
            "radial-oracle",
            (g.value - r.value).abs() <= ge + re,
            vec!["grid".into(), "radial".into()],
            format!("grid {} +- {ge} vs radial {} +- {re}", g.value, r.value),
        )]
    }
}

/// Grid estimate for `d` in {2, 3}, radial oracle for centred balls, both when both apply.
fn estimate(spec: &DomainSpec, cfg: &ExperimentConfig) -> Result<Spectral, CliError> {
    let radial = centered_radius(spec).map(|r| radial_gap_oracle(spec.dim, spec.lambda, r));
    let grid = if (2..=3).contains(&spec.dim) {
        Some(poincare_estimate(spec, &cfg.spectral.h, &cfg.spectral.options)?)
    } else if radial.is_none() {
        return Err(CliError::Config(
            "spectral estimates need dimension 2 or 3, or a ball centred at the origin".into(),
        ));
    } else {
        None
    };
    Ok(Spectral { grid, radial })
}

fn spectral(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let spec = spec_of(cfg)?;
    let est = estimate(spec, cfg)?;
    let mut report = base_report(spec, &cfg.bounds)?;
    report.with_spectral(est.summary());
    report.verdicts.extend(est.verdicts());

    let mut t = Table::new(&[
        "h",
        "cells",
        "edges",
        "eigenvalue",
        "poincare",
        "residual",
        "truncation",
    ]);
    for l in est.grid.iter().flat_map(|g| &g.levels) {
        t.row([
            num(l.h),
            l.cells.to_string(),
            l.edges.to_string(),
            num(l.eigenvalue),
            num(l.poincare),
            num(l.residual),
            num(l.truncation),
        ]);
    }
    #[derive(Serialize)]
    struct Estimate<'a> {
        spec: &'a DomainSpec,
        estimate: Option<&'a SpectralEstimate>,
        radial: Option<&'a RadialGap>,
    }
    let mut art = Artifacts::default();
    art.json(
        "estimate.json",
        &Estimate {
            spec,
            estimate: est.grid.as_ref(),
            radial: est.radial.as_ref(),
        },
    );
    art.table("refinement.csv", t);
    art.json("crosscheck.json", &report);
    Ok(art)
}

/// Monte Carlo results for one domain.
struct Evidence {
    paths: Vec<PathStats>,
    moments: Table,
    occupation: Option<OccupationTest>,
    rows: Vec<McRow>,
    verdicts: Vec<Verdict>,
}

fn sim_config(spec: &DomainSpec, s: &SimulateSection, seed: u64) -> SimConfig {
    SimConfig {
        spec: spec.clone(),
        dt: s.dt,
        horizon: s.horizon,
        seed,
        n_paths: s.n_paths,
        start: s.start.clone(),
        tol: s.tol,
    }
}

fn evidence(spec: &DomainSpec, s: &SimulateSection, seed: u64) -> Result<Evidence, CliError> {
    let sim = sim_config(spec, s, seed);
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    let mut moments = Table::new(&[
        "theta",
        "estimate",
        "ln_estimate",
        "stderr",
        "divergence_flag",
        "censored_fraction",
        "samples",
    ]);
    let paths = match &s.target {
        Some(target) => {
            let hits = hit_time(&sim, target)?;
            if let Some(w) = &hits.warning {
                verdicts.push(Verdict::new(
                    "censoring",
                    Status::Finding,
                    vec!["mc:paths".into()],
                    w.clone(),
                ));
            }
            for &theta in &s.thetas {
                let m = hits.exp_moment(theta, true)?;
                moments.row([
                    num(theta),
                    num(m.estimate),
                    num(m.ln_estimate),
                    num(m.stderr),
                    flag(m.divergence_flag).into(),
                    num(m.censored_fraction),
                    m.samples.to_string(),
                ]);
                let label = format!("exp_moment theta={theta}");
                if m.divergence_flag {
                    verdicts.push(Verdict::new(
                        "exp-moment-divergence",
                        Status::Finding,
                        vec![format!("mc:{label}")],
                        "estimate keeps growing with the sample size",
                    ));
                }
                rows.push(McRow {
                    label,
                    estimate: m.estimate,
                    stderr: m.stderr,
                    reference: None,
                    samples: m.samples,
                    note: (m.censored_fraction > 0.0)
                        .then(|| format!("lower bound: {} of paths censored", m.censored_fraction)),
                });
            }
            if let Some(v) = hitting_ks(spec, s, target, &hits.paths)? {
                verdicts.push(v);
            }
            hits.paths
        }
        None => run_paths(&sim)?,
    };
    let steps: u64 = paths.iter().map(|p| p.steps).sum();
    let violations: u64 = paths.iter().map(|p| p.violations).sum();
    verdicts.push(Verdict::pass_if(
        "domain-invariant",
        violations == 0,
        vec!["mc:paths".into()],
        format!("{violations} of {steps} recorded states beyond tolerance"),
    ));
    let occupation = match &s.occupation {
        Some(bins) => {
            let occ = occupation_test(&sim, bins)?;
            verdicts.push(Verdict::pass_if(
                "occupation",
                occ.pass,
                vec!["mc:occupation".into()],
                format!("chi2 {} on {} effective dof, p = {}", occ.chi2, occ.dof, occ.p_value),
            ));
            Some(occ)
        }
        None => None,
    };
    Ok(Evidence {
        paths,
        moments,
        occupation,
        rows,
        verdicts,
    })
}

/// KS test of the hitting times against the closed form, available for the first visit of
/// `{x_k >= 0}` from `x_k < 0` without an obstacle.
fn hitting_ks(
    spec: &DomainSpec,
    s: &SimulateSection,
    target: &Target,
    paths: &[PathStats],
) -> Result<Option<Verdict>, CliError> {
    let Target::HalfSpace { axis, threshold } = *target else {
        return Ok(None);
    };
    if spec.obstacle != Obstacle::None || threshold != 0.0 || !(s.start[axis] < 0.0) {
        return Ok(None);
    }
    let lambda = spec.lambda;
    // unit-stiffness time change: tau_lambda(b) = tau_1(b sqrt(lambda)) / lambda
    let b = -s.start[axis] * lambda.sqrt();
    ou_hitting_cdf(1.0, b)?;
    let times: Vec<f64> = paths.iter().map(|p| p.hit_time.unwrap_or(f64::INFINITY)).collect();
    let d = ks_statistic(&times, |t| ou_hitting_cdf(lambda * t, b).unwrap_or(f64::NAN));
    let p = kolmogorov_sf(d, times.len());
    Ok(Some(Verdict::pass_if(
        "hitting-time-ks",
        p > KS_LEVEL,
        vec!["mc:paths".into()],
        format!("D = {d}, p = {p} against the closed-form distribution"),
    )))
}

/// Significance level of the hitting-time KS test.
const KS_LEVEL: f64 = 0.01;

fn paths_table(paths: &[PathStats], dim: usize) -> Table {
    let mut header: Vec<String> = [
        "path",
        "hit_time",
        "censored",
        "contacts",
        "displacement_sum",
        "steps",
        "retries",
        "violations",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=dim).map(|k| format!("final_x{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&header);
    for p in paths {
        let mut row = vec![
            p.path.to_string(),
            opt(p.hit_time),
            flag(p.censored).into(),
            p.contacts.to_string(),
            num(p.displacement_sum),
            p.steps.to_string(),
            p.retries.to_string(),
            p.violations.to_string(),
        ];
        row.extend(p.final_state.iter().map(|&x| num(x)));
        t.row(row);
    }
    t
}

fn occupation_table(occ: &OccupationTest) -> Table {
    let mut t = Table::new(&["cell", "observed", "expected"]);
    for (k, (o, e)) in occ.histogram.iter().zip(&occ.expected).enumerate() {
        let cell = if k + 1 == occ.histogram.len() {
            "outside".to_string()
        } else {
            k.to_string()
        };
        t.row([cell, num(*o), num(*e)]);
    }
    t
}

fn simulate(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let spec = spec_of(cfg)?;
    let section = require(&cfg.simulate, "simulate")?;
    let ev = evidence(spec, section, seed_of(cfg)?)?;
    let mut report = base_report(spec, &cfg.bounds)?;
    report.mc = ev.rows;
    report.verdicts.extend(ev.verdicts);

    let mut art = Artifacts::default();
    art.table("paths.csv", paths_table(&ev.paths, spec.dim));
    if section.target.is_some() {
        art.table("moments.csv", ev.moments);
    }
    if let Some(occ) = &ev.occupation {
        art.table("occupation.csv", occupation_table(occ));
        art.json("occupation.json", occ);
    }
    art.json("crosscheck.json", &report);
    Ok(art)
}

fn exit_time(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let ExitSection {
        lambda,
        r,
        dt,
        n_paths,
        thetas,
    } = require(&cfg.exit_time, "exit_time")?;
    let (lambda, r) = (*lambda, *r);
    let samples = oupinball_core::pinball::exit_interval_ou_1d(lambda, r, *dt, *n_paths, seed_of(cfg)?)?;
    let threshold = exit_moment_threshold(lambda, r)?;
    let mut report = CrossCheckReport::new(None);
    let mut t = Table::new(&[
        "theta",
        "mc_estimate",
        "stderr",
        "closed_form",
        "z_score",
        "censored_fraction",
    ]);
    for &theta in thetas {
        let m = samples.exp_moment(-theta)?;
        let closed = ou_exit_laplace(theta, lambda, r)?.finite();
        let z = closed.map(|c| (m.estimate - c) / m.stderr);
        t.row([
            num(theta),
            num(m.estimate),
            num(m.stderr),
            opt(closed),
            opt(z),
            num(m.censored_fraction),
        ]);
        let row = McRow {
            label: format!("laplace theta={theta}"),
            estimate: m.estimate,
            stderr: m.stderr,
            reference: closed,
            samples: m.samples,
            note: None,
        };
        report.verdicts.push(mc_verdict("laplace-transform", &row));
        report.push_mc(row);
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        lambda: f64,
        r: f64,
        dt: f64,
        n_paths: usize,
        beta_star: f64,
        beta_star_bracket: (f64, f64),
        report: &'a CrossCheckReport,
    }
    let mut art = Artifacts::default();
    art.table("exit_time.csv", t);
    art.json(
        "exit_time.json",
        &Summary {
            lambda,
            r,
            dt: *dt,
            n_paths: *n_paths,
            beta_star: threshold.beta_star,
            beta_star_bracket: threshold.bracket,
            report: &report,
        },
    );
    Ok(art)
}

/// Log growth rate of the trap bound below which the explosion check fails, per unit arm.
const TRAP_MIN_SLOPE: f64 = 0.8;
/// Trap positions from which the growth rate is checked.
const TRAP_GROWTH_FROM: f64 = 5.0;

fn cheeger(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let CheegerSection { sets, trap_y, trap_arm } = require(&cfg.cheeger, "cheeger")?;
    let mut art = Artifacts::default();
    let spec = if sets.is_empty() {
        cfg.spec.as_ref()
    } else {
        Some(spec_of(cfg)?)
    };
    let mut report = CrossCheckReport::new(spec.cloned());

    if let Some(spec) = spec.filter(|_| !sets.is_empty()) {
        let mut t = Table::new(&[
            "set",
            "kind",
            "mass",
            "surface",
            "ratio",
            "complement",
            "four_c_squared",
        ]);
        for (k, set) in sets.iter().enumerate() {
            let c = cheeger_ratio(spec, set)?;
            let conv = cheeger_to_poincare(CheegerEvidence::SingleSetRatio(c.ratio));
            let kind = serde_json::to_value(set)
                .ok()
                .and_then(|v| v["kind"].as_str().map(String::from));
            t.row([
                k.to_string(),
                kind.unwrap_or_default(),
                num(c.mass),
                num(c.surface),
                num(c.ratio),
                flag(c.complement).into(),
                num(conv.value),
            ]);
            if let CandidateSet::SquareShadow { r, .. } = set {
                let closed = shadow_cheeger_lower(spec.lambda, spec.dim, *r);
                report.verdicts.push(Verdict::pass_if(
                    "shadow-closed-form",
                    c.ratio >= closed * (1.0 - 1e-12),
                    vec![format!("set:{k}")],
                    format!("ratio {} vs closed-form floor {closed}", c.ratio),
                ));
            }
        }
        art.table("cheeger.csv", t);
    }

    if !trap_y.is_empty() {
        let mut ys = trap_y.clone();
        ys.sort_by(f64::total_cmp);
        let mut t = Table::new(&[
            "y",
            "arm",
            "value",
            "applicable",
            "mass_a",
            "mass_b",
            "ratio",
            "chain_bound",
            "chain_holds",
        ]);
        let mut values = Vec::new();
        for &y in &ys {
            let b = trap_lower_bound(y, *trap_arm)?;
            t.row([
                num(y),
                num(*trap_arm),
                num(b.report.value),
                flag(b.report.applicable).into(),
                num(b.mass_a),
                num(b.mass_b),
                num(b.ratio),
                num(b.chain_bound),
                flag(b.chain_holds).into(),
            ]);
            values.push((y, b.report.value, b.chain_holds));
        }
        let refs: Vec<String> = ys.iter().map(|y| format!("trap:y={y}")).collect();
        report.verdicts.push(Verdict::pass_if(
            "trap-monotone",
            values.windows(2).all(|w| w[1].1 >= w[0].1),
            refs.clone(),
            "trap lower bound against the trap position",
        ));
        report.verdicts.push(Verdict::pass_if(
            "trap-chain",
            values.iter().all(|v| v.2),
            refs.clone(),
            "mass ratio against its closed-form estimate",
        ));
        let far: Vec<&(f64, f64, bool)> = values.iter().filter(|v| v.0 >= TRAP_GROWTH_FROM).collect();
        if far.len() >= 2 {
            let slope = far
                .windows(2)
                .map(|w| (w[1].1.ln() - w[0].1.ln()) / (w[1].0 - w[0].0))
                .fold(f64::INFINITY, f64::min);
            report.verdicts.push(Verdict::pass_if(
                "trap-explosion",
                slope >= TRAP_MIN_SLOPE * trap_arm,
                refs,
                format!("smallest log slope {slope} for y >= {TRAP_GROWTH_FROM}"),
            ));
        }
        art.table("trap.csv", t);
    }
    art.json("crosscheck.json", &report);
    Ok(art)
}

fn point_spec(base: &DomainSpec, parameter: SweepParameter, v: f64) -> Result<DomainSpec, CliError> {
    let mut s = base.clone();
    match (parameter, &mut s.obstacle) {
        (SweepParameter::Lambda, _) => s.lambda = v,
        (SweepParameter::Radius, Obstacle::Ball { radius, .. }) => *radius = v,
        (SweepParameter::Radius, Obstacle::Hypercube { half_width, .. }) => *half_width = v,
        (SweepParameter::Radius, Obstacle::Shell { inner, .. }) => *inner = v,
        (SweepParameter::Radius, Obstacle::Trap { arm, .. }) => *arm = v,
        (SweepParameter::CenterX, Obstacle::Ball { center, .. })
        | (SweepParameter::CenterX, Obstacle::Hypercube { center, .. })
        | (SweepParameter::CenterX, Obstacle::Shell { center, .. }) => center[0] = v,
        (SweepParameter::CenterX, Obstacle::Trap { y, .. }) => *y = v,
        (p, o) => return Err(CliError::Config(format!("cannot sweep {p:?} for obstacle {o:?}"))),
    }
    s.validate()?;
    Ok(s)
}

/// Independent stream seed for sweep point `index` (SplitMix64 finalizer).
fn point_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Serialize)]
struct SweepPoint {
    index: usize,
    value: f64,
    seed: Option<u64>,
    report: CrossCheckReport,
}

fn sweep_point(
    cfg: &ExperimentConfig,
    s: &SweepSection,
    base: &DomainSpec,
    index: usize,
) -> Result<SweepPoint, CliError> {
    let value = s.values[index];
    let spec = point_spec(base, s.parameter, value)?;
    let mut report = base_report(&spec, &cfg.bounds)?;
    if s.spectral {
        let est = estimate(&spec, cfg)?;
        report.with_spectral(est.summary());
        report.verdicts.extend(est.verdicts());
    }
    let mut seed = None;
    if let Some(sim) = &s.simulate {
        let ps = point_seed(seed_of(cfg)?, index);
        let ev = evidence(&spec, sim, ps)?;
        report.mc = ev.rows;
        report.verdicts.extend(ev.verdicts);
        seed = Some(ps);
    }
    Ok(SweepPoint {
        index,
        value,
        seed,
        report,
    })
}

/// Aggregated per-point verdicts. A stiffness sweep keeps lengths fixed, so
/// `lambda C(lambda)` is only checked for constancy without an obstacle.
fn sweep_verdicts(s: &SweepSection, points: &[SweepPoint]) -> Vec<Verdict> {
    let mut out = Vec::new();
    let spectral: Vec<(usize, f64, f64, f64)> = points
        .iter()
        .filter_map(|p| {
            p.report
                .spectral
                .as_ref()
                .map(|e| (p.index, p.value, e.value, e.error_bar))
        })
        .collect();
    let free = points
        .first()
        .and_then(|p| p.report.spec.as_ref())
        .is_some_and(|sp| sp.obstacle == Obstacle::None);
    if s.parameter == SweepParameter::Lambda && free && spectral.len() >= 2 {
        let scaled: Vec<(f64, f64)> = spectral.iter().map(|&(_, l, v, e)| (l * v, l * e)).collect();
        let (v0, e0) = scaled[0];
        let ok = scaled.iter().all(|&(v, e)| (v - v0).abs() <= e + e0);
        out.push(Verdict::pass_if(
            "homogeneity-spectral",
            ok,
            spectral.iter().map(|p| format!("point:{}", p.0)).collect(),
            "lambda times the estimate is constant within error bars",
        ));
    }
    let cube = points
        .first()
        .and_then(|p| p.report.spec.as_ref())
        .is_some_and(|sp| matches!(sp.obstacle, Obstacle::Hypercube { .. }));
    if s.parameter == SweepParameter::Radius && cube && spectral.len() >= 2 {
        let mut by_r = spectral.clone();
        by_r.sort_by(|a, b| a.1.total_cmp(&b.1));
        let drops: Vec<usize> = by_r
            .windows(2)
            .filter(|w| w[1].2 + w[1].3 < w[0].2 - w[0].3)
            .map(|w| w[1].0)
            .collect();
        let (first, last) = (by_r[0], by_r[by_r.len() - 1]);
        out.push(Verdict::new(
            "phase-transition-picture",
            if drops.is_empty() {
                Status::Pass
            } else {
                Status::Finding
            },
            by_r.iter().map(|p| format!("point:{}", p.0)).collect(),
            format!(
                "estimate grows by a factor {} from r = {} to r = {}{}",
                last.2 / first.2,
                first.1,
                last.1,
                if drops.is_empty() {
                    String::new()
                } else {
                    format!("; decreases at points {drops:?}")
                }
            ),
        ));
    }
    for check in ["inside-envelope", "phase-transition", "sandwich"] {
        let hits: Vec<(usize, Status)> = points
            .iter()
            .flat_map(|p| {
                p.report
                    .verdicts
                    .iter()
                    .filter(|v| v.check == check)
                    .map(|v| (p.index, v.status))
            })
            .collect();
        if hits.is_empty() {
            continue;
        }
        let failed: Vec<usize> = hits.iter().filter(|h| h.1 == Status::Fail).map(|h| h.0).collect();
        out.push(Verdict::pass_if(
            check,
            failed.is_empty(),
            hits.iter().map(|h| format!("point:{}", h.0)).collect(),
            if failed.is_empty() {
                format!("holds at all {} points", hits.len())
            } else {
                format!("fails at points {failed:?}")
            },
        ));
    }
    out
}

fn sweep(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let base = spec_of(cfg)?;
    let s = require(&cfg.sweep, "sweep")?;
    if s.values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    if s.simulate.is_some() {
        seed_of(cfg)?;
    }
    let results: Vec<Result<SweepPoint, CliError>> = (0..s.values.len())
        .into_par_iter()
        .map(|i| sweep_point(cfg, s, base, i))
        .collect();
    let points = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut art = Artifacts::default();
    let mut t = Table::new(&[
        "index",
        "value",
        "best_lower",
        "lower_anchor",
        "best_upper",
        "upper_anchor",
        "spectral_value",
        "spectral_error",
        "pass",
        "fail",
        "finding",
    ]);
    for p in &points {
        let cat = p.report.catalogue.as_ref().expect("sweep points carry a catalogue");
        let anchor =
            |r: &Option<oupinball_core::bounds::BoundReport>| r.as_ref().map(|r| r.anchor.clone()).unwrap_or_default();
        t.row([
            p.index.to_string(),
            num(p.value),
            opt(cat.lower()),
            anchor(&cat.best_explicit_lower),
            opt(cat.upper()),
            anchor(&cat.best_explicit_upper),
            opt(p.report.spectral.as_ref().map(|e| e.value)),
            opt(p.report.spectral.as_ref().map(|e| e.error_bar)),
            p.report.count(Status::Pass).to_string(),
            p.report.count(Status::Fail).to_string(),
            p.report.count(Status::Finding).to_string(),
        ]);
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        parameter: SweepParameter,
        values: &'a [f64],
        verdicts: Vec<Verdict>,
    }
    art.table("summary.csv", t);
    art.json(
        "summary.json",
        &Summary {
            parameter: s.parameter,
            values: &s.values,
            verdicts: sweep_verdicts(s, &points),
        },
    );
    for p in &points {
        art.json(&format!("point_{:03}.json", p.index), p);
    }
    Ok(art)
}
