//! Randomized checks of the structural identities the numerics must satisfy.

use oupinball_core::bounds::{aggregate, centered_bounds, verify_local_lyapunov, AggregateOptions};
use oupinball_core::isoperimetry::{region_mass, set_mass, trap_lower_bound, CandidateSet};
use oupinball_core::special::{exit_moment_threshold, gaussian_tail, kummer_1f1, ou_exit_laplace};
use oupinball_core::{DomainSpec, Obstacle};
use proptest::prelude::*;
use std::f64::consts::PI;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn on_axis(d: usize, y: f64) -> Vec<f64> {
    let mut c = vec![0.0; d];
    c[0] = y;
    c
}

/// Free space, an off-centre ball or an off-centre cube, in d = 2..=4.
fn specs() -> impl Strategy<Value = DomainSpec> {
    (2usize..=4, 0.25f64..4.0, 0u8..3, 0.0f64..3.0, 0.05f64..2.0).prop_map(|(d, lambda, kind, y, r)| {
        let obstacle = match kind {
            0 => Obstacle::None,
            1 => Obstacle::Ball {
                center: on_axis(d, y),
                radius: r,
            },
            _ => Obstacle::Hypercube {
                center: on_axis(d, y),
                half_width: r,
            },
        };
        DomainSpec::new(d, lambda, obstacle).unwrap()
    })
}

fn points(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_lands_in_domain_and_is_idempotent(
        (spec, x) in specs().prop_flat_map(|s| { let d = s.dim; (Just(s), points(d)) })
    ) {
        let Ok(p) = spec.project(&x) else { return Ok(()) };
        prop_assert!(spec.contains(&p).unwrap());
        let q = spec.project(&p).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
        if !spec.contains(&x).unwrap() {
            prop_assert!(spec.signed_distance(&p).unwrap().abs() <= spec.tol_boundary());
            if let Ok(n) = spec.inward_normal(&p) {
                let len = n.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!((len - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rescaling_round_trips(spec in specs()) {
        let back = spec.rescale_to_unit_lambda().with_lambda(spec.lambda);
        prop_assert_eq!(back.dim, spec.dim);
        prop_assert_eq!(back.lambda, spec.lambda);
        let scale = |s: &DomainSpec| s.obstacle.length_scale();
        prop_assert!(rel(scale(&back), scale(&spec)) <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn catalogue_is_homogeneous_and_ordered(spec in specs()) {
        let opts = AggregateOptions::default();
        let cat = aggregate(&spec, &opts).unwrap();
        let unit = aggregate(&spec.rescale_to_unit_lambda(), &opts).unwrap();
        prop_assert_eq!(cat.reports.len(), unit.reports.len());
        for (a, b) in cat.reports.iter().zip(unit.reports) {
            prop_assert_eq!(&a.anchor, &b.anchor);
            if a.applicable && a.explicit {
                let b = b.rescaled_from_unit(spec.lambda);
                prop_assert!(rel(a.value, b.value) <= 1e-12, "{}: {} vs {}", a.anchor, a.value, b.value);
            }
        }
        if let (Some(lo), Some(hi)) = (cat.lower(), cat.upper()) {
            prop_assert!(cat.envelope_ok);
            prop_assert!(lo <= hi, "lower {lo} above upper {hi}");
        }
    }

    #[test]
    fn centred_bounds_are_ordered_and_grow(lambda in 0.05f64..20.0, d in 2usize..12, r in 0.0f64..5.0, dr in 0.0f64..1.0) {
        let (lo, up, safe) = centered_bounds(lambda, d, r);
        prop_assert!(lo.value <= up.value && up.value <= safe.value);
        let (lo2, up2, safe2) = centered_bounds(lambda, d, r + dr);
        prop_assert!(lo2.value >= lo.value && up2.value >= up.value && safe2.value >= safe.value);
        let (_, unit_up, _) = centered_bounds(1.0, d, r * lambda.sqrt());
        prop_assert!(rel(up.value, unit_up.value / lambda) <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn lyapunov_predicate_matches_numeric_margin(
        lambda in 0.1f64..3.0, d in 2usize..10, y in 0.0f64..4.0, r in 0.05f64..1.5, h in 0.01f64..0.5, eps in 0.0f64..0.2
    ) {
        let check = verify_local_lyapunov(lambda, d, y, r, h, eps, 0.1);
        let big_r = r + 2.0 * h + eps;
        let exact = (d as f64 - 1.0) - 2.0 * lambda * big_r * big_r;
        prop_assume!(exact.abs() > 1e-6);
        prop_assert_eq!(check.holds, check.worst_margin >= 0.0);
        prop_assert!(check.worst_boundary <= 0.0);
    }

    #[test]
    fn tail_sandwich_and_additivity(b in 1e-3f64..20.0, w1 in 0.0f64..5.0, w2 in 0.0f64..5.0) {
        let (m, c) = (b + w1, b + w1 + w2);
        let v = gaussian_tail(b, c).unwrap();
        let ec = (-c * c).exp();
        let lo = b * b / (1.0 + 2.0 * b * b) * ((-b * b).exp() / b - ec / c);
        let hi = ((-b * b).exp() - ec) / (2.0 * b);
        prop_assert!(lo <= v * (1.0 + 1e-12) && v <= hi * (1.0 + 1e-12));
        let split = gaussian_tail(b, m).unwrap() + gaussian_tail(m, c).unwrap();
        prop_assert!((split - v).abs() <= 1e-13 * (-b * b).exp().max(f64::MIN_POSITIVE) + 1e-300);
    }

    #[test]
    fn kummer_at_equal_parameters_is_exponential(z in 0.0f64..30.0) {
        prop_assert!(rel(kummer_1f1(0.5, z).unwrap(), z.exp()) <= 1e-10);
    }

    #[test]
    fn exit_threshold_respects_caps(lambda in 0.1f64..4.0, r in 0.1f64..3.0) {
        let t = exit_moment_threshold(lambda, r).unwrap();
        let slack = 1.0 + 1e-9;
        // the exponential cap for large lambda r^2 does not hold; the acceptance runner reports it
        prop_assert!(t.beta_star <= PI * PI / (8.0 * r * r) * slack);
        prop_assert!(t.bracket.0 <= t.beta_star && t.beta_star <= t.bracket.1);
    }

    #[test]
    fn laplace_transform_decreases(lambda in 0.2f64..3.0, r in 0.2f64..2.0, theta in 0.0f64..3.0, dt in 0.01f64..1.0) {
        let a = ou_exit_laplace(theta, lambda, r).unwrap().finite().unwrap();
        let b = ou_exit_laplace(theta + dt, lambda, r).unwrap().finite().unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn half_space_and_complement_sum_to_one(spec in specs(), t in -3.0f64..3.0) {
        let d = spec.dim;
        let m = set_mass(&spec, &CandidateSet::HalfSpace { threshold: t }).unwrap();
        let lo = vec![f64::NEG_INFINITY; d];
        let mut hi = vec![f64::INFINITY; d];
        hi[0] = t;
        let rest = region_mass(&spec, &lo, &hi).unwrap();
        prop_assert!((m + rest - 1.0).abs() <= 1e-8, "{m} + {rest}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trap_bound_grows_with_depth(y in 3.0f64..9.5, dy in 0.05f64..0.5) {
        let a = trap_lower_bound(y, 1.0).unwrap();
        let b = trap_lower_bound(y + dy, 1.0).unwrap();
        prop_assert!(b.report.value > a.report.value);
    }
}
