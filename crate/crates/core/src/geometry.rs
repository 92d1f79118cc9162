//! Punctured domains `D = R^d \ obstacle` carrying the Gaussian weight `exp(-lambda |x|^2)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("point has no unique nearest boundary point")]
    AmbiguousProjection,
    #[error("point is not on the obstacle boundary (signed distance {0:e})")]
    NotOnBoundary(f64),
}

/// Excluded region. `Shell` is the exception: there the domain *is* the annulus
/// `inner <= |x - center| <= outer`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Obstacle {
    None,
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Open axis-aligned cube `|x_i - c_i| < half_width` for every i.
    Hypercube {
        center: Vec<f64>,
        half_width: f64,
    },
    Shell {
        center: Vec<f64>,
        inner: f64,
        outer: f64,
    },
    /// Planar U-shaped trap opening towards +x1: a block `y - arm <= x1 <= y, |x2| <= arm`
    /// with two arms `y <= x1 <= y + arm, arm/2 <= |x2| <= arm`.
    Trap {
        y: f64,
        arm: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub dim: usize,
    pub lambda: f64,
    pub obstacle: Obstacle,
}

const REL_TOL: f64 = 1e-9;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

fn check_dim(expected: usize, x: &[f64]) -> Result<(), GeometryError> {
    if x.len() != expected {
        return Err(GeometryError::DimensionMismatch { expected, got: x.len() });
    }
    Ok(())
}

/// Boundary of the trap obstacle as a closed counter-clockwise polygon.
fn trap_polygon(y: f64, a: f64) -> [[f64; 2]; 8] {
    [
        [y - a, -a],
        [y + a, -a],
        [y + a, -a / 2.0],
        [y, -a / 2.0],
        [y, a / 2.0],
        [y + a, a / 2.0],
        [y + a, a],
        [y - a, a],
    ]
}

fn closest_on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let t = ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1]);
    let t = t.clamp(0.0, 1.0);
    [a[0] + t * ab[0], a[1] + t * ab[1]]
}

fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let xc = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < xc {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Nearest boundary point and its distance.
fn polygon_nearest(p: [f64; 2], poly: &[[f64; 2]]) -> ([f64; 2], f64) {
    let mut best = (poly[0], f64::INFINITY);
    for i in 0..poly.len() {
        let q = closest_on_segment(p, poly[i], poly[(i + 1) % poly.len()]);
        let dist = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        if dist < best.1 {
            best = (q, dist);
        }
    }
    best
}

impl Obstacle {
    pub fn validate(&self, dim: usize) -> Result<(), GeometryError> {
        let bad = |m: &str| Err(GeometryError::Invalid(m.to_string()));
        let finite_center = |c: &Vec<f64>| -> Result<(), GeometryError> {
            check_dim(dim, c)?;
            if c.iter().any(|v| !v.is_finite()) {
                return bad("center must be finite");
            }
            Ok(())
        };
        match self {
            Obstacle::None => Ok(()),
            Obstacle::Ball { center, radius } => {
                finite_center(center)?;
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad("ball radius must be positive");
                }
                Ok(())
            }
            Obstacle::Hypercube { center, half_width } => {
                finite_center(center)?;
                if !(half_width.is_finite() && *half_width > 0.0) {
                    return bad("hypercube half-width must be positive");
                }
                Ok(())
            }
            Obstacle::Shell { center, inner, outer } => {
                finite_center(center)?;
                if !(inner.is_finite() && *inner > 0.0 && outer.is_finite() && outer > inner) {
                    return bad("shell needs 0 < inner < outer");
                }
                Ok(())
            }
            Obstacle::Trap { y, arm } => {
                if dim != 2 {
                    return bad("trap obstacle requires d = 2");
                }
                if !(y.is_finite() && arm.is_finite() && *arm > 0.0) {
                    return bad("trap needs finite y and arm > 0");
                }
                Ok(())
            }
        }
    }

    /// Characteristic length used to scale round-off tolerances.
    pub fn length_scale(&self) -> f64 {
        let cmax = |c: &[f64]| c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        match self {
            Obstacle::None => 1.0,
            Obstacle::Ball { center, radius } => radius.max(cmax(center)),
            Obstacle::Hypercube { center, half_width } => half_width.max(cmax(center)),
            Obstacle::Shell { center, outer, .. } => outer.max(cmax(center)),
            Obstacle::Trap { y, arm } => (y.abs() + arm).max(*arm),
        }
    }

    pub fn tol_boundary(&self) -> f64 {
        REL_TOL * self.length_scale().max(1.0)
    }

    /// Positive in D, zero on the boundary, negative inside the excluded region.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            Obstacle::None => f64::INFINITY,
            Obstacle::Ball { center, radius } => norm(&sub(x, center)) - radius,
            Obstacle::Hypercube { center, half_width } => {
                // exact box SDF, sign flipped so the cube interior is negative
                let q: Vec<f64> = x.iter().zip(center).map(|(a, c)| (a - c).abs() - half_width).collect();
                let outside = q.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt();
                let inside = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max).min(0.0);
                outside + inside
            }
            Obstacle::Shell { center, inner, outer } => {
                let rho = norm(&sub(x, center));
                (rho - inner).min(outer - rho)
            }
            Obstacle::Trap { y, arm } => {
                let poly = trap_polygon(*y, *arm);
                let p = [x[0], x[1]];
                let (_, dist) = polygon_nearest(p, &poly);
                if point_in_polygon(p, &poly) {
                    -dist
                } else {
                    dist
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Obstacle::None => true,
            _ => self.signed_distance(x) >= -self.tol_boundary(),
        }
    }

    /// Nearest point of the closed domain; identity on the domain.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        if self.contains(x) {
            return Ok(x.to_vec());
        }
        match self {
            Obstacle::None => Ok(x.to_vec()),
            Obstacle::Ball { center, radius } => {
                let v = sub(x, center);
                let rho = norm(&v);
                if rho == 0.0 {
                    return Err(GeometryError::AmbiguousProjection);
                }
                Ok(center.iter().zip(&v).map(|(c, vi)| c + radius * vi / rho).collect())
            }
            Obstacle::Hypercube { center, half_width } => {
                // inside the open cube: push the coordinate closest to a face
                let mut axis = 0;
                let mut gap = f64::INFINITY;
                for (i, (a, c)) in x.iter().zip(center).enumerate() {
                    let g = half_width - (a - c).abs();
                    if g <= gap {
                        gap = g;
                        axis = i;
                    }
                }
                let mut out = x.to_vec();
                let side = if x[axis] >= center[axis] { 1.0 } else { -1.0 };
                out[axis] = center[axis] + side * half_width;
                Ok(out)
            }
            Obstacle::Shell { center, inner, outer } => {
                let v = sub(x, center);
                let rho = norm(&v);
                if rho == 0.0 {
                    return Err(GeometryError::AmbiguousProjection);
                }
                let target = if rho < *inner { *inner } else { *outer };
                Ok(center.iter().zip(&v).map(|(c, vi)| c + target * vi / rho).collect())
            }
            Obstacle::Trap { y, arm } => {
                let (q, _) = polygon_nearest([x[0], x[1]], &trap_polygon(*y, *arm));
                Ok(q.to_vec())
            }
        }
    }

    /// Unit normal at a boundary point, pointing into the domain. Corners get the
    /// normalized sum of the adjacent face normals.
    pub fn inward_normal(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let tol = self.tol_boundary();
        let sd = self.signed_distance(x);
        if !(sd.abs() <= tol) {
            return Err(GeometryError::NotOnBoundary(sd));
        }
        let normalize = |v: Vec<f64>| {
            let n = norm(&v);
            v.into_iter().map(|a| a / n).collect::<Vec<f64>>()
        };
        match self {
            Obstacle::None => Err(GeometryError::NotOnBoundary(sd)),
            Obstacle::Ball { center, .. } => Ok(normalize(sub(x, center))),
            Obstacle::Shell { center, inner, outer } => {
                let v = sub(x, center);
                let rho = norm(&v);
                if (rho - inner).abs() <= (outer - rho).abs() {
                    Ok(normalize(v))
                } else {
                    Ok(normalize(v.into_iter().map(|a| -a).collect()))
                }
            }
            Obstacle::Hypercube { center, half_width } => {
                let mut n = vec![0.0; x.len()];
                for (i, (a, c)) in x.iter().zip(center).enumerate() {
                    let off = a - c;
                    if (off.abs() - half_width).abs() <= tol {
                        n[i] = off.signum();
                    }
                }
                Ok(normalize(n))
            }
            Obstacle::Trap { y, arm } => {
                let poly = trap_polygon(*y, *arm);
                let p = [x[0], x[1]];
                let mut n = [0.0, 0.0];
                for i in 0..poly.len() {
                    let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
                    let q = closest_on_segment(p, a, b);
                    if ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() <= tol {
                        // counter-clockwise polygon: outward normal is (dy, -dx)
                        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                        let len = (dx * dx + dy * dy).sqrt();
                        n[0] += dy / len;
                        n[1] -= dx / len;
                    }
                }
                Ok(normalize(n.to_vec()))
            }
        }
    }

    /// All lengths multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Obstacle {
        let sc = |c: &Vec<f64>| c.iter().map(|v| v * factor).collect::<Vec<f64>>();
        match self {
            Obstacle::None => Obstacle::None,
            Obstacle::Ball { center, radius } => Obstacle::Ball {
                center: sc(center),
                radius: radius * factor,
            },
            Obstacle::Hypercube { center, half_width } => Obstacle::Hypercube {
                center: sc(center),
                half_width: half_width * factor,
            },
            Obstacle::Shell { center, inner, outer } => Obstacle::Shell {
                center: sc(center),
                inner: inner * factor,
                outer: outer * factor,
            },
            Obstacle::Trap { y, arm } => Obstacle::Trap {
                y: y * factor,
                arm: arm * factor,
            },
        }
    }

    /// Euclidean norm of the center (the displacement `|y|`); 0 for the trap's
    /// transverse offset is not meaningful, so the trap reports `|y|` on the x1 axis.
    pub fn center_norm(&self) -> f64 {
        match self {
            Obstacle::None => 0.0,
            Obstacle::Ball { center, .. } | Obstacle::Hypercube { center, .. } | Obstacle::Shell { center, .. } => {
                norm(center)
            }
            Obstacle::Trap { y, .. } => y.abs(),
        }
    }
}

impl DomainSpec {
    pub fn new(dim: usize, lambda: f64, obstacle: Obstacle) -> Result<Self, GeometryError> {
        let spec = DomainSpec { dim, lambda, obstacle };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.dim < 2 {
            return Err(GeometryError::Invalid("dimension must be at least 2".into()));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(GeometryError::Invalid("lambda must be positive".into()));
        }
        self.obstacle.validate(self.dim)
    }

    /// Length scale combining the Gaussian width and the obstacle size.
    pub fn length_scale(&self) -> f64 {
        (1.0 / self.lambda.sqrt()).max(self.obstacle.length_scale())
    }

    pub fn tol_boundary(&self) -> f64 {
        REL_TOL * self.length_scale()
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool, GeometryError> {
        check_dim(self.dim, x)?;
        Ok(self.obstacle.contains(x))
    }

    pub fn signed_distance(&self, x: &[f64]) -> Result<f64, GeometryError> {
        check_dim(self.dim, x)?;
        Ok(self.obstacle.signed_distance(x))
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        check_dim(self.dim, x)?;
        self.obstacle.project(x)
    }

    pub fn inward_normal(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        check_dim(self.dim, x)?;
        self.obstacle.inward_normal(x)
    }

    /// Same problem at `lambda = 1`: lengths multiplied by `sqrt(lambda)`.
    /// Poincare constants relate by `C(spec) = C(rescaled) / lambda`.
    pub fn rescale_to_unit_lambda(&self) -> DomainSpec {
        self.with_lambda(1.0)
    }

    /// Equivalent problem at stiffness `target`; lengths scale by `sqrt(lambda / target)`.
    pub fn with_lambda(&self, target: f64) -> DomainSpec {
        if target == self.lambda {
            return self.clone();
        }
        let factor = (self.lambda / target).sqrt();
        DomainSpec {
            dim: self.dim,
            lambda: target,
            obstacle: self.obstacle.scaled(factor),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(c: &[f64], r: f64) -> Obstacle {
        Obstacle::Ball {
            center: c.to_vec(),
            radius: r,
        }
    }

    #[test]
    fn membership_examples() {
        let spec = DomainSpec::new(2, 1.0, ball(&[3.0, 0.0], 1.0)).unwrap();
        assert!(!spec.contains(&[3.0, 0.0]).unwrap());
        assert!(spec.contains(&[4.0, 0.0]).unwrap());
        let trap = DomainSpec::new(2, 1.0, Obstacle::Trap { y: 5.0, arm: 1.0 }).unwrap();
        assert!(trap.contains(&[5.5, 0.0]).unwrap());
        assert!(!trap.contains(&[4.5, 0.0]).unwrap());
        assert!(!trap.contains(&[5.5, 0.75]).unwrap());
        assert!(trap.contains(&[6.5, 0.0]).unwrap());
        assert!(matches!(
            spec.contains(&[1.0, 2.0, 3.0]),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distances() {
        assert_eq!(ball(&[0.0, 0.0], 1.0).signed_distance(&[2.0, 0.0]), 1.0);
        let cube = Obstacle::Hypercube {
            center: vec![2.5, 0.0],
            half_width: 1.0,
        };
        assert_eq!(cube.signed_distance(&[2.5, 0.0]), -1.0);
        assert!((cube.signed_distance(&[4.5, 1.0 + 1.0]) - 2f64.sqrt()).abs() < 1e-15);
        let shell = Obstacle::Shell {
            center: vec![1.0, 1.0],
            inner: 1.0,
            outer: 2.0,
        };
        assert!((shell.signed_distance(&[2.5, 1.0]) - 0.5).abs() < 1e-15);
        assert!((shell.signed_distance(&[1.0, 1.2]) + 0.8).abs() < 1e-15);
    }

    #[test]
    fn trap_junction_is_open() {
        // the segment x1 = y, arm/2 < |x2| < arm separates block and arm: interior of the obstacle
        let trap = Obstacle::Trap { y: 5.0, arm: 1.0 };
        assert!((trap.signed_distance(&[5.0, 0.75]) + 0.25).abs() < 1e-15);
        assert_eq!(trap.signed_distance(&[5.0, 0.25]), 0.0);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(ball(&[0.0, 0.0], 2.0).project(&[1.0, 0.0]).unwrap(), vec![2.0, 0.0]);
        let cube = Obstacle::Hypercube {
            center: vec![5.0, 0.0],
            half_width: 1.0,
        };
        assert_eq!(cube.project(&[5.5, 0.5]).unwrap(), vec![5.5, 1.0]);
        assert_eq!(cube.project(&[9.0, 0.5]).unwrap(), vec![9.0, 0.5]);
        assert_eq!(
            ball(&[1.0, 1.0], 1.0).project(&[1.0, 1.0]),
            Err(GeometryError::AmbiguousProjection)
        );
        let trap = Obstacle::Trap { y: 5.0, arm: 1.0 };
        let p = trap.project(&[4.9, 0.1]).unwrap();
        assert!(p[0] == 5.0 && (p[1] - 0.1).abs() < 1e-15);
        assert_eq!(trap.project(&[5.5, 0.55]).unwrap(), vec![5.5, 0.5]);
    }

    #[test]
    fn cube_projection_matches_brute_force() {
        let cube = Obstacle::Hypercube {
            center: vec![5.0, 0.0],
            half_width: 1.0,
        };
        let x = [5.5, 0.5];
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        let n = 4000;
        for k in 0..=n {
            let t = -1.0 + 2.0 * k as f64 / n as f64;
            for p in [[4.0, t], [6.0, t], [5.0 + t, -1.0], [5.0 + t, 1.0]] {
                let dist = ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)).sqrt();
                if dist < best.0 - 1e-12 {
                    best = (dist, p);
                }
            }
        }
        let proj = cube.project(&x).unwrap();
        let pd = ((proj[0] - x[0]).powi(2) + (proj[1] - x[1]).powi(2)).sqrt();
        assert!((pd - best.0).abs() < 1e-12);
    }

    #[test]
    fn normals() {
        assert_eq!(
            ball(&[0.0, 0.0], 1.0).inward_normal(&[1.0, 0.0]).unwrap(),
            vec![1.0, 0.0]
        );
        let cube = Obstacle::Hypercube {
            center: vec![0.0, 0.0],
            half_width: 1.0,
        };
        assert_eq!(cube.inward_normal(&[1.0, 0.5]).unwrap(), vec![1.0, 0.0]);
        let c = cube.inward_normal(&[1.0, 1.0]).unwrap();
        let h = 2f64.sqrt() / 2.0;
        assert!((c[0] - h).abs() < 1e-15 && (c[1] - h).abs() < 1e-15);
        assert!(matches!(
            cube.inward_normal(&[3.0, 0.0]),
            Err(GeometryError::NotOnBoundary(_))
        ));
        let trap = Obstacle::Trap { y: 5.0, arm: 1.0 };
        assert_eq!(trap.inward_normal(&[5.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        let corner = trap.inward_normal(&[5.0, 0.5]).unwrap();
        assert!((corner[0] - h).abs() < 1e-15 && (corner[1] + h).abs() < 1e-15);
        let shell = Obstacle::Shell {
            center: vec![0.0, 0.0],
            inner: 1.0,
            outer: 2.0,
        };
        assert_eq!(shell.inward_normal(&[0.0, 2.0]).unwrap(), vec![0.0, -1.0]);
    }

    #[test]
    fn rescaling_examples() {
        let s = DomainSpec::new(2, 4.0, ball(&[1.0, 0.0], 0.5)).unwrap();
        let u = s.rescale_to_unit_lambda();
        assert_eq!(u.lambda, 1.0);
        assert_eq!(u.obstacle, ball(&[2.0, 0.0], 1.0));
        let c = DomainSpec::new(
            2,
            0.25,
            Obstacle::Hypercube {
                center: vec![4.0, 0.0],
                half_width: 2.0,
            },
        )
        .unwrap();
        assert_eq!(
            c.rescale_to_unit_lambda().obstacle,
            Obstacle::Hypercube {
                center: vec![2.0, 0.0],
                half_width: 1.0
            }
        );
        let one = DomainSpec::new(3, 1.0, ball(&[0.3, 0.1, 0.2], 0.7)).unwrap();
        assert_eq!(one.rescale_to_unit_lambda(), one);
    }

    #[test]
    fn invalid_specs() {
        assert!(DomainSpec::new(1, 1.0, Obstacle::None).is_err());
        assert!(DomainSpec::new(2, 0.0, Obstacle::None).is_err());
        assert!(DomainSpec::new(3, 1.0, Obstacle::Trap { y: 1.0, arm: 1.0 }).is_err());
        assert!(DomainSpec::new(
            2,
            1.0,
            Obstacle::Shell {
                center: vec![0.0, 0.0],
                inner: 2.0,
                outer: 1.0
            }
        )
        .is_err());
        assert!(DomainSpec::new(2, 1.0, ball(&[0.0], 1.0)).is_err());
    }

    #[test]
    fn json_round_trip_rejects_unknown_keys() {
        let s = DomainSpec::new(2, 1.0, ball(&[1.0, 0.0], 0.5)).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<DomainSpec>(&text).unwrap(), s);
        let bad = r#"{"dim":2,"lambda":1.0,"obstacle":{"kind":"ball","center":[0,0],"radius":1,"colour":3}}"#;
        assert!(serde_json::from_str::<DomainSpec>(bad).is_err());
    }
}
