//! Numerical check of the local Lyapunov condition around a ball obstacle.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovCheck {
    /// `d - 1 >= 2 lambda (r + 2h + eps)^2`
    pub holds: bool,
    /// Smallest `-2 lambda W - L W` over the grid (nonnegative iff the drift condition holds).
    pub worst_margin: f64,
    /// Largest normal derivative of `W` on the sampled obstacle boundary.
    pub worst_boundary: f64,
    pub points: usize,
}

/// Checks `L W <= -2 lambda W` for `W(x) = (r + 2h + eps)^2 - |x_perp|^2`, where `x_perp` is
/// the part of `x` orthogonal to the ball centre `(y, 0, .., 0)` and
/// `L = Delta / 2 - lambda x . grad`, on grid points of `{r <= |x - y| <= r + 2h}`.
/// Each grid point lies in the plane of the first axis and one other axis, cycling over them.
pub fn verify_local_lyapunov(lambda: f64, d: usize, y: f64, r: f64, h: f64, eps: f64, step: f64) -> LyapunovCheck {
    let big_r = r + 2.0 * h + eps;
    let holds = (d as f64 - 1.0) >= 2.0 * lambda * big_r * big_r;
    let w = |x: &[f64]| big_r * big_r - x[1..].iter().map(|v| v * v).sum::<f64>();
    let outer = r + 2.0 * h;
    let fd = 1e-3 * outer.max(1.0);

    let n = ((2.0 * outer / step).ceil() as usize).clamp(2, 400);
    let mut worst_margin = f64::INFINITY;
    let mut worst_boundary = f64::NEG_INFINITY;
    let mut points = 0;
    let mut x = vec![0.0; d];
    for i in 0..=n {
        let t = -outer + 2.0 * outer * i as f64 / n as f64;
        for j in 0..=n {
            let rho = outer * j as f64 / n as f64;
            let dist = (t * t + rho * rho).sqrt();
            if dist < r || dist > outer {
                continue;
            }
            x.iter_mut().for_each(|v| *v = 0.0);
            x[0] = y + t;
            x[1 + (points % (d - 1))] = rho;
            let w0 = w(&x);
            let mut lap = 0.0;
            let mut drift = 0.0;
            for k in 0..d {
                let keep = x[k];
                x[k] = keep + fd;
                let wp = w(&x);
                x[k] = keep - fd;
                let wm = w(&x);
                x[k] = keep;
                lap += (wp - 2.0 * w0 + wm) / (fd * fd);
                drift += keep * (wp - wm) / (2.0 * fd);
            }
            let lw = 0.5 * lap - lambda * drift;
            worst_margin = worst_margin.min(-2.0 * lambda * w0 - lw);
            points += 1;
        }
    }

    // normal derivative along the domain's outer normal -(x - y) / r
    let samples = 64;
    for i in 0..samples {
        let phi = std::f64::consts::PI * i as f64 / (samples - 1) as f64;
        let k = 1 + i % (d - 1);
        x.iter_mut().for_each(|v| *v = 0.0);
        x[0] = y + r * phi.cos();
        x[k] = r * phi.sin();
        let normal_derivative = -2.0 * x[k] * x[k] / r.max(f64::MIN_POSITIVE);
        worst_boundary = worst_boundary.max(normal_derivative);
    }

    LyapunovCheck {
        holds,
        worst_margin,
        worst_boundary,
        points,
    }
}
