//! Finite-volume estimate of the Poincare constant: `1 / mu_1` for the smallest nonzero
//! eigenvalue of the weighted Neumann form on a grid of the punctured domain.

mod eigen;
mod grid;
mod operator;
mod radial;

pub use eigen::{dense_second_eigenvalue, dense_spectrum, second_eigenvalue, EigenOptions, EigenResult};
pub use grid::{box_half_width, build_grid, Grid, GridOptions, TRUNCATION_TOL};
pub use operator::{assemble, Csr, DiscreteOperator};
pub use radial::{radial_gap_oracle, RadialGap};

use crate::bounds::{BoundReport, Side};
use crate::geometry::{DomainSpec, GeometryError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{cells} cells exceed the budget of {budget}; try h >= {suggested_h:.4}")]
    Capacity {
        cells: usize,
        budget: usize,
        suggested_h: f64,
    },
    #[error("the grid splits into {components} components; no Poincare inequality holds")]
    Disconnected { components: usize },
    #[error("{stage} did not converge in {iterations} iterations")]
    IterationLimit { stage: &'static str, iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralOptions {
    pub grid: GridOptions,
    pub eigen: EigenOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub h: f64,
    pub cells: usize,
    pub edges: usize,
    pub eigenvalue: f64,
    pub poincare: f64,
    pub residual: f64,
    pub truncation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub value: f64,
    pub error_bar: f64,
    pub monotone: bool,
    pub warning: Option<String>,
    pub levels: Vec<Level>,
}

impl SpectralEstimate {
    pub fn interval(&self) -> (f64, f64) {
        (self.value - self.error_bar, self.value + self.error_bar)
    }
}

/// `1 / mu_1` on one grid.
pub fn solve_level(spec: &DomainSpec, h: f64, opts: &SpectralOptions) -> Result<Level, SpectralError> {
    let grid = build_grid(spec, h, &opts.grid)?;
    let op = assemble(&grid, spec);
    let eig = second_eigenvalue(&op, &opts.eigen)?;
    Ok(Level {
        h,
        cells: op.len(),
        edges: op.edges.len(),
        eigenvalue: eig.value,
        poincare: 1.0 / eig.value,
        residual: eig.residual,
        truncation: grid.truncation,
    })
}

/// Extrapolates `1 / mu_1(h)` to `h = 0` assuming an error linear in `h`, from the two
/// finest grids. The error bar is the distance between the finest value and the limit.
pub fn extrapolate(mut levels: Vec<Level>) -> Result<SpectralEstimate, SpectralError> {
    if levels.len() < 2 {
        return Err(SpectralError::Input(
            "extrapolation needs at least two grid steps".into(),
        ));
    }
    levels.sort_by(|a, b| b.h.total_cmp(&a.h));
    let c: Vec<f64> = levels.iter().map(|l| l.poincare).collect();
    let increasing = c.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = c.windows(2).all(|w| w[1] <= w[0]);
    let k = levels.len() - 1;
    let (h1, h2) = (levels[k - 1].h, levels[k].h);
    let limit = (h1 * c[k] - h2 * c[k - 1]) / (h1 - h2);
    if increasing || decreasing {
        Ok(SpectralEstimate {
            value: limit,
            error_bar: (c[k] - limit).abs(),
            monotone: true,
            warning: None,
            levels,
        })
    } else {
        let spread =
            c.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - c.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(SpectralEstimate {
            value: c[k],
            error_bar: 2.0 * spread.max((c[k] - limit).abs()),
            monotone: false,
            warning: Some("grid sequence is not monotone; returning the finest value".into()),
            levels,
        })
    }
}

pub fn poincare_estimate(
    spec: &DomainSpec,
    h_list: &[f64],
    opts: &SpectralOptions,
) -> Result<SpectralEstimate, SpectralError> {
    if h_list.len() < 2 {
        return Err(SpectralError::Input(
            "extrapolation needs at least two grid steps".into(),
        ));
    }
    let levels = h_list
        .iter()
        .map(|&h| solve_level(spec, h, opts))
        .collect::<Result<Vec<_>, _>>()?;
    extrapolate(levels)
}

/// `Var_m(f) / Q(f)`: a lower bound on the discrete Poincare constant for any test vector.
pub fn rayleigh_certificate(op: &DiscreteOperator, f: &[f64]) -> Result<BoundReport, SpectralError> {
    if f.len() != op.len() {
        return Err(SpectralError::Input(format!(
            "test vector has {} entries for {} cells",
            f.len(),
            op.len()
        )));
    }
    let (q, var) = op.form_and_variance(f);
    if !(var > 0.0) {
        return Err(SpectralError::Input("test vector is constant on the grid".into()));
    }
    if !(q > 0.0) {
        return Err(SpectralError::Disconnected {
            components: op.components(),
        });
    }
    // discrete quotient: a bound on the grid constant, kept out of the analytic envelope
    Ok(BoundReport::explicit(
        "spectral/rayleigh-lower",
        Side::Lower,
        var / q,
        true,
        "variance over energy of a grid test vector",
    )
    .uncertified())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Obstacle;

    #[test]
    fn ball_spanning_the_box_disconnects() {
        let spec = DomainSpec::new(
            2,
            1.0,
            Obstacle::Ball {
                center: vec![0.0, 0.0],
                radius: 6.5,
            },
        )
        .unwrap();
        let opts = SpectralOptions {
            grid: GridOptions {
                half_width: Some(6.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let got = solve_level(&spec, 0.1, &opts);
        assert!(
            matches!(got, Err(SpectralError::Disconnected { components: 4 })),
            "{got:?}"
        );
    }

    #[test]
    fn rayleigh_quotients() {
        let spec = DomainSpec::new(
            2,
            1.0,
            Obstacle::Ball {
                center: vec![0.0, 0.0],
                radius: 2.0,
            },
        )
        .unwrap();
        let g = build_grid(&spec, 0.05, &GridOptions::default()).unwrap();
        let op = assemble(&g, &spec);
        let f: Vec<f64> = (0..g.len()).map(|i| g.center(i).iter().sum()).collect();
        let rep = rayleigh_certificate(&op, &f).unwrap();
        assert!(rep.value >= 2.0 - 0.1, "{}", rep.value);
        let free = DomainSpec::new(2, 1.0, Obstacle::None).unwrap();
        let g = build_grid(&free, 0.05, &GridOptions::default()).unwrap();
        let op = assemble(&g, &free);
        let f: Vec<f64> = (0..g.len()).map(|i| g.center(i)[0]).collect();
        assert!((rayleigh_certificate(&op, &f).unwrap().value - 0.5).abs() < 0.01);
        assert!(rayleigh_certificate(&op, &vec![1.0; g.len()]).is_err());
    }

    #[test]
    fn extrapolation_rules() {
        let lv = |h: f64, c: f64| Level {
            h,
            cells: 1,
            edges: 1,
            eigenvalue: 1.0 / c,
            poincare: c,
            residual: 0.0,
            truncation: 0.0,
        };
        let e = extrapolate(vec![lv(0.2, 0.6), lv(0.1, 0.55), lv(0.05, 0.525)]).unwrap();
        assert!((e.value - 0.5).abs() < 1e-12 && (e.error_bar - 0.025).abs() < 1e-12 && e.monotone);
        let bumpy = extrapolate(vec![lv(0.2, 0.6), lv(0.1, 0.5), lv(0.05, 0.55)]).unwrap();
        assert!(!bumpy.monotone && bumpy.warning.is_some() && bumpy.value == 0.55 && bumpy.error_bar >= 0.2 - 1e-12);
        assert!(extrapolate(vec![lv(0.1, 0.5)]).is_err());
    }
}
