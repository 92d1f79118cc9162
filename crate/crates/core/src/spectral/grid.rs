use super::SpectralError;
use crate::geometry::{DomainSpec, Obstacle};
use crate::special::erfc;
use serde::{Deserialize, Serialize};

/// Largest admitted fraction of Gaussian mass outside the box.
pub const TRUNCATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOptions {
    /// Box half width in units of `1 / sqrt(lambda)`.
    pub box_factor: f64,
    /// Explicit box half width; disables the automatic enlargement.
    pub half_width: Option<f64>,
    /// Largest number of kept cells.
    pub max_cells: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            box_factor: 6.0,
            half_width: None,
            max_cells: 3_000_000,
        }
    }
}

/// Cell-centred grid on `[-L, L]^d`, keeping the cells whose centre lies in the domain.
#[derive(Debug, Clone)]
pub struct Grid {
    pub dim: usize,
    pub h: f64,
    pub half_width: f64,
    /// Cells per axis.
    pub per_axis: usize,
    /// Full-grid linear index to kept index (`u32::MAX` when dropped).
    pub index: Vec<u32>,
    /// Kept cell centres, `dim` coordinates each.
    pub centers: Vec<f64>,
    /// `-lambda |x|^2 + d ln h` per kept cell.
    pub ln_mass: Vec<f64>,
    /// Gaussian mass fraction outside the box.
    pub truncation: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.ln_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_mass.is_empty()
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }
}

fn obstacle_reach(obstacle: &Obstacle) -> f64 {
    let cmax = |c: &[f64]| c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match obstacle {
        Obstacle::None => 0.0,
        Obstacle::Ball { center, radius } => cmax(center) + radius,
        Obstacle::Hypercube { center, half_width } => cmax(center) + half_width,
        Obstacle::Shell { center, outer, .. } => cmax(center) + outer,
        Obstacle::Trap { y, arm } => y.abs() + arm,
    }
}

fn box_truncation(d: usize, lambda: f64, half_width: f64) -> f64 {
    let e = erfc(half_width * lambda.sqrt());
    -((d as f64) * (-e).ln_1p()).exp_m1()
}

/// Box half width: `box_factor / sqrt(lambda)`, widened to leave `2 / sqrt(lambda)` beyond
/// the obstacle and to keep the truncated mass below [`TRUNCATION_TOL`].
pub fn box_half_width(spec: &DomainSpec, opts: &GridOptions) -> f64 {
    if let Some(l) = opts.half_width {
        return l;
    }
    let unit = 1.0 / spec.lambda.sqrt();
    let mut l = (opts.box_factor * unit).max(obstacle_reach(&spec.obstacle) + 2.0 * unit);
    if let Obstacle::Shell { center, outer, .. } = &spec.obstacle {
        let c = center.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        l = c + outer;
    }
    while !matches!(spec.obstacle, Obstacle::Shell { .. }) && box_truncation(spec.dim, spec.lambda, l) > TRUNCATION_TOL
    {
        l += 0.25 * unit;
    }
    l
}

pub fn build_grid(spec: &DomainSpec, h: f64, opts: &GridOptions) -> Result<Grid, SpectralError> {
    spec.validate()?;
    let d = spec.dim;
    if !(2..=3).contains(&d) {
        return Err(SpectralError::Input(format!("grids support d = 2 or 3, got {d}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(SpectralError::Input(format!("grid step must be positive, got {h}")));
    }
    if opts.half_width.is_none() && opts.box_factor < 4.0 {
        return Err(SpectralError::Input("box_factor must be at least 4".into()));
    }
    let l0 = box_half_width(spec, opts);
    let per_axis = ((2.0 * l0 / h) - 1e-9).ceil().max(1.0) as usize;
    let half_width = 0.5 * per_axis as f64 * h;
    let total = per_axis.pow(d as u32);
    let suggest = |count: usize| h * (count as f64 / opts.max_cells as f64).powf(1.0 / d as f64) * 1.01;
    if total > 64 * opts.max_cells.max(1) || total > u32::MAX as usize {
        return Err(SpectralError::Capacity {
            cells: total,
            budget: opts.max_cells,
            suggested_h: suggest(total),
        });
    }

    let mut index = vec![u32::MAX; total];
    let mut centers = Vec::new();
    let mut ln_mass = Vec::new();
    let mut x = vec![0.0; d];
    let ln_vol = d as f64 * h.ln();
    for (lin, slot) in index.iter_mut().enumerate() {
        let mut rem = lin;
        for xk in x.iter_mut() {
            *xk = -half_width + (rem % per_axis) as f64 * h + 0.5 * h;
            rem /= per_axis;
        }
        if spec.obstacle.contains(&x) {
            *slot = ln_mass.len() as u32;
            centers.extend_from_slice(&x);
            ln_mass.push(-spec.lambda * x.iter().map(|v| v * v).sum::<f64>() + ln_vol);
            if ln_mass.len() > opts.max_cells {
                return Err(SpectralError::Capacity {
                    cells: ln_mass.len(),
                    budget: opts.max_cells,
                    suggested_h: suggest(total),
                });
            }
        }
    }
    if ln_mass.is_empty() {
        return Err(SpectralError::Input("no grid cell lies in the domain".into()));
    }
    Ok(Grid {
        dim: d,
        h,
        half_width,
        per_axis,
        index,
        centers,
        ln_mass,
        truncation: box_truncation(d, spec.lambda, half_width),
    })
}
