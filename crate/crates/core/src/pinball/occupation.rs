use super::{mean_stderr, par_paths, SimConfig, SimError, Target, Walker};
use crate::isoperimetry::region_mass;
use crate::special::chi_square_sf;
use serde::{Deserialize, Serialize};

/// Fraction of each path discarded before averaging.
const BURN_IN: f64 = 0.2;
const MIN_EXPECTED: f64 = 5.0;

/// Cubic cells of `[-half_width, half_width]^d`, `per_axis` per side, plus one cell for
/// everything outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bins {
    pub half_width: f64,
    pub per_axis: usize,
}

impl Bins {
    pub fn len(&self, dim: usize) -> usize {
        self.per_axis.pow(dim as u32) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn index(&self, x: &[f64]) -> usize {
        let w = 2.0 * self.half_width / self.per_axis as f64;
        let mut idx = 0;
        for &v in x.iter().rev() {
            let k = ((v + self.half_width) / w).floor();
            if !(k >= 0.0 && k < self.per_axis as f64) {
                return self.len(x.len()) - 1;
            }
            idx = idx * self.per_axis + k as usize;
        }
        idx
    }

    fn cell(&self, dim: usize, mut idx: usize) -> (Vec<f64>, Vec<f64>) {
        let w = 2.0 * self.half_width / self.per_axis as f64;
        let mut lo = vec![0.0; dim];
        let mut hi = vec![0.0; dim];
        for k in 0..dim {
            let j = idx % self.per_axis;
            idx /= self.per_axis;
            lo[k] = -self.half_width + j as f64 * w;
            hi[k] = lo[k] + w;
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationTest {
    /// Pooled time fractions per cell, the last entry being the outside cell.
    pub histogram: Vec<f64>,
    pub expected: Vec<f64>,
    /// Sum of squared per-cell z-scores.
    pub chi2: f64,
    /// Degrees of freedom of the scaled chi-square matched to the cell correlations.
    pub dof: f64,
    pub p_value: f64,
    /// Independent-sample equivalent of the pooled time average.
    pub n_eff: f64,
    pub pass: bool,
}

fn check_horizon(cfg: &SimConfig) -> Result<(), SimError> {
    cfg.validate()?;
    if cfg.horizon < 50.0 / cfg.spec.lambda {
        return Err(SimError::Input(
            "occupation averages need horizon >= 50 / lambda".into(),
        ));
    }
    if cfg.n_paths < 2 {
        return Err(SimError::Input("occupation averages need at least two paths".into()));
    }
    Ok(())
}

/// Per-path time fractions after burn-in, `cells` counters per path.
fn fractions(
    cfg: &SimConfig,
    cells: usize,
    classify: impl Fn(&[f64]) -> usize + Sync,
) -> Result<Vec<Vec<f64>>, SimError> {
    let n = cfg.n_steps();
    let burn = (BURN_IN * n as f64).round() as u64;
    par_paths(cfg.n_paths, |p| {
        let mut w = Walker::new(cfg, p);
        let mut counts = vec![0u64; cells];
        while w.steps < n {
            w.advance()?;
            if w.steps > burn {
                counts[classify(&w.x)] += 1;
            }
        }
        let total = (n - burn).max(1) as f64;
        Ok(counts.into_iter().map(|c| c as f64 / total).collect())
    })
}

/// Chi-square comparison of time-averaged occupation with the restricted Gaussian.
///
/// Paths are correlated in time, so every variance comes from the spread between
/// independent paths. Cells with fewer than five expected visits at the effective size
/// `n_eff = sum p(1-p) / sum Var(mean fraction)` are pooled. The statistic sums squared
/// per-cell z-scores and is referred to `c chi2(nu)` with `c` and `nu` matched to the
/// correlation between cells; the test passes when `p > 0.001`.
pub fn occupation_test(cfg: &SimConfig, bins: &Bins) -> Result<OccupationTest, SimError> {
    check_horizon(cfg)?;
    if !(bins.half_width > 0.0 && bins.per_axis > 0) {
        return Err(SimError::Input("bins need a positive width and count".into()));
    }
    let d = cfg.spec.dim;
    let k = bins.len(d);
    let mut expected = Vec::with_capacity(k);
    for idx in 0..k - 1 {
        let (lo, hi) = bins.cell(d, idx);
        expected.push(region_mass(&cfg.spec, &lo, &hi)?);
    }
    expected.push((1.0 - expected.iter().sum::<f64>()).max(0.0));

    let per_path = fractions(cfg, k, |x| bins.index(x))?;
    let m = per_path.len() as f64;
    let mut histogram = vec![0.0; k];
    let mut var_sum = 0.0;
    for c in 0..k {
        let col: Vec<f64> = per_path.iter().map(|f| f[c]).collect();
        let (mean, se) = mean_stderr(&col);
        histogram[c] = mean;
        var_sum += se * se;
    }
    let binom: f64 = histogram.iter().map(|p| p * (1.0 - p)).sum();
    let n_eff = if var_sum > 0.0 { binom / var_sum } else { m };

    // groups: well-populated cells on their own, the rest pooled
    let mut group = vec![usize::MAX; k];
    let mut n_groups = 0;
    for c in 0..k {
        if n_eff * expected[c] >= MIN_EXPECTED {
            group[c] = n_groups;
            n_groups += 1;
        }
    }
    let rest_exp: f64 = (0..k).filter(|&c| group[c] == usize::MAX).map(|c| expected[c]).sum();
    if rest_exp > 0.0 {
        for g in group.iter_mut().filter(|g| **g == usize::MAX) {
            *g = n_groups;
        }
        n_groups += 1;
    }
    let mut exp_g = vec![0.0; n_groups];
    let mut f_g = vec![vec![0.0; n_groups]; per_path.len()];
    let mut stray = false;
    for c in 0..k {
        if group[c] == usize::MAX {
            stray |= histogram[c] > 0.0;
            continue;
        }
        exp_g[group[c]] += expected[c];
        for (row, f) in f_g.iter_mut().zip(&per_path) {
            row[group[c]] += f[c];
        }
    }
    let mean_g: Vec<f64> = (0..n_groups)
        .map(|g| f_g.iter().map(|r| r[g]).sum::<f64>() / m)
        .collect();
    let mut cov = vec![vec![0.0; n_groups]; n_groups];
    for row in &f_g {
        for a in 0..n_groups {
            for b in 0..=a {
                cov[a][b] += (row[a] - mean_g[a]) * (row[b] - mean_g[b]) / (m - 1.0);
            }
        }
    }
    // sum of squared z-scores, matched in mean and variance to a scaled chi-square
    let mut chi2 = 0.0;
    let (mut tr, mut tr2) = (0.0, 0.0);
    for a in 0..n_groups {
        if cov[a][a] > 0.0 {
            chi2 += (mean_g[a] - exp_g[a]).powi(2) * m / cov[a][a];
            tr += 1.0;
        } else if mean_g[a] != exp_g[a] {
            chi2 = f64::INFINITY;
        }
        for b in 0..n_groups {
            let v = if b <= a { cov[a][b] } else { cov[b][a] };
            if cov[a][a] > 0.0 && cov[b][b] > 0.0 {
                tr2 += v * v / (cov[a][a] * cov[b][b]);
            }
        }
    }
    if stray {
        // time spent where the measure has no mass at all
        chi2 = f64::INFINITY;
    }
    let (scale, dof) = if tr2 > 0.0 {
        (tr2 / tr, tr * tr / tr2)
    } else {
        (1.0, 1.0)
    };
    let p_value = if chi2.is_finite() {
        chi_square_sf(chi2 / scale, dof)?
    } else {
        0.0
    };
    Ok(OccupationTest {
        histogram,
        expected,
        chi2,
        dof,
        p_value,
        n_eff,
        pass: p_value > 0.001,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupationFraction {
    pub estimate: f64,
    /// Standard error from the spread between paths.
    pub stderr: f64,
}

/// Long-run fraction of time spent in `region`.
pub fn occupation_fraction(cfg: &SimConfig, region: &Target) -> Result<OccupationFraction, SimError> {
    check_horizon(cfg)?;
    region.validate(cfg.spec.dim)?;
    let per_path = fractions(cfg, 2, |x| region.contains(x) as usize)?;
    let col: Vec<f64> = per_path.iter().map(|f| f[1]).collect();
    let (estimate, stderr) = mean_stderr(&col);
    Ok(OccupationFraction { estimate, stderr })
}
