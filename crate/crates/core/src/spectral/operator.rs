use super::grid::Grid;
use super::SpectralError;
use crate::geometry::DomainSpec;
use std::io::{self, Read, Write};

/// Weighted graph with cell masses: the form `Q(f) = sum w_ij (f_i - f_j)^2` against the
/// variance under `m`. Masses and weights are stored as logarithms so that cells far in the
/// Gaussian tail do not underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub ln_mass: Vec<f64>,
    pub edges: Vec<(u32, u32)>,
    pub ln_weight: Vec<f64>,
}

impl DiscreteOperator {
    pub fn new(ln_mass: Vec<f64>, edges: Vec<(u32, u32)>, ln_weight: Vec<f64>) -> Result<Self, SpectralError> {
        let n = ln_mass.len();
        if edges.len() != ln_weight.len() {
            return Err(SpectralError::Input("one weight per edge".into()));
        }
        if let Some(&(i, j)) = edges
            .iter()
            .find(|&&(i, j)| i == j || i as usize >= n || j as usize >= n)
        {
            return Err(SpectralError::Input(format!("bad edge ({i}, {j}) for {n} cells")));
        }
        if ln_mass
            .iter()
            .chain(&ln_weight)
            .any(|v| v.is_nan() || *v == f64::INFINITY)
        {
            return Err(SpectralError::Input("masses and weights must be finite".into()));
        }
        Ok(DiscreteOperator {
            ln_mass,
            edges,
            ln_weight,
        })
    }

    pub fn len(&self) -> usize {
        self.ln_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_mass.is_empty()
    }

    /// Masses divided by the largest one.
    pub fn relative_mass(&self) -> Vec<f64> {
        let top = self.ln_mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.ln_mass.iter().map(|l| (l - top).exp()).collect()
    }

    /// Number of connected components of the edge graph.
    pub fn components(&self) -> usize {
        let n = self.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut a: usize) -> usize {
            while p[a] != a {
                p[a] = p[p[a]];
                a = p[a];
            }
            a
        }
        let mut count = n;
        for &(i, j) in &self.edges {
            let (a, b) = (find(&mut parent, i as usize), find(&mut parent, j as usize));
            if a != b {
                parent[a] = b;
                count -= 1;
            }
        }
        count
    }

    /// `(Q(f), Var_m(f))`, both normalized by the total mass.
    pub fn form_and_variance(&self, f: &[f64]) -> (f64, f64) {
        let m = self.relative_mass();
        let top = self.ln_mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = m.iter().sum();
        let mean = m.iter().zip(f).map(|(a, b)| a * b).sum::<f64>() / total;
        let var = m.iter().zip(f).map(|(a, b)| a * (b - mean).powi(2)).sum::<f64>() / total;
        let q = self
            .edges
            .iter()
            .zip(&self.ln_weight)
            .map(|(&(i, j), lw)| (lw - top).exp() * (f[i as usize] - f[j as usize]).powi(2))
            .sum::<f64>()
            / total;
        (q, var)
    }

    /// Symmetrized operator `M^{-1/2} K M^{-1/2}` with `K` the weighted graph Laplacian.
    pub fn symmetrized(&self) -> Csr {
        let n = self.len();
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut diag = vec![0.0; n];
        for (&(i, j), &lw) in self.edges.iter().zip(&self.ln_weight) {
            let (iu, ju) = (i as usize, j as usize);
            let (li, lj) = (self.ln_mass[iu], self.ln_mass[ju]);
            diag[iu] += (lw - li).exp();
            diag[ju] += (lw - lj).exp();
            let off = -(lw - 0.5 * (li + lj)).exp();
            rows[iu].push((j, off));
            rows[ju].push((i, off));
        }
        let mut csr = Csr {
            row_ptr: Vec::with_capacity(n + 1),
            cols: Vec::new(),
            vals: Vec::new(),
        };
        csr.row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.push((i as u32, diag[i]));
            row.sort_by_key(|e| e.0);
            // merge duplicate edges
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                csr.cols.push(c);
                csr.vals.push(v);
            }
            csr.row_ptr.push(csr.cols.len());
        }
        csr
    }

    /// Little-endian dump: `OUPB1`, cell count and edge count as u64, ln masses, then per
    /// edge `i: u32, j: u32, ln w: f64`.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(b"OUPB1")?;
        out.write_all(&(self.len() as u64).to_le_bytes())?;
        out.write_all(&(self.edges.len() as u64).to_le_bytes())?;
        for v in &self.ln_mass {
            out.write_all(&v.to_le_bytes())?;
        }
        for (&(i, j), w) in self.edges.iter().zip(&self.ln_weight) {
            out.write_all(&i.to_le_bytes())?;
            out.write_all(&j.to_le_bytes())?;
            out.write_all(&w.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut input: R) -> io::Result<Self> {
        let mut magic = [0u8; 5];
        input.read_exact(&mut magic)?;
        if &magic != b"OUPB1" {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "missing OUPB1 header"));
        }
        let mut b8 = [0u8; 8];
        let mut b4 = [0u8; 4];
        let mut u64_at = |r: &mut R| -> io::Result<u64> {
            r.read_exact(&mut b8)?;
            Ok(u64::from_le_bytes(b8))
        };
        let n = u64_at(&mut input)? as usize;
        let e = u64_at(&mut input)? as usize;
        let mut ln_mass = Vec::with_capacity(n);
        for _ in 0..n {
            ln_mass.push(f64::from_bits(u64_at(&mut input)?));
        }
        let mut edges = Vec::with_capacity(e);
        let mut ln_weight = Vec::with_capacity(e);
        for _ in 0..e {
            input.read_exact(&mut b4)?;
            let i = u32::from_le_bytes(b4);
            input.read_exact(&mut b4)?;
            let j = u32::from_le_bytes(b4);
            edges.push((i, j));
            ln_weight.push(f64::from_bits(u64_at(&mut input)?));
        }
        DiscreteOperator::new(ln_mass, edges, ln_weight)
            .map_err(|err| io::Error::new(io::ErrorKind::InvalidData, err.to_string()))
    }
}

/// Compressed sparse rows with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] as usize == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.n())
            .map(|i| {
                self.vals[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Finite-volume form on the grid: axis neighbours that are both kept and joined by a
/// segment inside the domain get weight `sqrt(m_i m_j) / h^2`.
pub fn assemble(grid: &Grid, spec: &DomainSpec) -> DiscreteOperator {
    let d = grid.dim;
    let n_axis = grid.per_axis;
    let ln_h2 = 2.0 * grid.h.ln();
    let mut edges = Vec::new();
    let mut ln_weight = Vec::new();
    let mut probe = vec![0.0; d];
    let mut stride = 1;
    for axis in 0..d {
        for (lin, &i) in grid.index.iter().enumerate() {
            if i == u32::MAX || (lin / stride) % n_axis == n_axis - 1 {
                continue;
            }
            let j = grid.index[lin + stride];
            if j == u32::MAX {
                continue;
            }
            let xi = grid.center(i as usize);
            let crosses = [0.25, 0.5, 0.75].iter().any(|t| {
                probe.copy_from_slice(xi);
                probe[axis] += t * grid.h;
                !spec.obstacle.contains(&probe)
            });
            if crosses {
                continue;
            }
            edges.push((i, j));
            ln_weight.push(0.5 * (grid.ln_mass[i as usize] + grid.ln_mass[j as usize]) - ln_h2);
        }
        stride *= n_axis;
    }
    DiscreteOperator {
        ln_mass: grid.ln_mass.clone(),
        edges,
        ln_weight,
    }
}

#[cfg(test)]
mod tests {
    use super::super::grid::{build_grid, GridOptions};
    use super::*;
    use crate::geometry::Obstacle;

    #[test]
    fn two_cell_toy() {
        let op = DiscreteOperator::new(vec![0.0, 0.0], vec![(0, 1)], vec![0.0]).unwrap();
        let (q, var) = op.form_and_variance(&[0.0, 1.0]);
        assert_eq!(q / var, 2.0);
        assert_eq!(op.form_and_variance(&[3.0, 3.0]).0, 0.0);
    }

    #[test]
    fn linear_quotient_matches_continuum() {
        let spec = DomainSpec::new(2, 1.0, Obstacle::None).unwrap();
        let g = build_grid(&spec, 0.05, &GridOptions::default()).unwrap();
        let op = assemble(&g, &spec);
        let f: Vec<f64> = (0..g.len()).map(|i| g.center(i)[0]).collect();
        let (q, var) = op.form_and_variance(&f);
        assert!((q / var - 2.0).abs() < 0.04, "{}", q / var);
    }

    #[test]
    fn symmetrized_rows_annihilate_sqrt_mass() {
        let spec = DomainSpec::new(
            2,
            1.5,
            Obstacle::Ball {
                center: vec![1.0, 0.5],
                radius: 0.7,
            },
        )
        .unwrap();
        let g = build_grid(&spec, 0.2, &GridOptions::default()).unwrap();
        let op = assemble(&g, &spec);
        let a = op.symmetrized();
        let top = op.ln_mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let v: Vec<f64> = op.ln_mass.iter().map(|l| (0.5 * (l - top)).exp()).collect();
        let mut out = vec![0.0; v.len()];
        a.matvec(&v, &mut out);
        assert!(out.iter().all(|x| x.abs() < 1e-10 * a.norm_bound()));
        assert_eq!(op.components(), 1);
    }

    #[test]
    fn dump_round_trip() {
        let op = DiscreteOperator::new(vec![-1.0, -2.5, 0.0], vec![(0, 1), (1, 2)], vec![0.5, -3.0]).unwrap();
        let mut buf = Vec::new();
        op.write_dump(&mut buf).unwrap();
        assert_eq!(&buf[..5], b"OUPB1");
        assert_eq!(buf.len(), 5 + 16 + 3 * 8 + 2 * 16);
        assert_eq!(DiscreteOperator::read_dump(&buf[..]).unwrap(), op);
    }
}
