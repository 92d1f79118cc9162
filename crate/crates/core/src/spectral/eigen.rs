//! Smallest nonzero eigenvalue of the symmetrized operator, whose kernel is spanned by
//! `sqrt(m)`. Shift-invert Lanczos with full reorthogonalization; the inner systems are
//! solved by conjugate gradients preconditioned with an incomplete Cholesky factor.

use super::operator::{Csr, DiscreteOperator};
use super::SpectralError;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenOptions {
    /// Target `|A y - mu y| <= tol * mu` for the returned pair.
    pub tol: f64,
    pub max_lanczos: usize,
    pub max_cg: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-8,
            max_lanczos: 200,
            max_cg: 20_000,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub value: f64,
    /// `|A y - value y| / value` for the unit Ritz vector.
    pub residual: f64,
    pub lanczos_steps: usize,
    pub cg_iterations: usize,
    pub shift: f64,
    #[serde(skip)]
    pub vector: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn project_out(v: &mut [f64], q: &[f64]) {
    let c = dot(v, q);
    axpy(-c, q, v);
}

/// Lower factor of an incomplete Cholesky decomposition of `A + shift I` on the pattern of
/// the lower triangle of `A`.
struct IncompleteCholesky {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl IncompleteCholesky {
    fn new(a: &Csr, shift: f64) -> Self {
        let mut boost = 0.0;
        loop {
            if let Some(f) = Self::try_factor(a, shift, boost) {
                return f;
            }
            boost = if boost == 0.0 { 1e-3 } else { boost * 4.0 };
        }
    }

    fn try_factor(a: &Csr, shift: f64, boost: f64) -> Option<Self> {
        let n = a.n();
        let mut row_ptr = vec![0usize];
        let mut cols = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        // position of column j inside the current row, for the sparse dot products
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let start = cols.len();
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.cols[k] as usize;
                if j <= i {
                    let mut v = a.vals[k];
                    if j == i {
                        v = (v + shift) * (1.0 + boost);
                    }
                    slot[j] = cols.len();
                    cols.push(j as u32);
                    vals.push(v);
                }
            }
            let end = cols.len();
            for p in start..end {
                let k = cols[p] as usize;
                if k == i {
                    let s: f64 = vals[start..p].iter().map(|v| v * v).sum();
                    let piv = vals[p] - s;
                    if !(piv > 0.0) || !piv.is_finite() {
                        return None;
                    }
                    vals[p] = piv.sqrt();
                } else {
                    // L_ik = (A_ik - sum_{j<k} L_ij L_kj) / L_kk
                    let mut s = 0.0;
                    let (ks, ke) = (row_ptr[k], row_ptr[k + 1]);
                    for q in ks..ke - 1 {
                        let j = cols[q] as usize;
                        let pos = slot[j];
                        if pos != usize::MAX && pos >= start && pos < p {
                            s += vals[pos] * vals[q];
                        }
                    }
                    vals[p] = (vals[p] - s) / vals[ke - 1];
                }
            }
            for p in start..end {
                slot[cols[p] as usize] = usize::MAX;
            }
            row_ptr.push(end);
        }
        Some(IncompleteCholesky { row_ptr, cols, vals })
    }

    /// `z = (L L^T)^{-1} r`
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        z.copy_from_slice(r);
        for i in 0..n {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = z[i];
            for p in s..e - 1 {
                acc -= self.vals[p] * z[self.cols[p] as usize];
            }
            z[i] = acc / self.vals[e - 1];
        }
        for i in (0..n).rev() {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            z[i] /= self.vals[e - 1];
            let zi = z[i];
            for p in s..e - 1 {
                z[self.cols[p] as usize] -= self.vals[p] * zi;
            }
        }
    }
}

struct ShiftedSolver<'a> {
    a: &'a Csr,
    q0: &'a [f64],
    shift: f64,
    pre: IncompleteCholesky,
    max_iter: usize,
    iterations: usize,
}

impl<'a> ShiftedSolver<'a> {
    fn new(a: &'a Csr, q0: &'a [f64], shift: f64, max_iter: usize) -> Self {
        ShiftedSolver {
            a,
            q0,
            shift,
            pre: IncompleteCholesky::new(a, shift),
            max_iter,
            iterations: 0,
        }
    }

    fn apply_shifted(&self, x: &[f64], y: &mut [f64]) {
        self.a.matvec(x, y);
        axpy(self.shift, x, y);
    }

    /// Solves `(A + shift) x = b` on the complement of `q0`, to relative residual `tol`.
    fn solve(&mut self, b: &[f64], tol: f64) -> Result<Vec<f64>, SpectralError> {
        let n = b.len();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        project_out(&mut r, self.q0);
        let bnorm = norm(&r);
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut z = vec![0.0; n];
        self.pre.apply(&r, &mut z);
        project_out(&mut z, self.q0);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for it in 1..=self.max_iter {
            self.apply_shifted(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            axpy(alpha, &p, &mut x);
            if it % 50 == 0 {
                // replace the recursive residual by the true one to keep attainable accuracy
                self.apply_shifted(&x, &mut ap);
                r.iter_mut()
                    .zip(b.iter().zip(&ap))
                    .for_each(|(ri, (bi, ai))| *ri = bi - ai);
                project_out(&mut r, self.q0);
            } else {
                axpy(-alpha, &ap, &mut r);
            }
            if norm(&r) <= tol * bnorm {
                self.iterations += it;
                project_out(&mut x, self.q0);
                return Ok(x);
            }
            self.pre.apply(&r, &mut z);
            project_out(&mut z, self.q0);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
        Err(SpectralError::IterationLimit {
            stage: "conjugate gradients",
            iterations: self.max_iter,
        })
    }
}

/// Unit vector along `sqrt(m)`.
fn kernel_vector(op: &DiscreteOperator) -> Vec<f64> {
    let top = op.ln_mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut q: Vec<f64> = op.ln_mass.iter().map(|l| (0.5 * (l - top)).exp()).collect();
    let s = norm(&q);
    q.iter_mut().for_each(|v| *v /= s);
    q
}

struct LanczosOutcome {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
    steps: usize,
}

fn residual_of(a: &Csr, q0: &[f64], y: &[f64], mu: f64) -> f64 {
    let mut ay = vec![0.0; y.len()];
    a.matvec(y, &mut ay);
    axpy(-mu, y, &mut ay);
    project_out(&mut ay, q0);
    norm(&ay) / mu.abs()
}

fn shift_invert_lanczos(
    a: &Csr,
    q0: &[f64],
    solver: &mut ShiftedSolver,
    start: &[f64],
    tol: f64,
    max_steps: usize,
) -> Result<LanczosOutcome, SpectralError> {
    let n = start.len();
    let shift = solver.shift;
    // rounding floor of the residual relative to the operator scale
    let floor = 64.0 * f64::EPSILON * a.norm_bound();
    let mut v = start.to_vec();
    project_out(&mut v, q0);
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut best: Option<LanczosOutcome> = None;
    let mut mu_est = f64::NAN;
    for k in 0..max_steps.min(n.saturating_sub(1)).max(1) {
        let cg_tol = if mu_est.is_finite() {
            (1e-2 * tol * mu_est / (mu_est + shift)).clamp(1e-15, 1e-10)
        } else {
            1e-10
        };
        let mut w = solver.solve(&basis[k], cg_tol)?;
        let alpha = dot(&w, &basis[k]);
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(-c, b, &mut w);
            }
            project_out(&mut w, q0);
        }
        let beta = norm(&w);

        let m = alphas.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (idx, theta) =
            eig.eigenvalues.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        let mu = 1.0 / theta - shift;
        mu_est = mu;
        let s_last = eig.eigenvectors[(m - 1, idx)];
        // residual of B y = theta y is beta |s_last|; A y - mu y is about that over theta
        let estimate = beta * s_last.abs() / theta / mu.abs();
        let done_space = beta <= 1e-14 * theta.abs() || m + 1 >= n;
        if estimate <= 0.1 * tol || done_space || k + 1 == max_steps {
            let mut y = vec![0.0; n];
            for (i, b) in basis.iter().enumerate() {
                axpy(eig.eigenvectors[(i, idx)], b, &mut y);
            }
            let ny = norm(&y);
            y.iter_mut().for_each(|x| *x /= ny);
            let res = residual_of(a, q0, &y, mu);
            let outcome = LanczosOutcome {
                value: mu,
                vector: y,
                residual: res,
                steps: m,
            };
            if res <= tol || res * mu.abs() <= floor || done_space {
                return Ok(outcome);
            }
            best = Some(outcome);
        }
        if done_space {
            break;
        }
        betas.push(beta);
        w.iter_mut().for_each(|x| *x /= beta);
        basis.push(w);
    }
    match best {
        Some(b) if b.residual <= tol.sqrt() => Ok(b),
        _ => Err(SpectralError::IterationLimit {
            stage: "lanczos",
            iterations: max_steps,
        }),
    }
}

/// Smallest nonzero eigenvalue of the generalized problem `K f = mu M f`.
pub fn second_eigenvalue(op: &DiscreteOperator, opts: &EigenOptions) -> Result<EigenResult, SpectralError> {
    let n = op.len();
    if n < 2 {
        return Err(SpectralError::Input("need at least two cells".into()));
    }
    let components = op.components();
    if components > 1 {
        return Err(SpectralError::Disconnected { components });
    }
    let a = op.symmetrized();
    let q0 = kernel_vector(op);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();

    // a rough pass fixes the shift near the target, then the accurate pass
    let s0 = 1e-4 * a.norm_bound().max(f64::MIN_POSITIVE);
    let mut rough_solver = ShiftedSolver::new(&a, &q0, s0, opts.max_cg);
    let rough = shift_invert_lanczos(&a, &q0, &mut rough_solver, &start, 1e-3, 12.min(opts.max_lanczos))
        .or_else(|_| shift_invert_lanczos(&a, &q0, &mut rough_solver, &start, 1e-3, opts.max_lanczos))?;
    let shift = (0.5 * rough.value).max(1e-12 * a.norm_bound());
    let mut solver = ShiftedSolver::new(&a, &q0, shift, opts.max_cg);
    let fine = shift_invert_lanczos(&a, &q0, &mut solver, &rough.vector, opts.tol, opts.max_lanczos)?;
    Ok(EigenResult {
        value: fine.value,
        residual: fine.residual,
        lanczos_steps: rough.steps + fine.steps,
        cg_iterations: rough_solver.iterations + solver.iterations,
        shift,
        vector: fine.vector,
    })
}

/// Dense reference: all eigenvalues of the symmetrized operator, ascending.
pub fn dense_spectrum(op: &DiscreteOperator) -> Vec<f64> {
    let a = op.symmetrized();
    let n = a.n();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            m[(i, a.cols[k] as usize)] = a.vals[k];
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn dense_second_eigenvalue(op: &DiscreteOperator) -> Result<f64, SpectralError> {
    if op.components() > 1 {
        return Err(SpectralError::Disconnected {
            components: op.components(),
        });
    }
    dense_spectrum(op)
        .get(1)
        .copied()
        .ok_or_else(|| SpectralError::Input("need at least two cells".into()))
}
