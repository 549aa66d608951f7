//! Shift-invert Arnoldi with thick restarts for real nonsymmetric sparse operators.
//!
//! The operator `(A - sigma I)^-1` is applied through one sparse LU
//! factorization. Eigenvalues of `A` closest to `sigma` become the dominant
//! eigenvalues `mu = 1 / (lambda - sigma)` of the inverted operator.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SolverError;
use crate::sparse::Csr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigOptions {
    /// Number of eigenpairs wanted.
    pub nev: usize,
    /// Krylov subspace dimension; `0` picks a default from `nev`.
    pub krylov_dim: usize,
    /// Relative Ritz residual tolerance in the inverted spectrum.
    pub tol: f64,
    pub max_restarts: usize,
    /// Seed of the start vector.
    pub seed: u64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { nev: 4, krylov_dim: 0, tol: 1e-13, max_restarts: 300, seed: 0x5107 }
    }
}

#[derive(Debug, Clone)]
pub struct EigPairs {
    /// Eigenvalues of the original operator, closest to the shift first.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub restarts: usize,
}

struct ShiftInvert {
    lu: Lu<usize, f64>,
    n: usize,
}

impl ShiftInvert {
    fn new(op: &Csr, sigma: f64) -> Result<Self, SolverError> {
        let mat = op.shifted_faer(sigma).map_err(SolverError::Factorization)?;
        let lu = mat.sp_lu().map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
        Ok(Self { lu, n: op.nrows })
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| x[i]);
        let sol = self.lu.solve(&rhs);
        (0..self.n).map(|i| sol[(i, 0)]).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthogonalizes `w` against `basis` (classical Gram-Schmidt, repeated once),
/// returning the accumulated projection coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (c, v) in coeffs.iter_mut().zip(basis) {
            let h = dot(v, w);
            *c += h;
            w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= h * vi);
        }
    }
    coeffs
}

#[derive(Clone, Copy)]
struct Ritz {
    re: f64,
    im: f64,
    col: usize,
}

/// Finds the `opts.nev` eigenpairs of `op` nearest `sigma`.
pub fn shift_invert_eigs(op: &Csr, sigma: f64, opts: EigOptions) -> Result<EigPairs, SolverError> {
    let n = op.nrows;
    if n == 0 || opts.nev == 0 {
        return Ok(EigPairs { values: vec![], vectors: vec![], restarts: 0 });
    }
    let nev = opts.nev.min(n);
    let m = if opts.krylov_dim == 0 { (2 * nev + 24).max(40) } else { opts.krylov_dim }.min(n).max(nev + 2.min(n - nev));
    let si = ShiftInvert::new(op, sigma)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = norm(&v0);
    v0.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<f64>> = vec![v0];
    // projected matrix, (m + 1) x m
    let mut h = Mat::<f64>::zeros(m + 1, m);
    let mut kept = 0;
    let mut worst = f64::INFINITY;
    let mut converged = 0;

    for restart in 0..=opts.max_restarts {
        let mut dim = m;
        for j in kept..m {
            let mut w = si.apply(&basis[j]);
            let coeffs = orthogonalize(&basis, &mut w);
            for (i, c) in coeffs.into_iter().enumerate() {
                h[(i, j)] = c;
            }
            let beta = norm(&w);
            h[(j + 1, j)] = beta;
            if beta <= 1e-14 * h[(j, j)].abs().max(1.0) {
                // invariant subspace: the Ritz pairs are exact
                dim = j + 1;
                break;
            }
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(w);
        }

        let hm = Mat::<f64>::from_fn(dim, dim, |i, j| h[(i, j)]);
        let eig = hm.eigen().map_err(|e| SolverError::Factorization(format!("projected eigenproblem: {e:?}")))?;
        let (s, u) = (eig.S(), eig.U());
        let mut ritz: Vec<Ritz> =
            (0..dim).map(|c| Ritz { re: s[c].re, im: s[c].im, col: c }).collect();
        ritz.sort_by(|a, b| {
            let (ma, mb) = (a.re.hypot(a.im), b.re.hypot(b.im));
            mb.total_cmp(&ma).then(b.im.total_cmp(&a.im))
        });

        let coupling = if dim < m { 0.0 } else { h[(m, m - 1)] };
        let residual = |r: &Ritz| {
            let col = u.col(r.col);
            let scale = (0..dim).map(|i| col[i].re * col[i].re + col[i].im * col[i].im).sum::<f64>().sqrt();
            let last = col[dim - 1];
            coupling * last.re.hypot(last.im) / (scale * r.re.hypot(r.im))
        };
        let wanted = &ritz[..nev.min(dim)];
        converged = wanted.iter().filter(|r| residual(r) <= opts.tol).count();
        worst = wanted.iter().map(residual).fold(0.0, f64::max);

        if converged == wanted.len() {
            let mut values = Vec::with_capacity(wanted.len());
            let mut vectors = Vec::with_capacity(wanted.len());
            for r in wanted {
                let col = u.col(r.col);
                let y: Vec<f64> = (0..dim).map(|i| col[i].re).collect();
                let mut x = vec![0.0; n];
                for (yi, v) in y.iter().zip(&basis) {
                    x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += yi * vi);
                }
                let nx = norm(&x);
                x.iter_mut().for_each(|xi| *xi /= nx);
                let mu = r.re;
                values.push(sigma + mu / (mu * mu + r.im * r.im));
                vectors.push(x);
            }
            return Ok(EigPairs { values, vectors, restarts: restart });
        }
        if restart == opts.max_restarts {
            break;
        }

        // Thick restart: keep an orthonormal basis of the leading Ritz vectors.
        let mut keep = (nev + (m - nev) / 2).min(dim - 1).max(nev.min(dim - 1));
        if keep > 0 && ritz[keep - 1].im != 0.0 && keep < dim && ritz[keep].im == -ritz[keep - 1].im {
            keep += 1;
        }
        let keep = keep.min(m - 1);
        let mut y: Vec<Vec<f64>> = Vec::with_capacity(keep);
        for r in &ritz[..keep] {
            let col = u.col(r.col);
            let part: Vec<f64> =
                if r.im >= 0.0 { (0..dim).map(|i| col[i].re).collect() } else { (0..dim).map(|i| col[i].im).collect() };
            let mut part = part;
            orthogonalize(&y, &mut part);
            let p = norm(&part);
            if p > 1e-10 {
                part.iter_mut().for_each(|x| *x /= p);
                y.push(part);
            }
        }
        let k = y.len();
        // T = Y^T H Y, b = h_{m+1,m} * (last row of Y)
        let mut hy = vec![vec![0.0; dim]; k];
        for (c, yc) in y.iter().enumerate() {
            for i in 0..dim {
                hy[c][i] = (0..dim).map(|l| h[(i, l)] * yc[l]).sum();
            }
        }
        let mut new_h = Mat::<f64>::zeros(m + 1, m);
        for a in 0..k {
            for b in 0..k {
                new_h[(a, b)] = dot(&y[a], &hy[b]);
            }
            new_h[(k, a)] = coupling * y[a][dim - 1];
        }
        let next = basis.pop().filter(|_| dim == m);
        let mut new_basis: Vec<Vec<f64>> = y
            .iter()
            .map(|yc| {
                let mut x = vec![0.0; n];
                for (yi, v) in yc.iter().zip(&basis) {
                    x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += yi * vi);
                }
                x
            })
            .collect();
        let next = match next {
            Some(v) => v,
            None => {
                let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                orthogonalize(&new_basis, &mut w);
                let nw = norm(&w);
                w.iter_mut().for_each(|x| *x /= nw);
                w
            }
        };
        new_basis.push(next);
        basis = new_basis;
        h = new_h;
        kept = k;
    }
    Err(SolverError::NotConverged {
        restarts: opts.max_restarts,
        krylov_dim: m,
        converged,
        wanted: nev,
        worst_residual: worst,
    })
}
