//! Shift-invert block Krylov iteration with Rayleigh-Ritz extraction.

use nalgebra::DMatrix;

use super::envelope::EnvelopeCholesky;
use super::{relative_residual, EigResult, Method};
use crate::error::{Error, Result};
use crate::sparse::{dot, SymSparse};

const BLOCK: usize = 8;
const MAX_RESTARTS: usize = 30;
const DEFLATION_TOL: f64 = 1e-9;

struct Basis<'a> {
    k: &'a SymSparse,
    m: &'a SymSparse,
    vectors: Vec<Vec<f64>>,
    /// Projected stiffness `V^T K V`, stored as rows of the lower triangle.
    projected: Vec<Vec<f64>>,
}

impl<'a> Basis<'a> {
    fn new(k: &'a SymSparse, m: &'a SymSparse) -> Self {
        Self {
            k,
            m,
            vectors: Vec::new(),
            projected: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.vectors.len()
    }

    fn m_norm(&self, w: &[f64]) -> f64 {
        self.m.quad_form(w).max(0.0).sqrt()
    }

    /// Classical Gram-Schmidt, two passes, in the M inner product. Returns
    /// false if the vector is (numerically) in the span already.
    fn push(&mut self, mut w: Vec<f64>) -> bool {
        let norm0 = self.m_norm(&w);
        if !(norm0 > 0.0) || !norm0.is_finite() {
            return false;
        }
        for _ in 0..2 {
            let mw = self.m.matvec(&w);
            let coeffs: Vec<f64> = self.vectors.iter().map(|v| dot(v, &mw)).collect();
            for (v, c) in self.vectors.iter().zip(&coeffs) {
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nrm = self.m_norm(&w);
        if nrm < DEFLATION_TOL * norm0 {
            return false;
        }
        w.iter_mut().for_each(|x| *x /= nrm);
        let kw = self.k.matvec(&w);
        let mut row: Vec<f64> = self.vectors.iter().map(|v| dot(v, &kw)).collect();
        row.push(dot(&w, &kw));
        self.projected.push(row);
        self.vectors.push(w);
        true
    }

    fn projected_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut t = DMatrix::zeros(n, n);
        for (i, row) in self.projected.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                t[(i, j)] = v;
                t[(j, i)] = v;
            }
        }
        t
    }

    fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.vectors[0].len()];
        for (v, &c) in self.vectors.iter().zip(coeffs) {
            if c != 0.0 {
                x.iter_mut().zip(v).for_each(|(a, b)| *a += c * b);
            }
        }
        x
    }
}

struct Ritz {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

/// Rayleigh-Ritz on the current basis; builds `want` Ritz vectors and their
/// residuals. Stops computing residuals at the first unconverged pair unless
/// `all` is set.
fn rayleigh_ritz(basis: &Basis, want: usize, tol: f64, all: bool) -> Ritz {
    let t = basis.projected_matrix();
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let want = want.min(order.len());
    let mut values = Vec::with_capacity(want);
    let mut vectors = Vec::with_capacity(want);
    let mut residuals = Vec::with_capacity(want);
    let mut failed = false;
    for &idx in order.iter().take(want) {
        let theta = eig.eigenvalues[idx];
        let x = basis.combine(eig.eigenvectors.column(idx).as_slice());
        let r = if failed && !all {
            f64::INFINITY
        } else {
            relative_residual(basis.k, basis.m, &x, theta)
        };
        if r > tol {
            failed = true;
        }
        values.push(theta);
        vectors.push(x);
        residuals.push(r);
    }
    Ritz {
        values,
        vectors,
        residuals,
    }
}

fn start_vector(n: usize, j: usize, salt: usize) -> Vec<f64> {
    let a = 0.754_877_666_246_692_7 + 0.137 * j as f64 + 0.0173 * salt as f64;
    let b = 0.569_840_290_998_053_3 + 0.291 * j as f64;
    (0..n)
        .map(|i| {
            let x = (i + 1) as f64;
            (a * x).sin() + 0.5 * (b * x * 1.618_033_988_749_895).cos()
        })
        .collect()
}

pub(super) fn shift_invert(
    k: &SymSparse,
    m: &SymSparse,
    count: usize,
    tol: f64,
) -> Result<EigResult> {
    let n = k.dim();
    let ratio = k.trace() / m.trace();
    let mut sigma = if ratio > 0.0 && ratio.is_finite() {
        -1e-3 * ratio
    } else {
        -1.0
    };
    let mut factor = None;
    for _ in 0..4 {
        match EnvelopeCholesky::factor(&k.add_scaled(-sigma, m)) {
            Ok(f) => {
                factor = Some(f);
                break;
            }
            Err(_) => sigma *= 10.0,
        }
    }
    let factor = factor
        .ok_or_else(|| Error::SolverFailure("shifted stiffness is not positive definite".into()))?;
    let apply = |x: &[f64]| factor.solve(&m.matvec(x));

    let block = BLOCK.min(n);
    let max_basis = n.min((6 * count + 8 * block).clamp(160, 400));
    let mut basis = Basis::new(k, m);
    let mut salt = 0;
    let mut last_block: Vec<Vec<f64>> = (0..block).map(|j| start_vector(n, j, salt)).collect();
    let mut next_check = (2 * count + block).min(n);
    let mut restarts = 0;
    let mut iterations = 0;
    let mut best = f64::INFINITY;

    loop {
        iterations += 1;
        let mut added = Vec::new();
        for v in &last_block {
            let w = apply(v);
            if basis.push(w) {
                added.push(basis.vectors.last().unwrap().clone());
            }
        }
        if added.is_empty() && basis.len() < n {
            // invariant subspace; continue from fresh directions
            salt += 1;
            for j in 0..block {
                if basis.push(start_vector(n, j, salt)) {
                    added.push(basis.vectors.last().unwrap().clone());
                }
            }
            if salt > 50 {
                return Err(Error::SolverFailure(
                    "Krylov basis cannot be extended".into(),
                ));
            }
        }
        last_block = added;
        let full = basis.len() >= n;
        if basis.len() < next_check && !full && basis.len() < max_basis {
            continue;
        }
        next_check = (basis.len() + (basis.len() / 4).max(block)).min(n);
        let ritz = rayleigh_ritz(&basis, count, tol, false);
        if ritz.values.len() >= count && ritz.residuals.iter().all(|&r| r <= tol) {
            return Ok(finish(basis.k, basis.m, ritz, iterations));
        }
        best = best.min(
            ritz.residuals
                .iter()
                .filter(|r| r.is_finite())
                .fold(0.0, |a: f64, &r| a.max(r)),
        );
        if full {
            let ritz = rayleigh_ritz(&basis, count, tol, true);
            return Ok(finish(basis.k, basis.m, ritz, iterations));
        }
        if basis.len() >= max_basis {
            restarts += 1;
            if restarts > MAX_RESTARTS {
                return Err(Error::NoConvergence {
                    best_residual: best,
                    iterations,
                });
            }
            let keep = (count + block).min(basis.len());
            let wide = rayleigh_ritz(&basis, keep, tol, true);
            let mut fresh = Basis::new(k, m);
            for v in &wide.vectors {
                fresh.push(v.clone());
            }
            // continue the Krylov sequence from the unconverged wanted directions
            last_block = wide
                .vectors
                .iter()
                .zip(&wide.residuals)
                .take(count)
                .filter(|(_, &r)| r > tol)
                .map(|(v, _)| v.clone())
                .take(block)
                .collect();
            if last_block.is_empty() {
                last_block = wide
                    .vectors
                    .iter()
                    .skip(count)
                    .take(block)
                    .cloned()
                    .collect();
            }
            basis = fresh;
            next_check = basis.len() + block;
        }
    }
}

fn finish(k: &SymSparse, m: &SymSparse, ritz: Ritz, iterations: usize) -> EigResult {
    let residuals = ritz
        .vectors
        .iter()
        .zip(&ritz.values)
        .map(|(x, &l)| relative_residual(k, m, x, l))
        .collect();
    EigResult {
        eigenvalues: ritz.values,
        eigenvectors: ritz.vectors,
        residuals,
        method: Method::ShiftInvert,
        iterations,
    }
}
