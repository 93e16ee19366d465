//! Smallest eigenpairs of the symmetric-definite pencil `K x = lambda M x`.
//!
//! Small problems go through a dense Cholesky reduction to a standard
//! symmetric problem. Larger ones use shift-invert block Krylov iteration
//! with full M-orthogonalization and Rayleigh-Ritz extraction; the block
//! start captures exactly repeated eigenvalues. Both paths report the same
//! residual measure, `||K x - lambda M x||_2 / ||M x||_2`.

pub mod envelope;
mod krylov;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::{norm2, SymSparse};
use envelope::EnvelopeCholesky;

/// Largest dimension solved by the dense path when the method is `Auto`.
pub const DENSE_THRESHOLD: usize = 800;

/// M-orthonormality tolerance promised for returned eigenvectors.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    ShiftInvert,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MethodChoice {
    #[default]
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Clone, Debug)]
pub struct EigResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// M-orthonormal, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub method: Method,
    pub iterations: usize,
}

impl EigResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, &r| m.max(r))
    }
}

/// `||K x - lambda M x||_2 / ||M x||_2`.
pub fn relative_residual(k: &SymSparse, m: &SymSparse, x: &[f64], lambda: f64) -> f64 {
    let kx = k.matvec(x);
    let mx = m.matvec(x);
    let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lambda * b).collect();
    norm2(&r) / norm2(&mx)
}

/// `count` smallest eigenpairs, choosing the path by dimension.
pub fn solve_gevp(k: &SymSparse, m: &SymSparse, count: usize, tol: f64) -> Result<EigResult> {
    solve_gevp_with(k, m, count, tol, MethodChoice::Auto)
}

pub fn solve_gevp_with(
    k: &SymSparse,
    m: &SymSparse,
    count: usize,
    tol: f64,
    method: MethodChoice,
) -> Result<EigResult> {
    let n = k.dim();
    if m.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "stiffness has dimension {n}, mass has dimension {}",
            m.dim()
        )));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    if count > n {
        return Err(Error::NotEnoughDof {
            requested: count,
            available: n,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    // both paths need M positive definite; the envelope factor reports the failing pivot
    EnvelopeCholesky::factor(m).map_err(|f| Error::MassNotPD {
        pivot: f.pivot,
        value: f.value,
    })?;
    let dense = match method {
        MethodChoice::Auto => n <= DENSE_THRESHOLD,
        MethodChoice::Dense => true,
        MethodChoice::ShiftInvert => false,
    };
    let mut result = if dense {
        dense_solve(k, m, count)?
    } else {
        krylov::shift_invert(k, m, count, tol)?
    };
    // the dense reduction loses accuracy when K spans many orders of magnitude
    if dense && method == MethodChoice::Auto && result.max_residual() > tol {
        result = krylov::shift_invert(k, m, count, tol)?;
    }
    let worst = result.max_residual();
    if worst > tol {
        return Err(Error::NoConvergence {
            best_residual: worst,
            iterations: result.iterations,
        });
    }
    Ok(result)
}

fn dense_solve(k: &SymSparse, m: &SymSparse, count: usize) -> Result<EigResult> {
    let md = m.to_dense();
    let chol = md.cholesky().ok_or_else(|| Error::MassNotPD {
        pivot: 0,
        value: f64::NAN,
    })?;
    let l = chol.l();
    let kd = k.to_dense();
    let left = l
        .solve_lower_triangular(&kd)
        .ok_or_else(|| Error::SolverFailure("singular mass factor".into()))?;
    let c = l
        .solve_lower_triangular(&left.transpose())
        .ok_or_else(|| Error::SolverFailure("singular mass factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let dim = c.nrows();
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lt = l.transpose();
    let mut eigenvalues = Vec::with_capacity(count);
    let mut eigenvectors = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for &idx in order.iter().take(count) {
        let y = DMatrix::from_column_slice(dim, 1, eig.eigenvectors.column(idx).as_slice());
        let x = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::SolverFailure("singular mass factor".into()))?;
        let x: Vec<f64> = x.iter().copied().collect();
        let lambda = eig.eigenvalues[idx];
        residuals.push(relative_residual(k, m, &x, lambda));
        eigenvalues.push(lambda);
        eigenvectors.push(x);
    }
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
        residuals,
        method: Method::Dense,
        iterations: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;
    use approx::assert_relative_eq;

    fn tridiag(n: usize) -> (SymSparse, SymSparse) {
        // 1D P1 Dirichlet Laplacian on (0,1): K = tridiag(-1,2,-1)/h, M = tridiag(1,4,1) h/6
        let h = 1.0 / (n + 1) as f64;
        let mut k = TripletBuilder::new(n);
        let mut m = TripletBuilder::new(n);
        for i in 0..n {
            k.add(i, i, 2.0 / h);
            m.add(i, i, 4.0 * h / 6.0);
            if i + 1 < n {
                k.add(i, i + 1, -1.0 / h);
                m.add(i, i + 1, h / 6.0);
            }
        }
        (k.build(), m.build())
    }

    /// Exact discrete eigenvalues of the 1D P1 pencil.
    fn tridiag_oracle(n: usize, j: usize) -> f64 {
        let h = 1.0 / (n + 1) as f64;
        let c = (j as f64 * std::f64::consts::PI * h).cos();
        (6.0 / (h * h)) * (1.0 - c) / (2.0 + c)
    }

    #[test]
    fn diagonal_case() {
        let k = SymSparse::diagonal_matrix(&[1.0, 2.0, 3.0]);
        let m = SymSparse::identity(3);
        let r = solve_gevp(&k, &m, 2, 1e-10).unwrap();
        assert_relative_eq!(r.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(r.eigenvalues[1], 2.0, epsilon = 1e-14);
        assert_relative_eq!(r.eigenvectors[0][0].abs(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(r.eigenvectors[1][1].abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn two_by_two_pencil() {
        // det(K - l M) = (2 - 2l)^2 - l^2 = 0  =>  l in {2/3, 2}
        let k = SymSparse::diagonal_matrix(&[2.0, 2.0]);
        let m = SymSparse::from_dense(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]));
        let r = solve_gevp(&k, &m, 2, 1e-10).unwrap();
        assert_relative_eq!(r.eigenvalues[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(r.eigenvalues[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn count_exceeding_dimension() {
        let k = SymSparse::identity(3);
        let err = solve_gevp(&k, &k, 4, 1e-8).unwrap_err();
        assert!(matches!(
            err,
            Error::NotEnoughDof {
                requested: 4,
                available: 3
            }
        ));
    }

    #[test]
    fn indefinite_mass_is_rejected() {
        let k = SymSparse::identity(2);
        let m = SymSparse::diagonal_matrix(&[1.0, -1.0]);
        assert!(matches!(
            solve_gevp(&k, &m, 1, 1e-8),
            Err(Error::MassNotPD { pivot: 1, .. })
        ));
    }

    #[test]
    fn shift_invert_matches_closed_form() {
        let n = 1500;
        let (k, m) = tridiag(n);
        let r = solve_gevp(&k, &m, 10, 1e-8).unwrap();
        assert_eq!(r.method, Method::ShiftInvert);
        for j in 0..10 {
            assert_relative_eq!(
                r.eigenvalues[j],
                tridiag_oracle(n, j + 1),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn paths_agree_and_vectors_are_m_orthonormal() {
        let n = 300;
        let (k, m) = tridiag(n);
        let d = solve_gevp_with(&k, &m, 8, 1e-9, MethodChoice::Dense).unwrap();
        let s = solve_gevp_with(&k, &m, 8, 1e-9, MethodChoice::ShiftInvert).unwrap();
        for j in 0..8 {
            assert_relative_eq!(d.eigenvalues[j], s.eigenvalues[j], max_relative = 1e-8);
        }
        for res in [&d, &s] {
            for i in 0..8 {
                for j in 0..8 {
                    let g = m.bilinear(&res.eigenvectors[i], &res.eigenvectors[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (g - want).abs() <= ORTHONORMALITY_TOL,
                        "gram[{i}][{j}] = {g}"
                    );
                }
            }
        }
    }

    #[test]
    fn repeated_eigenvalues_are_all_found() {
        // block diagonal copy of the same pencil: every eigenvalue is exactly double
        let n = 500;
        let (k1, m1) = tridiag(n);
        let mut k = TripletBuilder::new(2 * n);
        let mut m = TripletBuilder::new(2 * n);
        for (r, c, v) in k1.entries() {
            k.add(r, c, v);
            k.add(r + n, c + n, v);
        }
        for (r, c, v) in m1.entries() {
            m.add(r, c, v);
            m.add(r + n, c + n, v);
        }
        let (k, m) = (k.build(), m.build());
        let r = solve_gevp_with(&k, &m, 6, 1e-9, MethodChoice::ShiftInvert).unwrap();
        for j in 0..6 {
            assert_relative_eq!(
                r.eigenvalues[j],
                tridiag_oracle(n, j / 2 + 1),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn singular_stiffness_kernel() {
        // Neumann 1D: constants in the kernel
        let n = 900;
        let mut k = TripletBuilder::new(n);
        let mut m = TripletBuilder::new(n);
        for i in 0..n - 1 {
            k.add(i, i, 1.0);
            k.add(i + 1, i + 1, 1.0);
            k.add(i, i + 1, -1.0);
            m.add(i, i, 2.0 / 6.0);
            m.add(i + 1, i + 1, 2.0 / 6.0);
            m.add(i, i + 1, 1.0 / 6.0);
        }
        let (k, m) = (k.build(), m.build());
        let r = solve_gevp(&k, &m, 3, 1e-9).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-10);
        assert!(r.eigenvalues[1] > 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spd_pencil() -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
            (6usize..16).prop_flat_map(|n| {
                (
                    proptest::collection::vec(-1.0f64..1.0, n * n),
                    proptest::collection::vec(-1.0f64..1.0, n * n),
                )
                    .prop_map(move |(a, b)| {
                        let a = DMatrix::from_row_slice(n, n, &a);
                        let b = DMatrix::from_row_slice(n, n, &b);
                        let k = &a * a.transpose();
                        let m = &b * b.transpose() + DMatrix::identity(n, n) * (n as f64);
                        (k, m)
                    })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]

            #[test]
            fn permutation_invariance((kd, md) in spd_pencil(), shift in 1usize..5) {
                let n = kd.nrows();
                let k = SymSparse::from_dense(&kd);
                let m = SymSparse::from_dense(&md);
                let perm: Vec<usize> = (0..n).map(|i| (i * shift + 1) % n).collect();
                let mut sorted = perm.clone();
                sorted.sort_unstable();
                prop_assume!(sorted == (0..n).collect::<Vec<_>>());
                let a = solve_gevp(&k, &m, n, 1e-8).unwrap();
                let b = solve_gevp(&k.permuted(&perm), &m.permuted(&perm), n, 1e-8).unwrap();
                let scale = a.eigenvalues[n - 1].abs().max(1.0);
                for j in 0..n {
                    prop_assert!((a.eigenvalues[j] - b.eigenvalues[j]).abs() <= 1e-10 * scale);
                }
            }

            #[test]
            fn principal_submatrix_never_lowers_eigenvalues((kd, md) in spd_pencil(), drop in 0usize..6) {
                let n = kd.nrows();
                let k = SymSparse::from_dense(&kd);
                let m = SymSparse::from_dense(&md);
                let keep: Vec<usize> = (0..n).filter(|&i| i != drop && i != (drop + 3) % n).collect();
                let full = solve_gevp(&k, &m, n, 1e-8).unwrap();
                let sub = solve_gevp(&k.principal_submatrix(&keep), &m.principal_submatrix(&keep), keep.len(), 1e-8).unwrap();
                let scale = full.eigenvalues[n - 1].abs().max(1.0);
                for j in 0..keep.len() {
                    prop_assert!(sub.eigenvalues[j] >= full.eigenvalues[j] - 1e-10 * scale);
                }
            }
        }
    }
}
