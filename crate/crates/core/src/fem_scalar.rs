//! P1 stiffness and consistent mass matrices, and the Dirichlet / Neumann
//! Laplacian spectra they define.

use serde::{Deserialize, Serialize};

use crate::eig::{self, EigResult};
use crate::error::{Error, Result};
use crate::geometry::{Point, TriMesh};
use crate::sparse::{SymSparse, TripletBuilder};
use crate::spectrum::{BcLabel, Spectrum};

/// Default relative residual target for eigenpairs.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarBc {
    Dirichlet,
    Neumann,
}

impl ScalarBc {
    pub fn label(self) -> BcLabel {
        match self {
            ScalarBc::Dirichlet => BcLabel::Dirichlet,
            ScalarBc::Neumann => BcLabel::Neumann,
        }
    }
}

/// Gradients of the three P1 hat functions on a triangle, and its area.
pub fn p1_gradients(p: [Point; 3]) -> ([Point; 3], f64) {
    let area2 =
        (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        g[i] = [(p[j][1] - p[k][1]) / area2, (p[k][0] - p[j][0]) / area2];
    }
    (g, 0.5 * area2)
}

pub(crate) fn triangle_points(mesh: &TriMesh, tri: [usize; 3]) -> [Point; 3] {
    [
        mesh.points[tri[0]],
        mesh.points[tri[1]],
        mesh.points[tri[2]],
    ]
}

/// Global stiffness `int grad u . grad v` and consistent mass `int u v`.
pub fn assemble_scalar(mesh: &TriMesh) -> (SymSparse, SymSparse) {
    let n = mesh.num_points();
    let cap = 6 * mesh.num_triangles();
    let mut k = TripletBuilder::with_capacity(n, cap);
    let mut m = TripletBuilder::with_capacity(n, cap);
    for &tri in &mesh.triangles {
        let (g, area) = p1_gradients(triangle_points(mesh, tri));
        for a in 0..3 {
            for b in a..3 {
                let kab = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                let mab = if a == b { area / 6.0 } else { area / 12.0 };
                k.add(tri[a], tri[b], kab);
                m.add(tri[a], tri[b], mab);
            }
        }
    }
    (k.build(), m.build())
}

/// Eigenvalues together with mode shapes expanded to all mesh vertices
/// (Dirichlet modes are zero on the boundary).
#[derive(Clone, Debug)]
pub struct ScalarEigenpairs {
    pub spectrum: Spectrum,
    pub modes: Vec<Vec<f64>>,
}

pub fn scalar_spectrum(mesh: &TriMesh, bc: ScalarBc, count: usize, tol: f64) -> Result<Spectrum> {
    scalar_eigenpairs(mesh, bc, count, tol).map(|p| p.spectrum)
}

pub fn scalar_eigenpairs(
    mesh: &TriMesh,
    bc: ScalarBc,
    count: usize,
    tol: f64,
) -> Result<ScalarEigenpairs> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let (k, m) = assemble_scalar(mesh);
    let (k, m, dofs) = match bc {
        ScalarBc::Neumann => (k, m, (0..mesh.num_points()).collect::<Vec<_>>()),
        ScalarBc::Dirichlet => {
            let interior = mesh.interior_vertices();
            (
                k.principal_submatrix(&interior),
                m.principal_submatrix(&interior),
                interior,
            )
        }
    };
    if count > dofs.len() {
        return Err(Error::NotEnoughDof {
            requested: count,
            available: dofs.len(),
        });
    }
    let result = solve(&k, &m, count, tol)?;
    let modes = result
        .eigenvectors
        .iter()
        .map(|x| {
            let mut full = vec![0.0; mesh.num_points()];
            for (&v, &xv) in dofs.iter().zip(x) {
                full[v] = xv;
            }
            full
        })
        .collect();
    let spectrum = Spectrum {
        values: result.eigenvalues,
        bc: bc.label(),
        analytic: false,
        residuals: result.residuals,
        tol,
        mesh_h: Some(mesh.h),
        mesh_points: Some(mesh.num_points()),
        dof: Some(dofs.len()),
        domain: None,
    };
    Ok(ScalarEigenpairs { spectrum, modes })
}

/// Eigen solve with solver non-convergence reported as a solver failure.
pub(crate) fn solve(k: &SymSparse, m: &SymSparse, count: usize, tol: f64) -> Result<EigResult> {
    eig::solve_gevp(k, m, count, tol).map_err(|e| match e {
        Error::NoConvergence {
            best_residual,
            iterations,
        } => Error::SolverFailure(format!(
            "residual target {tol:e} unmet (best {best_residual:e} after {iterations} iterations)"
        )),
        other => other,
    })
}
