//! P1 vector fields with zero normal trace and the div-curl form
//! `a[u, v] = int div u div v + rot u rot v`.
//!
//! Full vectors interleave components: entry `2 * v + c` is component `c`
//! at vertex `v`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem_scalar::{assemble_scalar, p1_gradients, solve, triangle_points};
use crate::geometry::{Point, TriMesh};
use crate::sparse::{SymSparse, TripletBuilder};
use crate::spectrum::{cluster_indices, BcLabel, Spectrum, MULTIPLICITY_TOL};

/// Energy fraction below which a field counts as pure gradient or pure rotated gradient.
pub const CLASSIFICATION_THRESHOLD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VertexRule {
    Free,
    /// Only the component along the unit tangent survives.
    Tangential {
        tangent: Point,
    },
    Pinned,
}

/// Map from reduced coordinates to full interleaved vector coordinates.
#[derive(Clone, Debug)]
pub struct TangentialConstraintSet {
    pub rules: Vec<VertexRule>,
    /// First reduced index owned by each vertex.
    offsets: Vec<usize>,
    reduced_dim: usize,
}

impl TangentialConstraintSet {
    pub fn new(mesh: &TriMesh) -> Self {
        let edges = mesh.boundary_vertex_edges();
        let mut rules = vec![VertexRule::Free; mesh.num_points()];
        for (&v, &(ein, eout)) in &edges {
            rules[v] = if mesh.is_corner[v] {
                VertexRule::Pinned
            } else {
                let a = mesh.boundary_edges[ein].normal;
                let b = mesh.boundary_edges[eout].normal;
                let s = [a[0] + b[0], a[1] + b[1]];
                let len = s[0].hypot(s[1]);
                let nu = [s[0] / len, s[1] / len];
                VertexRule::Tangential {
                    tangent: [-nu[1], nu[0]],
                }
            };
        }
        let mut offsets = Vec::with_capacity(rules.len());
        let mut next = 0;
        for r in &rules {
            offsets.push(next);
            next += match r {
                VertexRule::Free => 2,
                VertexRule::Tangential { .. } => 1,
                VertexRule::Pinned => 0,
            };
        }
        Self {
            rules,
            offsets,
            reduced_dim: next,
        }
    }

    pub fn reduced_dim(&self) -> usize {
        self.reduced_dim
    }

    pub fn full_dim(&self) -> usize {
        2 * self.rules.len()
    }

    /// Rows of the prolongation matrix `P` (full x reduced).
    pub fn prolongation_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = Vec::with_capacity(self.full_dim());
        for (r, &o) in self.rules.iter().zip(&self.offsets) {
            match *r {
                VertexRule::Free => {
                    rows.push(vec![(o, 1.0)]);
                    rows.push(vec![(o + 1, 1.0)]);
                }
                VertexRule::Tangential { tangent } => {
                    rows.push(vec![(o, tangent[0])]);
                    rows.push(vec![(o, tangent[1])]);
                }
                VertexRule::Pinned => {
                    rows.push(Vec::new());
                    rows.push(Vec::new());
                }
            }
        }
        rows
    }

    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.full_dim()];
        for (v, (r, &o)) in self.rules.iter().zip(&self.offsets).enumerate() {
            match *r {
                VertexRule::Free => {
                    full[2 * v] = reduced[o];
                    full[2 * v + 1] = reduced[o + 1];
                }
                VertexRule::Tangential { tangent } => {
                    full[2 * v] = tangent[0] * reduced[o];
                    full[2 * v + 1] = tangent[1] * reduced[o];
                }
                VertexRule::Pinned => {}
            }
        }
        full
    }

    /// Applies `P^T`; the inverse of [`expand`](Self::expand) on constrained fields.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        let mut reduced = vec![0.0; self.reduced_dim];
        for (v, (r, &o)) in self.rules.iter().zip(&self.offsets).enumerate() {
            match *r {
                VertexRule::Free => {
                    reduced[o] = full[2 * v];
                    reduced[o + 1] = full[2 * v + 1];
                }
                VertexRule::Tangential { tangent } => {
                    reduced[o] = tangent[0] * full[2 * v] + tangent[1] * full[2 * v + 1];
                }
                VertexRule::Pinned => {}
            }
        }
        reduced
    }

    /// Largest violation of the constraints by a full field.
    pub fn violation(&self, full: &[f64]) -> f64 {
        let back = self.expand(&self.restrict(full));
        back.iter()
            .zip(full)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Assembled div-curl form on the full and on the constrained space.
#[derive(Clone, Debug)]
pub struct VectorSystem {
    pub constraints: TangentialConstraintSet,
    /// `int div u div v` on the full space.
    pub div_full: SymSparse,
    /// `int rot u rot v` on the full space.
    pub curl_full: SymSparse,
    pub mass_full: SymSparse,
    pub form: SymSparse,
    pub mass: SymSparse,
}

impl VectorSystem {
    pub fn form_full(&self) -> SymSparse {
        self.div_full.add_scaled(1.0, &self.curl_full)
    }

    /// `(int |div u|^2, int |rot u|^2)` for a full field.
    pub fn energies(&self, full: &[f64]) -> (f64, f64) {
        (
            self.div_full.quad_form(full),
            self.curl_full.quad_form(full),
        )
    }
}

pub fn assemble_vector_form(mesh: &TriMesh) -> VectorSystem {
    let n = 2 * mesh.num_points();
    let cap = 21 * mesh.num_triangles();
    let mut div = TripletBuilder::with_capacity(n, cap);
    let mut curl = TripletBuilder::with_capacity(n, cap);
    for &tri in &mesh.triangles {
        let (g, area) = p1_gradients(triangle_points(mesh, tri));
        let mut idx = [0usize; 6];
        let mut d = [0.0; 6];
        let mut w = [0.0; 6];
        for a in 0..3 {
            idx[2 * a] = 2 * tri[a];
            idx[2 * a + 1] = 2 * tri[a] + 1;
            d[2 * a] = g[a][0];
            d[2 * a + 1] = g[a][1];
            w[2 * a] = -g[a][1];
            w[2 * a + 1] = g[a][0];
        }
        for a in 0..6 {
            for b in a..6 {
                div.add(idx[a], idx[b], area * d[a] * d[b]);
                curl.add(idx[a], idx[b], area * w[a] * w[b]);
            }
        }
    }
    let (_, scalar_mass) = assemble_scalar(mesh);
    let mut mass = TripletBuilder::with_capacity(n, 2 * scalar_mass.nnz());
    for (i, j, v) in scalar_mass.entries() {
        mass.add(2 * i, 2 * j, v);
        mass.add(2 * i + 1, 2 * j + 1, v);
    }
    let div_full = div.build();
    let curl_full = curl.build();
    let mass_full = mass.build();
    let constraints = TangentialConstraintSet::new(mesh);
    let rows = constraints.prolongation_rows();
    let r = constraints.reduced_dim();
    let form = div_full.add_scaled(1.0, &curl_full).congruence(&rows, r);
    let mass = mass_full.congruence(&rows, r);
    VectorSystem {
        constraints,
        div_full,
        curl_full,
        mass_full,
        form,
        mass,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldClass {
    GradientType,
    PerpGradientType,
    Mixed,
}

impl FieldClass {
    /// Scalar problem whose spectrum this class belongs to.
    pub fn source(self) -> Option<BcLabel> {
        match self {
            FieldClass::GradientType => Some(BcLabel::Neumann),
            FieldClass::PerpGradientType => Some(BcLabel::Dirichlet),
            FieldClass::Mixed => None,
        }
    }
}

pub fn classify_energies(div_energy: f64, curl_energy: f64) -> FieldClass {
    let total = div_energy + curl_energy;
    if curl_energy <= CLASSIFICATION_THRESHOLD * total {
        FieldClass::GradientType
    } else if div_energy <= CLASSIFICATION_THRESHOLD * total {
        FieldClass::PerpGradientType
    } else {
        FieldClass::Mixed
    }
}

#[derive(Clone, Debug)]
pub struct VectorEigenfield {
    /// Coefficients on the reduced space.
    pub coefficients: Vec<f64>,
    /// Per-vertex vectors, interleaved.
    pub full: Vec<f64>,
    pub eigenvalue: f64,
    pub div_energy: f64,
    pub curl_energy: f64,
    /// `int |u|^2`.
    pub mass: f64,
    pub label: FieldClass,
}

#[derive(Serialize)]
struct EigenfieldExport {
    eigenvalue: f64,
    div_energy: f64,
    curl_energy: f64,
    label: FieldClass,
    vectors: Vec<[f64; 2]>,
}

impl VectorEigenfield {
    fn from_coefficients(system: &VectorSystem, coefficients: Vec<f64>, eigenvalue: f64) -> Self {
        let full = system.constraints.expand(&coefficients);
        let (div_energy, curl_energy) = system.energies(&full);
        let mass = system.mass_full.quad_form(&full);
        Self {
            coefficients,
            full,
            eigenvalue,
            div_energy,
            curl_energy,
            mass,
            label: classify_energies(div_energy, curl_energy),
        }
    }

    pub fn vectors(&self) -> Vec<[f64; 2]> {
        self.full.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(EigenfieldExport {
            eigenvalue: self.eigenvalue,
            div_energy: self.div_energy,
            curl_energy: self.curl_energy,
            label: self.label,
            vectors: self.vectors(),
        })
        .expect("eigenfield export is plain data")
    }
}

pub fn classify_eigenfield(field: &VectorEigenfield) -> FieldClass {
    classify_energies(field.div_energy, field.curl_energy)
}

/// Rotates an M-orthonormal set of eigenfields sharing (nearly) one
/// eigenvalue so that the rot energy is diagonal, then classifies each.
/// Inside a degenerate eigenspace the solver basis is arbitrary; this picks
/// the basis aligned with the gradient / rotated-gradient split.
pub fn classify_cluster(
    system: &VectorSystem,
    fields: &[VectorEigenfield],
) -> Vec<VectorEigenfield> {
    let c = fields.len();
    if c <= 1 {
        return fields.to_vec();
    }
    let curl: Vec<Vec<f64>> = fields
        .iter()
        .map(|f| system.curl_full.matvec(&f.full))
        .collect();
    let mut gram = DMatrix::zeros(c, c);
    for i in 0..c {
        for j in 0..c {
            gram[(i, j)] = crate::sparse::dot(&fields[i].full, &curl[j]);
        }
    }
    let gram = 0.5 * (&gram + gram.transpose());
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .map(|col| {
            let q = eig.eigenvectors.column(col);
            let mut coeffs = vec![0.0; fields[0].coefficients.len()];
            for (f, &w) in fields.iter().zip(q.iter()) {
                coeffs
                    .iter_mut()
                    .zip(&f.coefficients)
                    .for_each(|(a, b)| *a += w * b);
            }
            let rq = system.form.quad_form(&coeffs) / system.mass.quad_form(&coeffs);
            VectorEigenfield::from_coefficients(system, coeffs, rq)
        })
        .collect()
}

/// Smallest eigenvalues of the discrete operator with their eigenfields,
/// classified cluster by cluster. Inside a cluster the fields are rotated,
/// so each carries its own Rayleigh quotient as eigenvalue.
pub fn vector_spectrum(
    mesh: &TriMesh,
    count: usize,
    tol: f64,
) -> Result<(Spectrum, Vec<VectorEigenfield>)> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    if let Some(&(vertex, angle)) = mesh.reentrant_corners().first() {
        return Err(Error::NonConvexCorner {
            vertex,
            angle_deg: angle.to_degrees(),
        });
    }
    let system = assemble_vector_form(mesh);
    let dim = system.constraints.reduced_dim();
    if count > dim {
        return Err(Error::NotEnoughDof {
            requested: count,
            available: dim,
        });
    }
    let result = solve(&system.form, &system.mass, count, tol)?;
    let raw: Vec<VectorEigenfield> = result
        .eigenvectors
        .iter()
        .zip(&result.eigenvalues)
        .map(|(x, &l)| VectorEigenfield::from_coefficients(&system, x.clone(), l))
        .collect();
    let mut fields = Vec::with_capacity(count);
    for group in cluster_indices(&result.eigenvalues, MULTIPLICITY_TOL) {
        let members: Vec<VectorEigenfield> = group.iter().map(|&i| raw[i].clone()).collect();
        fields.extend(classify_cluster(&system, &members));
    }
    let spectrum = Spectrum {
        values: result.eigenvalues,
        bc: BcLabel::VectorA,
        analytic: false,
        residuals: result.residuals,
        tol,
        mesh_h: Some(mesh.h),
        mesh_points: Some(mesh.num_points()),
        dof: Some(dim),
        domain: None,
    };
    Ok((spectrum, fields))
}

/// Normal component of the rotated gradient `(-d2 phi, d1 phi)` on every
/// boundary edge, taken on the triangle owning that edge.
pub fn perp_gradient_normal_trace(mesh: &TriMesh, phi: &[f64]) -> Vec<f64> {
    let mut owner = std::collections::HashMap::with_capacity(mesh.boundary_edges.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for e in 0..3 {
            owner.insert((tri[e], tri[(e + 1) % 3]), t);
        }
    }
    mesh.boundary_edges
        .iter()
        .map(|edge| {
            let t = owner[&(edge.a, edge.b)];
            let tri = mesh.triangles[t];
            let (g, _) = p1_gradients(triangle_points(mesh, tri));
            let mut grad = [0.0; 2];
            for a in 0..3 {
                grad[0] += phi[tri[a]] * g[a][0];
                grad[1] += phi[tri[a]] * g[a][1];
            }
            let perp = [-grad[1], grad[0]];
            perp[0] * edge.normal[0] + perp[1] * edge.normal[1]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem_scalar::DEFAULT_TOL;
    use crate::geometry::{l_shape, regular_polygon, square, triangulate};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn interpolate(mesh: &TriMesh, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        mesh.points.iter().flat_map(|&p| f(p)).collect()
    }

    #[test]
    fn constant_field_has_zero_energy() {
        let mesh = triangulate(&square(PI).unwrap(), 3).unwrap();
        let sys = assemble_vector_form(&mesh);
        let u = interpolate(&mesh, |_| [1.0, 0.0]);
        assert!(sys.form_full().quad_form(&u).abs() <= 1e-12);
    }

    #[test]
    fn linear_fields_split_into_div_and_rot() {
        for poly in [
            square(PI).unwrap(),
            regular_polygon(7, 1.0).unwrap(),
            l_shape(),
        ] {
            let mesh = triangulate(&poly, 2).unwrap();
            let sys = assemble_vector_form(&mesh);
            let area = poly.area();
            let (d, c) = sys.energies(&interpolate(&mesh, |p| p));
            assert_relative_eq!(d, 4.0 * area, max_relative = 1e-12);
            assert!(c.abs() <= 1e-12 * area);
            let (d, c) = sys.energies(&interpolate(&mesh, |p| [-p[1], p[0]]));
            assert!(d.abs() <= 1e-12 * area);
            assert_relative_eq!(c, 4.0 * area, max_relative = 1e-12);
        }
    }

    #[test]
    fn dof_counts_follow_vertex_rules() {
        let mesh = triangulate(&square(1.0).unwrap(), 2).unwrap();
        let cs = TangentialConstraintSet::new(&mesh);
        let interior = mesh.interior_vertices().len();
        let boundary = mesh.boundary_edges.len();
        assert_eq!(cs.reduced_dim(), 2 * interior + boundary - 4);
        let reduced: Vec<f64> = (0..cs.reduced_dim()).map(|i| (i as f64).sin()).collect();
        let full = cs.expand(&reduced);
        assert_eq!(cs.restrict(&full), reduced);
        assert!(cs.violation(&full) <= 1e-15);
        // normal components vanish along the boundary
        for e in &mesh.boundary_edges {
            for v in [e.a, e.b] {
                let un = full[2 * v] * e.normal[0] + full[2 * v + 1] * e.normal[1];
                assert!(un.abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn null_lagrangian_identity_for_boundary_vanishing_fields() {
        let mesh = triangulate(&l_shape(), 3).unwrap();
        let sys = assemble_vector_form(&mesh);
        let (k, _) = assemble_scalar(&mesh);
        let bump = |p: Point, s: f64| {
            if p[0] * p[1] == 0.0 {
                0.0
            } else {
                (s * p[0] + p[1]).sin()
            }
        };
        let u1: Vec<f64> = mesh
            .points
            .iter()
            .enumerate()
            .map(|(v, &p)| {
                if mesh.is_boundary[v] {
                    0.0
                } else {
                    bump(p, 1.3)
                }
            })
            .collect();
        let u2: Vec<f64> = mesh
            .points
            .iter()
            .enumerate()
            .map(|(v, &p)| {
                if mesh.is_boundary[v] {
                    0.0
                } else {
                    bump(p, -0.7)
                }
            })
            .collect();
        let full: Vec<f64> = u1.iter().zip(&u2).flat_map(|(&a, &b)| [a, b]).collect();
        let lhs = sys.form_full().quad_form(&full);
        let rhs = k.quad_form(&u1) + k.quad_form(&u2);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }

    #[test]
    fn reentrant_corner_refused() {
        let mesh = triangulate(&l_shape(), 1).unwrap();
        assert!(matches!(
            vector_spectrum(&mesh, 2, DEFAULT_TOL),
            Err(Error::NonConvexCorner { .. })
        ));
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify_energies(1.0, 1.0), FieldClass::Mixed);
        assert_eq!(classify_energies(1.0, 0.05), FieldClass::GradientType);
        assert_eq!(classify_energies(0.05, 1.0), FieldClass::PerpGradientType);
    }

    #[test]
    fn square_spectrum_and_labels() {
        let mesh = triangulate(&square(PI).unwrap(), 5).unwrap();
        let (s, fields) = vector_spectrum(&mesh, 12, DEFAULT_TOL).unwrap();
        let want = [1.0, 1.0, 2.0, 2.0, 4.0, 4.0, 5.0, 5.0, 5.0, 5.0, 8.0, 8.0];
        for (got, w) in s.values.iter().zip(want) {
            assert!((got - w).abs() <= 0.03 * w, "{got} vs {w}");
        }
        assert!(s.values[0] > 0.5);
        for f in &fields {
            assert_relative_eq!(
                f.div_energy + f.curl_energy,
                f.eigenvalue * f.mass,
                max_relative = 1e-6
            );
        }
        assert_eq!(fields[0].label, FieldClass::GradientType);
        for pair in [&fields[2..4], &fields[10..12]] {
            let labels: Vec<FieldClass> = pair.iter().map(|f| f.label).collect();
            assert!(
                labels.contains(&FieldClass::GradientType)
                    && labels.contains(&FieldClass::PerpGradientType)
            );
        }
    }

    #[test]
    fn rotated_gradient_is_tangential() {
        let mesh = triangulate(&regular_polygon(6, 1.0).unwrap(), 2).unwrap();
        let phi: Vec<f64> = mesh
            .points
            .iter()
            .enumerate()
            .map(|(v, p)| {
                if mesh.is_boundary[v] {
                    0.0
                } else {
                    1.0 + p[0] * p[1]
                }
            })
            .collect();
        for t in perp_gradient_normal_trace(&mesh, &phi) {
            assert!(t.abs() <= 1e-12);
        }
    }
}
