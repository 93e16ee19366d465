//! Simple polygons and conforming triangle meshes.
//!
//! A [`Polygon`] is validated on construction (simple, no zero-length
//! edges) and stored counter-clockwise. [`triangulate`] clips ears greedily
//! by best minimum angle and then applies uniform 1-to-4 refinement, so the
//! resulting meshes are nested and fully deterministic.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Angle (radians) between adjacent boundary-edge normals above which a
/// boundary vertex counts as a corner.
pub const CORNER_TOLERANCE: f64 = 1e-6;

/// Laplacian smoothing passes applied to interior vertices of the base
/// triangulation.
pub const SMOOTHING_ITERATIONS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

#[derive(Deserialize)]
struct PolygonFile {
    vertices: Vec<Point>,
}

impl Polygon {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace area (positive, the polygon is stored CCW).
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Interior angle at each vertex, in radians.
    pub fn interior_angles(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let p = self.vertices[(i + n - 1) % n];
                let c = self.vertices[i];
                let q = self.vertices[(i + 1) % n];
                let d_in = sub(c, p);
                let d_out = sub(q, c);
                // turning angle is positive for a left (convex) turn
                let turn = cross(d_in, d_out).atan2(dot(d_in, d_out));
                std::f64::consts::PI - turn
            })
            .collect()
    }

    /// True if every interior angle is below pi (up to the corner tolerance).
    pub fn is_convex(&self) -> bool {
        self.interior_angles()
            .iter()
            .all(|&a| a < std::f64::consts::PI + CORNER_TOLERANCE)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: PolygonFile = serde_json::from_str(s)?;
        make_polygon(&file.vertices)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Validates a vertex loop and returns it as a CCW polygon.
pub fn make_polygon(points: &[Point]) -> Result<Polygon> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    for (i, p) in points.iter().enumerate() {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(Error::InvalidArgument(format!("vertex {i} is not finite")));
        }
    }
    for i in 0..n {
        let j = (i + 1) % n;
        if points[i] == points[j] {
            return Err(Error::DegenerateEdge(i, j));
        }
    }
    check_simple(points)?;
    let area = signed_area(points);
    if area == 0.0 {
        return Err(Error::ZeroArea);
    }
    let mut vertices = points.to_vec();
    if area < 0.0 {
        vertices.reverse();
    }
    Ok(Polygon { vertices })
}

/// Regular n-gon inscribed in the circle of the given radius about the origin.
pub fn regular_polygon(n: usize, radius: f64) -> Result<Polygon> {
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let points: Vec<Point> = (0..n)
        .map(|i| {
            let t = step * i as f64;
            [radius * t.cos(), radius * t.sin()]
        })
        .collect();
    make_polygon(&points)
}

/// Axis-aligned square `(0, side)^2`.
pub fn square(side: f64) -> Result<Polygon> {
    make_polygon(&[[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]])
}

/// The six-vertex L obtained by removing the top-right unit square from `(0,2)^2`.
pub fn l_shape() -> Polygon {
    make_polygon(&[
        [0.0, 0.0],
        [2.0, 0.0],
        [2.0, 1.0],
        [1.0, 1.0],
        [1.0, 2.0],
        [0.0, 2.0],
    ])
    .expect("fixed L-shape is valid")
}

fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s
}

fn check_simple(points: &[Point]) -> Result<()> {
    let n = points.len();
    for i in 0..n {
        let a0 = points[i];
        let a1 = points[(i + 1) % n];
        for j in (i + 1)..n {
            let b0 = points[j];
            let b1 = points[(j + 1) % n];
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // shared endpoint; only a fold-back onto the other edge is bad
                let (shared, other_a, other_b) = if j == i + 1 {
                    (a1, a0, b1)
                } else {
                    (a0, a1, b0)
                };
                let u = sub(other_a, shared);
                let v = sub(other_b, shared);
                let scale = norm(u) * norm(v);
                if cross(u, v).abs() <= 1e-14 * scale && dot(u, v) > 0.0 {
                    return Err(Error::SelfIntersecting(i, j));
                }
            } else if segments_intersect(a0, a1, b0, b1) {
                return Err(Error::SelfIntersecting(i, j));
            }
        }
    }
    Ok(())
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

/// Oriented boundary edge `a -> b` (the domain lies to the left).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    /// Outward unit normal.
    pub normal: Point,
    /// Unit tangent `(-normal[1], normal[0])`.
    pub tangent: Point,
}

impl BoundaryEdge {
    fn new(a: usize, b: usize, normal: Point) -> Self {
        Self {
            a,
            b,
            normal,
            tangent: [-normal[1], normal[0]],
        }
    }
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    pub points: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary cycle in CCW order.
    pub boundary_edges: Vec<BoundaryEdge>,
    pub is_boundary: Vec<bool>,
    pub is_corner: Vec<bool>,
    pub corner_vertices: Vec<usize>,
    /// Maximum edge length.
    pub h: f64,
    /// Number of refinement levels applied to the base triangulation.
    pub level: usize,
}

#[derive(Serialize)]
struct MeshExport<'a> {
    points: &'a [Point],
    triangles: &'a [[usize; 3]],
    boundary_edges: Vec<[usize; 2]>,
}

impl TriMesh {
    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [i, j, k] = self.triangles[t];
        0.5 * orient(self.points[i], self.points[j], self.points[k])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn num_edges(&self) -> usize {
        let mut edges = std::collections::HashSet::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (u, v) = (tri[e], tri[(e + 1) % 3]);
                edges.insert((u.min(v), u.max(v)));
            }
        }
        edges.len()
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&v| !self.is_boundary[v])
            .collect()
    }

    /// For every boundary vertex, the indices of its incoming and outgoing
    /// boundary edges.
    pub fn boundary_vertex_edges(&self) -> HashMap<usize, (usize, usize)> {
        let mut incoming = HashMap::new();
        let mut outgoing = HashMap::new();
        for (e, edge) in self.boundary_edges.iter().enumerate() {
            outgoing.insert(edge.a, e);
            incoming.insert(edge.b, e);
        }
        outgoing
            .into_iter()
            .map(|(v, out)| (v, (incoming[&v], out)))
            .collect()
    }

    /// Corner vertices whose interior angle exceeds pi, with that angle in radians.
    pub fn reentrant_corners(&self) -> Vec<(usize, f64)> {
        let adjacency = self.boundary_vertex_edges();
        let mut out: Vec<(usize, f64)> = self
            .corner_vertices
            .iter()
            .filter_map(|&v| {
                let (ein, eout) = adjacency[&v];
                let d_in = self.boundary_edges[ein].tangent;
                let d_out = self.boundary_edges[eout].tangent;
                let turn = cross(d_in, d_out).atan2(dot(d_in, d_out));
                let interior = std::f64::consts::PI - turn;
                (interior > std::f64::consts::PI).then_some((v, interior))
            })
            .collect();
        out.sort_by_key(|&(v, _)| v);
        out
    }

    /// Checks the structural invariants; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for t in 0..self.triangles.len() {
            let a = self.triangle_area(t);
            if !(a > 0.0) {
                return Err(format!("triangle {t} has non-positive area {a}"));
            }
        }
        let euler =
            self.points.len() as i64 - self.num_edges() as i64 + self.triangles.len() as i64;
        if euler != 1 {
            return Err(format!("Euler characteristic {euler} != 1"));
        }
        // single closed cycle
        let nb = self.boundary_edges.len();
        for e in 0..nb {
            let next = &self.boundary_edges[(e + 1) % nb];
            if self.boundary_edges[e].b != next.a {
                return Err(format!(
                    "boundary edge {e} does not chain into edge {}",
                    (e + 1) % nb
                ));
            }
        }
        let mut seen = vec![false; self.points.len()];
        for edge in &self.boundary_edges {
            if std::mem::replace(&mut seen[edge.a], true) {
                return Err(format!("boundary vertex {} visited twice", edge.a));
            }
        }
        if seen != self.is_boundary {
            return Err("boundary flags disagree with boundary cycle".into());
        }
        // each boundary edge in exactly one triangle, with matching orientation
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                *directed.entry((tri[e], tri[(e + 1) % 3])).or_default() += 1;
            }
        }
        for (e, edge) in self.boundary_edges.iter().enumerate() {
            let fwd = directed.get(&(edge.a, edge.b)).copied().unwrap_or(0);
            let bwd = directed.get(&(edge.b, edge.a)).copied().unwrap_or(0);
            if fwd != 1 || bwd != 0 {
                return Err(format!(
                    "boundary edge {e} belongs to {} triangles",
                    fwd + bwd
                ));
            }
            if (norm(edge.normal) - 1.0).abs() > 1e-12 {
                return Err(format!("boundary edge {e} normal is not unit"));
            }
            if edge.tangent != [-edge.normal[1], edge.normal[0]] {
                return Err(format!(
                    "boundary edge {e} tangent is not the rotated normal"
                ));
            }
            let tri = self
                .triangles
                .iter()
                .find(|t| (0..3).any(|i| t[i] == edge.a && t[(i + 1) % 3] == edge.b))
                .expect("checked above");
            let centroid = [
                (self.points[tri[0]][0] + self.points[tri[1]][0] + self.points[tri[2]][0]) / 3.0,
                (self.points[tri[0]][1] + self.points[tri[1]][1] + self.points[tri[2]][1]) / 3.0,
            ];
            let pa = self.points[edge.a];
            let pb = self.points[edge.b];
            let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
            if dot(edge.normal, sub(centroid, mid)) >= 0.0 {
                return Err(format!("boundary edge {e} normal points inward"));
            }
        }
        Ok(())
    }

    /// Mesh export: points, triangles and boundary edges, 0-based.
    pub fn to_json(&self) -> Result<String> {
        let export = MeshExport {
            points: &self.points,
            triangles: &self.triangles,
            boundary_edges: self.boundary_edges.iter().map(|e| [e.a, e.b]).collect(),
        };
        Ok(serde_json::to_string(&export)?)
    }
}

/// Ear-clipping base triangulation, improved by Delaunay flips and
/// circumcenter insertion and then smoothed, followed by `levels` rounds of
/// uniform refinement.
pub fn triangulate(polygon: &Polygon, levels: usize) -> Result<TriMesh> {
    let mut mesh = base_mesh(polygon)?;
    laplacian_smooth(&mut mesh, SMOOTHING_ITERATIONS);
    for _ in 0..levels {
        mesh = refine(&mesh);
    }
    Ok(mesh)
}

fn base_mesh(polygon: &Polygon) -> Result<TriMesh> {
    let points = polygon.vertices().to_vec();
    let n = points.len();
    let triangles = ear_clip(&points)?;
    let (points, triangles) = crate::delaunay::improve(points, triangles);
    let mut is_boundary = vec![false; points.len()];
    is_boundary[..n].fill(true);
    let boundary_edges: Vec<BoundaryEdge> = (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            let d = sub(points[j], points[i]);
            let len = norm(d);
            BoundaryEdge::new(i, j, [d[1] / len, -d[0] / len])
        })
        .collect();
    let mut mesh = TriMesh {
        points,
        triangles,
        boundary_edges,
        is_boundary,
        is_corner: Vec::new(),
        corner_vertices: Vec::new(),
        h: 0.0,
        level: 0,
    };
    mesh.finish();
    Ok(mesh)
}

impl TriMesh {
    /// Recomputes the corner flags and the mesh size.
    fn finish(&mut self) {
        let nb = self.boundary_edges.len();
        self.is_corner = vec![false; self.points.len()];
        for e in 0..nb {
            let prev = &self.boundary_edges[(e + nb - 1) % nb];
            let cur = &self.boundary_edges[e];
            let angle = cross(prev.normal, cur.normal)
                .atan2(dot(prev.normal, cur.normal))
                .abs();
            if angle > CORNER_TOLERANCE {
                self.is_corner[cur.a] = true;
            }
        }
        self.corner_vertices = (0..self.points.len())
            .filter(|&v| self.is_corner[v])
            .collect();
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for e in 0..3 {
                h = h.max(norm(sub(
                    self.points[tri[(e + 1) % 3]],
                    self.points[tri[e]],
                )));
            }
        }
        self.h = h;
    }
}

fn ear_clip(points: &[Point]) -> Result<Vec<[usize; 3]>> {
    let mut ring: Vec<usize> = (0..points.len()).collect();
    let mut triangles = Vec::with_capacity(points.len() - 2);
    while ring.len() > 3 {
        let m = ring.len();
        let mut best: Option<(usize, f64)> = None;
        for p in 0..m {
            let (a, b, c) = (ring[(p + m - 1) % m], ring[p], ring[(p + 1) % m]);
            if !is_ear(points, &ring, a, b, c) {
                continue;
            }
            let q = min_angle(points[a], points[b], points[c]);
            if best.map_or(true, |(_, bq)| q > bq) {
                best = Some((p, q));
            }
        }
        let Some((p, _)) = best else {
            return Err(Error::EarClipFailure {
                vertex: ring[0],
                remaining: m,
            });
        };
        triangles.push([ring[(p + m - 1) % m], ring[p], ring[(p + 1) % m]]);
        ring.remove(p);
    }
    let [a, b, c] = [ring[0], ring[1], ring[2]];
    if orient(points[a], points[b], points[c]) <= 0.0 {
        return Err(Error::EarClipFailure {
            vertex: b,
            remaining: 3,
        });
    }
    triangles.push([a, b, c]);
    Ok(triangles)
}

fn is_ear(points: &[Point], ring: &[usize], a: usize, b: usize, c: usize) -> bool {
    let (pa, pb, pc) = (points[a], points[b], points[c]);
    let scale = norm(sub(pb, pa)) * norm(sub(pc, pb));
    if orient(pa, pb, pc) <= 1e-12 * scale {
        return false;
    }
    ring.iter().all(|&v| {
        if v == a || v == b || v == c {
            return true;
        }
        let p = points[v];
        if p == pa || p == pb || p == pc {
            return false;
        }
        // closed-triangle containment blocks the ear
        !(orient(pa, pb, p) >= 0.0 && orient(pb, pc, p) >= 0.0 && orient(pc, pa, p) >= 0.0)
    })
}

fn min_angle(a: Point, b: Point, c: Point) -> f64 {
    let angle = |p: Point, q: Point, r: Point| {
        let u = sub(q, p);
        let v = sub(r, p);
        cross(u, v).abs().atan2(dot(u, v))
    };
    angle(a, b, c).min(angle(b, c, a)).min(angle(c, a, b))
}

/// Jacobi-style Laplacian smoothing of interior vertices; boundary vertices stay fixed.
pub(crate) fn laplacian_smooth(mesh: &mut TriMesh, iterations: usize) {
    let n = mesh.points.len();
    if mesh.is_boundary.iter().all(|&b| b) {
        return;
    }
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for tri in &mesh.triangles {
        for e in 0..3 {
            let (u, v) = (tri[e], tri[(e + 1) % 3]);
            if !neighbors[u].contains(&v) {
                neighbors[u].push(v);
            }
            if !neighbors[v].contains(&u) {
                neighbors[v].push(u);
            }
        }
    }
    for _ in 0..iterations {
        let old = mesh.points.clone();
        for v in 0..n {
            if mesh.is_boundary[v] || neighbors[v].is_empty() {
                continue;
            }
            let k = neighbors[v].len() as f64;
            let (sx, sy) = neighbors[v]
                .iter()
                .fold((0.0, 0.0), |(sx, sy), &u| (sx + old[u][0], sy + old[u][1]));
            let candidate = [sx / k, sy / k];
            // keep the move only if no incident triangle flips
            mesh.points[v] = candidate;
            let flipped = mesh.triangles.iter().any(|tri| {
                tri.contains(&v)
                    && orient(
                        mesh.points[tri[0]],
                        mesh.points[tri[1]],
                        mesh.points[tri[2]],
                    ) <= 0.0
            });
            if flipped {
                mesh.points[v] = old[v];
            }
        }
    }
    mesh.finish();
}

/// One round of uniform 1-to-4 refinement by edge midpoints.
pub fn refine(mesh: &TriMesh) -> TriMesh {
    let mut points = mesh.points.clone();
    let mut is_boundary = mesh.is_boundary.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid =
        |u: usize, v: usize, points: &mut Vec<Point>, is_boundary: &mut Vec<bool>| -> usize {
            let key = (u.min(v), u.max(v));
            *midpoint.entry(key).or_insert_with(|| {
                let (p, q) = (points[u], points[v]);
                points.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                is_boundary.push(false);
                points.len() - 1
            })
        };
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for edge in &mesh.boundary_edges {
        let m = mid(edge.a, edge.b, &mut points, &mut is_boundary);
        is_boundary[m] = true;
        boundary_edges.push(BoundaryEdge::new(edge.a, m, edge.normal));
        boundary_edges.push(BoundaryEdge::new(m, edge.b, edge.normal));
    }
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = mid(a, b, &mut points, &mut is_boundary);
        let bc = mid(b, c, &mut points, &mut is_boundary);
        let ca = mid(c, a, &mut points, &mut is_boundary);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    let mut refined = TriMesh {
        points,
        triangles,
        boundary_edges,
        is_boundary,
        is_corner: Vec::new(),
        corner_vertices: Vec::new(),
        h: 0.0,
        level: mesh.level + 1,
    };
    refined.finish();
    refined
}
