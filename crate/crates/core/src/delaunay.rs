//! Quality improvement of an ear-clipped polygon triangulation: Lawson flips
//! to the constrained Delaunay triangulation, then circumcenter insertion
//! for triangles with small angles. Polygon edges are never split, so the
//! boundary keeps exactly the polygon vertices.

use std::collections::{HashMap, HashSet};

use crate::geometry::{cross, dot, norm, sub, Point};

/// Triangles with a smaller angle get a circumcenter inserted when possible.
pub(crate) const MIN_ANGLE_DEG: f64 = 25.0;

struct Triangulation {
    points: Vec<Point>,
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    /// Directed edge -> triangle holding it in CCW order.
    owner: HashMap<(usize, usize), usize>,
    /// Number of polygon vertices; polygon edges are `(i, i + 1 mod nb)`.
    nb: usize,
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

/// Positive when `d` lies strictly inside the circumcircle of CCW `(a, b, c)`,
/// beyond a relative rounding margin.
fn in_circle(a: Point, b: Point, c: Point, d: Point) -> bool {
    let rows = [sub(a, d), sub(b, d), sub(c, d)];
    let l = rows.map(|r| r[0] * r[0] + r[1] * r[1]);
    let det = rows[0][0] * (rows[1][1] * l[2] - l[1] * rows[2][1])
        - rows[0][1] * (rows[1][0] * l[2] - l[1] * rows[2][0])
        + l[0] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0]);
    let bound = (rows[0][0].abs() * (rows[1][1] * l[2]).abs() + (l[1] * rows[2][1]).abs())
        + rows[0][1].abs() * ((rows[1][0] * l[2]).abs() + (l[1] * rows[2][0]).abs())
        + l[0] * ((rows[1][0] * rows[2][1]).abs() + (rows[1][1] * rows[2][0]).abs());
    det > 1e-10 * bound
}

fn circumcenter(a: Point, b: Point, c: Point) -> Point {
    let (u, v) = (sub(b, a), sub(c, a));
    let d = 2.0 * cross(u, v);
    let (lu, lv) = (dot(u, u), dot(v, v));
    [
        a[0] + (v[1] * lu - u[1] * lv) / d,
        a[1] + (u[0] * lv - v[0] * lu) / d,
    ]
}

pub(crate) fn min_angle(a: Point, b: Point, c: Point) -> f64 {
    let angle = |p: Point, q: Point, r: Point| {
        let u = sub(q, p);
        let v = sub(r, p);
        cross(u, v).abs().atan2(dot(u, v))
    };
    angle(a, b, c).min(angle(b, c, a)).min(angle(c, a, b))
}

impl Triangulation {
    fn new(points: Vec<Point>, triangles: Vec<[usize; 3]>) -> Self {
        let nb = points.len();
        let mut t = Self {
            points,
            tris: Vec::new(),
            alive: Vec::new(),
            owner: HashMap::new(),
            nb,
        };
        for tri in triangles {
            t.add(tri);
        }
        t
    }

    fn add(&mut self, tri: [usize; 3]) -> usize {
        let id = self.tris.len();
        for e in 0..3 {
            self.owner.insert((tri[e], tri[(e + 1) % 3]), id);
        }
        self.tris.push(tri);
        self.alive.push(true);
        id
    }

    fn remove(&mut self, id: usize) {
        let tri = self.tris[id];
        for e in 0..3 {
            self.owner.remove(&(tri[e], tri[(e + 1) % 3]));
        }
        self.alive[id] = false;
    }

    fn is_polygon_edge(&self, u: usize, v: usize) -> bool {
        u < self.nb && v < self.nb && ((u + 1) % self.nb == v || (v + 1) % self.nb == u)
    }

    fn pts(&self, tri: [usize; 3]) -> [Point; 3] {
        [
            self.points[tri[0]],
            self.points[tri[1]],
            self.points[tri[2]],
        ]
    }

    /// Flips interior edges until every one is locally Delaunay.
    fn lawson(&mut self) {
        let limit = 50 * self.tris.len() + 100;
        let mut flips = 0;
        loop {
            let mut changed = false;
            for id in 0..self.tris.len() {
                if !self.alive[id] {
                    continue;
                }
                for e in 0..3 {
                    let tri = self.tris[id];
                    let (u, v, a) = (tri[e], tri[(e + 1) % 3], tri[(e + 2) % 3]);
                    if self.is_polygon_edge(u, v) {
                        continue;
                    }
                    let Some(&other) = self.owner.get(&(v, u)) else {
                        continue;
                    };
                    let ot = self.tris[other];
                    let b = ot.iter().copied().find(|&x| x != u && x != v).unwrap();
                    let [pu, pv, pa] = self.pts([u, v, a]);
                    let pb = self.points[b];
                    if !in_circle(pu, pv, pa, pb) {
                        continue;
                    }
                    if orient(pu, pb, pa) <= 0.0 || orient(pv, pa, pb) <= 0.0 {
                        continue;
                    }
                    self.remove(id);
                    self.remove(other);
                    self.add([u, b, a]);
                    self.add([v, a, b]);
                    flips += 1;
                    changed = true;
                    break;
                }
                if flips > limit {
                    return;
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn locate(&self, p: Point) -> Option<usize> {
        (0..self.tris.len()).find(|&id| {
            if !self.alive[id] {
                return false;
            }
            let [a, b, c] = self.pts(self.tris[id]);
            let scale = norm(sub(b, a)).max(norm(sub(c, a)));
            let eps = -1e-12 * scale * scale;
            orient(a, b, p) >= eps && orient(b, c, p) >= eps && orient(c, a, p) >= eps
        })
    }

    fn encroaches_boundary(&self, p: Point) -> bool {
        (0..self.nb).any(|i| {
            let (a, b) = (self.points[i], self.points[(i + 1) % self.nb]);
            dot(sub(a, p), sub(b, p)) <= 0.0
        })
    }

    /// Bowyer-Watson insertion; returns false (and leaves the mesh intact)
    /// if the cavity cannot be re-triangulated cleanly.
    fn insert(&mut self, p: Point) -> bool {
        let Some(start) = self.locate(p) else {
            return false;
        };
        let mut cavity = vec![start];
        let mut seen: HashSet<usize> = HashSet::from([start]);
        let mut i = 0;
        while i < cavity.len() {
            let tri = self.tris[cavity[i]];
            i += 1;
            for e in 0..3 {
                let (u, v) = (tri[e], tri[(e + 1) % 3]);
                if self.is_polygon_edge(u, v) {
                    continue;
                }
                let Some(&nb) = self.owner.get(&(v, u)) else {
                    continue;
                };
                if seen.contains(&nb) {
                    continue;
                }
                let [a, b, c] = self.pts(self.tris[nb]);
                if in_circle(a, b, c, p) {
                    seen.insert(nb);
                    cavity.push(nb);
                }
            }
        }
        // cavity boundary: directed edges whose twin is outside the cavity
        let mut rim = Vec::new();
        for &id in &cavity {
            let tri = self.tris[id];
            for e in 0..3 {
                let (u, v) = (tri[e], tri[(e + 1) % 3]);
                let inside = self.owner.get(&(v, u)).is_some_and(|t| seen.contains(t));
                if !inside {
                    rim.push((u, v));
                }
            }
        }
        let ok = rim.iter().all(|&(u, v)| {
            let (a, b) = (self.points[u], self.points[v]);
            let scale = dot(sub(b, a), sub(b, a));
            orient(a, b, p) > 1e-12 * scale
        });
        if !ok {
            return false;
        }
        let q = self.points.len();
        self.points.push(p);
        for &id in &cavity {
            self.remove(id);
        }
        for (u, v) in rim {
            self.add([u, v, q]);
        }
        true
    }

    fn refine(&mut self, max_points: usize) {
        let threshold = MIN_ANGLE_DEG.to_radians();
        let mut rejected: HashSet<[usize; 3]> = HashSet::new();
        while self.points.len() < max_points {
            let mut worst: Option<(usize, f64)> = None;
            for id in 0..self.tris.len() {
                if !self.alive[id] {
                    continue;
                }
                let mut key = self.tris[id];
                key.sort_unstable();
                if rejected.contains(&key) {
                    continue;
                }
                let [a, b, c] = self.pts(self.tris[id]);
                let q = min_angle(a, b, c);
                if q < threshold && worst.map_or(true, |(_, w)| q < w) {
                    worst = Some((id, q));
                }
            }
            let Some((id, _)) = worst else { return };
            let [a, b, c] = self.pts(self.tris[id]);
            let center = circumcenter(a, b, c);
            let too_close = self
                .points
                .iter()
                .any(|&p| norm(sub(p, center)) <= 1e-9 * norm(sub(b, a)));
            if too_close || self.encroaches_boundary(center) || !self.insert(center) {
                let mut key = self.tris[id];
                key.sort_unstable();
                rejected.insert(key);
            }
        }
    }

    fn into_parts(self) -> (Vec<Point>, Vec<[usize; 3]>) {
        let tris = self
            .tris
            .iter()
            .zip(&self.alive)
            .filter_map(|(&t, &a)| a.then_some(t))
            .collect();
        (self.points, tris)
    }
}

/// Returns improved points (polygon vertices first, unchanged) and triangles.
pub(crate) fn improve(
    points: Vec<Point>,
    triangles: Vec<[usize; 3]>,
) -> (Vec<Point>, Vec<[usize; 3]>) {
    let nb = points.len();
    let mut t = Triangulation::new(points, triangles);
    t.lawson();
    t.refine(40 * nb + 400);
    t.lawson();
    t.into_parts()
}
