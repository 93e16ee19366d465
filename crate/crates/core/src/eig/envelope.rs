//! Reverse Cuthill-McKee ordering and envelope (profile) Cholesky.

use std::collections::VecDeque;

use crate::sparse::SymSparse;

/// Reverse Cuthill-McKee permutation (`perm[new] = old`) of a symmetric graph.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let seed = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("unvisited vertex remains");
        let start = pseudo_peripheral(adj, &degree, seed);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_unstable_by_key(|&u| (degree[u], u));
            next.dedup();
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut levels = vec![vec![start]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut node = seed;
    let mut ecc = bfs_levels(adj, node).len();
    for _ in 0..8 {
        let levels = bfs_levels(adj, node);
        let candidate = *levels
            .last()
            .unwrap()
            .iter()
            .min_by_key(|&&u| (degree[u], u))
            .unwrap();
        let cand_ecc = bfs_levels(adj, candidate).len();
        if cand_ecc <= ecc {
            break;
        }
        node = candidate;
        ecc = cand_ecc;
    }
    node
}

/// Lower-triangular Cholesky factor of `P A P^T` stored row by row over the envelope.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

/// Pivot failure: index (original numbering) and the non-positive pivot value.
#[derive(Clone, Copy, Debug)]
pub struct PivotFailure {
    pub pivot: usize,
    pub value: f64,
}

impl EnvelopeCholesky {
    pub fn factor(a: &SymSparse) -> Result<Self, PivotFailure> {
        let perm = reverse_cuthill_mckee(&a.adjacency());
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &SymSparse, perm: Vec<usize>) -> Result<Self, PivotFailure> {
        let n = a.dim();
        let pa = a.permuted(&perm);
        let mut first: Vec<usize> = (0..n).collect();
        for (r, c, _) in pa.entries() {
            // stored r <= c: entry lies in row c, column r of the lower triangle
            first[c] = first[c].min(r);
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for (r, c, v) in pa.entries() {
            data[start[c] + (r - first[c])] = v;
        }
        for i in 0..n {
            let fi = first[i];
            let row_i = start[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let li = &data[row_i + (lo - fi)..row_i + (j - fi)];
                let lj = &data[start[j] + (lo - fj)..start[j] + (j - fj)];
                let s: f64 = li.iter().zip(lj).map(|(x, y)| x * y).sum();
                let diag_j = data[start[j + 1] - 1];
                let idx = row_i + (j - fi);
                data[idx] = (data[idx] - s) / diag_j;
            }
            let li = &data[row_i..row_i + (i - fi)];
            let s: f64 = li.iter().map(|x| x * x).sum();
            let idx = start[i + 1] - 1;
            let d = data[idx] - s;
            if !(d > 0.0) || !d.is_finite() {
                return Err(PivotFailure {
                    pivot: perm[i],
                    value: d,
                });
            }
            data[idx] = d.sqrt();
        }
        Ok(Self {
            perm,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi]
                .iter()
                .zip(&y[fi..i])
                .map(|(l, x)| l * x)
                .sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (k, l) in (fi..i).zip(&row[..i - fi]) {
                y[k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}
