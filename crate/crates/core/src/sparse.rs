//! Symmetric sparse matrices stored as the upper triangle in CSR form.

use nalgebra::DMatrix;

/// Symmetric sparse matrix; only entries with `row <= col` are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SymSparse {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates `(row, col, value)` contributions; duplicates are summed.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self {
            n,
            entries: Vec::with_capacity(cap),
        }
    }

    /// Adds `v` to the symmetric pair `A[i][j] = A[j][i]` (counted once).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((r, c, v));
    }

    pub fn build(mut self) -> SymSparse {
        self.entries
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.n {
            row_ptr[r + 1] += row_ptr[r];
        }
        SymSparse {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl SymSparse {
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            for j in i..n {
                if a[(i, j)] != 0.0 {
                    b.add(i, j, a[(i, j)]);
                }
            }
        }
        b.build()
    }

    pub fn identity(n: usize) -> Self {
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 1.0);
        }
        b.build()
    }

    pub fn diagonal_matrix(d: &[f64]) -> Self {
        let mut b = TripletBuilder::new(d.len());
        for (i, &v) in d.iter().enumerate() {
            b.add(i, i, v);
        }
        b.build()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored (upper-triangle) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries `(row, col, value)` with `row <= col`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |p| (r, self.col_idx[p], self.values[p]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        match cols.binary_search(&c) {
            Ok(p) => self.values[self.row_ptr[r] + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..self.n {
            let xr = x[r];
            let mut acc = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[p];
                let v = self.values[p];
                acc += v * x[c];
                if c != r {
                    y[c] += v * xr;
                }
            }
            y[r] += acc;
        }
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (r, c, v) in self.entries() {
            a[(r, c)] = v;
            a[(c, r)] = v;
        }
        a
    }

    /// Principal submatrix on the (ascending) index list `keep`.
    pub fn principal_submatrix(&self, keep: &[usize]) -> SymSparse {
        let mut new_index = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let mut b = TripletBuilder::with_capacity(keep.len(), self.nnz());
        for (r, c, v) in self.entries() {
            let (nr, nc) = (new_index[r], new_index[c]);
            if nr != usize::MAX && nc != usize::MAX {
                b.add(nr, nc, v);
            }
        }
        b.build()
    }

    /// Symmetric permutation `P A P^T`, where row `i` of the result is row `perm[i]` of `A`.
    pub fn permuted(&self, perm: &[usize]) -> SymSparse {
        let mut inverse = vec![0usize; self.n];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz());
        for (r, c, v) in self.entries() {
            b.add(inverse[r], inverse[c], v);
        }
        b.build()
    }

    /// Congruence `P^T A P` for a sparse `P` given row by row: `rows[i]` lists
    /// `(reduced_index, coefficient)` pairs of row `i` of `P`.
    pub fn congruence(&self, rows: &[Vec<(usize, f64)>], reduced_dim: usize) -> SymSparse {
        assert_eq!(rows.len(), self.n);
        let mut b = TripletBuilder::with_capacity(reduced_dim, 2 * self.nnz());
        for (r, c, v) in self.entries() {
            for &(a, ca) in &rows[r] {
                for &(bb, cb) in &rows[c] {
                    if r == c {
                        // the ordered pairs (a,bb) and (bb,a) form one symmetric entry
                        if a <= bb {
                            b.add(a, bb, ca * cb * v);
                        }
                    } else if a == bb {
                        b.add(a, a, 2.0 * ca * cb * v);
                    } else {
                        b.add(a, bb, ca * cb * v);
                    }
                }
            }
        }
        b.build()
    }

    /// Largest absolute row sum; zero when constants lie in the kernel.
    pub fn max_abs_row_sum(&self) -> f64 {
        let ones = vec![1.0; self.n];
        self.matvec(&ones)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &SymSparse) -> SymSparse {
        assert_eq!(self.n, other.n);
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz() + other.nnz());
        for (r, c, v) in self.entries() {
            b.add(r, c, v);
        }
        for (r, c, v) in other.entries() {
            b.add(r, c, s * v);
        }
        b.build()
    }

    /// Column indices of all neighbors (both triangles) of each row, excluding the diagonal.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (r, c, _) in self.entries() {
            if r != c {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
        adj
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
