//! Compressed symmetric matrices and an envelope (skyline) Cholesky
//! factorization under reverse Cuthill–McKee ordering.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Symmetric sparse matrix, both triangles stored in CSR layout with sorted
/// column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymForm {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymForm {
    /// Zero matrix with the given pattern. `rows[i]` lists the columns of row
    /// `i`; it must be symmetric and is sorted and deduplicated here.
    pub fn with_pattern(mut rows: Vec<Vec<usize>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            cols.extend_from_slice(row);
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        SparseSymForm {
            dim,
            row_ptr,
            cols,
            values: vec![0.0; nnz],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.values[r])
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.cols[start..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry `(i, j)`; the entry must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside sparsity pattern"));
        self.values[k] += v;
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.dim)
            .map(|i| {
                let (cols, vals) = self.row(i);
                x[i] * cols.iter().zip(vals).map(|(&j, &a)| a * y[j]).sum::<f64>()
            })
            .sum()
    }

    /// Stored entries are exactly symmetric.
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .all(|(&j, &a)| self.slot(j, i).is_some_and(|k| self.values[k] == a))
        })
    }

    /// Reverse Cuthill–McKee permutation (`perm[new] = old`) of the pattern.
    pub fn rcm_ordering(&self) -> Vec<usize> {
        let n = self.dim;
        let degree: Vec<usize> = (0..n).map(|i| self.row_ptr[i + 1] - self.row_ptr[i]).collect();
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let seed = (0..n)
                .filter(|&i| !visited[i])
                .min_by_key(|&i| (degree[i], i))
                .expect("unvisited node");
            let start = self.pseudo_peripheral(seed, &degree);
            let mut queue = VecDeque::from([start]);
            visited[start] = true;
            while let Some(v) = queue.pop_front() {
                order.push(v);
                let (cols, _) = self.row(v);
                let mut next: Vec<usize> = cols.iter().copied().filter(|&w| !visited[w]).collect();
                next.sort_by_key(|&w| (degree[w], w));
                for w in next {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
        order.reverse();
        order
    }

    fn bfs_levels(&self, start: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.dim];
        level[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in self.row(v).0 {
                if level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        level
    }

    fn pseudo_peripheral(&self, seed: usize, degree: &[usize]) -> usize {
        let mut start = seed;
        let mut depth = 0;
        for _ in 0..8 {
            let level = self.bfs_levels(start);
            let far = level.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
            if far <= depth {
                break;
            }
            depth = far;
            start = (0..self.dim)
                .filter(|&i| level[i] == far)
                .min_by_key(|&i| (degree[i], i))
                .unwrap_or(start);
        }
        start
    }
}

/// Envelope Cholesky factor `P A P^T = L L^T`.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    perm: Vec<usize>,
    /// First stored column of each (permuted) row.
    first: Vec<usize>,
    /// Offset of row `i`'s envelope in `data`; the row holds columns
    /// `first[i]..=i`.
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(a: &SparseSymForm) -> Result<Self> {
        let n = a.dim();
        let perm = a.rcm_ordering();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &j in a.row(old).0 {
                first[new] = first[new].min(inv[j]);
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; offset[n]];
        for (new, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&j, &v) in cols.iter().zip(vals) {
                let jn = inv[j];
                if jn <= new {
                    data[offset[new] + jn - first[new]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let row_i = offset[i];
            for j in fi..i {
                let fj = first[j];
                let start = fi.max(fj);
                let row_j = offset[j];
                let dot: f64 = data[row_i + start - fi..row_i + j - fi]
                    .iter()
                    .zip(&data[row_j + start - fj..row_j + j - fj])
                    .map(|(x, y)| x * y)
                    .sum();
                let diag_j = data[row_j + j - fj];
                let idx = row_i + j - fi;
                data[idx] = (data[idx] - dot) / diag_j;
            }
            let sq: f64 = data[row_i..row_i + i - fi].iter().map(|x| x * x).sum();
            let pivot = data[row_i + i - fi] - sq;
            if pivot <= 0.0 || !pivot.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    row: perm[i],
                    pivot,
                });
            }
            data[row_i + i - fi] = pivot.sqrt();
        }
        Ok(SkylineCholesky {
            perm,
            first,
            offset,
            data,
        })
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (l, v) in row[..i - fi].iter().zip(&mut y[fi..i]) {
                *v -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 2D five-point Laplacian plus a diagonal shift on an `m x m` grid.
    fn grid_laplacian(m: usize) -> SparseSymForm {
        let id = |i: usize, j: usize| i * m + j;
        let mut rows = vec![Vec::new(); m * m];
        for i in 0..m {
            for j in 0..m {
                let r = id(i, j);
                rows[r].push(r);
                if i + 1 < m {
                    rows[r].push(id(i + 1, j));
                    rows[id(i + 1, j)].push(r);
                }
                if j + 1 < m {
                    rows[r].push(id(i, j + 1));
                    rows[id(i, j + 1)].push(r);
                }
            }
        }
        let mut a = SparseSymForm::with_pattern(rows);
        for i in 0..m * m {
            let cols: Vec<usize> = a.row(i).0.to_vec();
            for j in cols {
                a.add(i, j, if i == j { 4.1 } else { -1.0 });
            }
        }
        a
    }

    #[test]
    fn cholesky_solves_against_matvec() {
        let a = grid_laplacian(17);
        assert!(a.is_symmetric());
        let chol = SkylineCholesky::factor(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..a.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.apply(&x);
        let got = chol.solve(&b);
        let err = got.iter().zip(&x).map(|(g, e)| (g - e).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "err {err}");
    }

    #[test]
    fn rcm_is_a_permutation_with_small_envelope() {
        let a = grid_laplacian(20);
        let mut p = a.rcm_ordering();
        p.sort_unstable();
        assert!(p.iter().enumerate().all(|(i, &v)| i == v));
        let chol = SkylineCholesky::factor(&a).unwrap();
        // natural ordering has envelope ~ m * m^2; RCM should not be worse
        assert!(chol.envelope_size() <= 20 * 20 * 21);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut a = SparseSymForm::with_pattern(vec![vec![0, 1], vec![0, 1]]);
        a.add(0, 0, 1.0);
        a.add(0, 1, 2.0);
        a.add(1, 0, 2.0);
        a.add(1, 1, 1.0);
        assert!(matches!(
            SkylineCholesky::factor(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
