use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Reverse Cuthill-McKee ordering of the symmetric graph of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut nbrs = Vec::new();
    while order.len() < n {
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i])
            .unwrap();
        let start = peripheral(a, seed, &degree);
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(a.row(v).0.iter().copied().filter(|&w| !visited[w]));
            nbrs.sort_by_key(|&w| (degree[w], w));
            for &w in &nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Pseudo-peripheral node by repeated BFS from the deepest level.
fn peripheral(a: &CsrMatrix, seed: usize, degree: &[usize]) -> usize {
    let mut root = seed;
    let mut depth = 0;
    for _ in 0..8 {
        let (levels, last) = bfs_levels(a, root);
        let cand = last
            .into_iter()
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(root);
        if levels <= depth {
            break;
        }
        depth = levels;
        root = cand;
    }
    root
}

fn bfs_levels(a: &CsrMatrix, root: usize) -> (usize, Vec<usize>) {
    let n = a.nrows();
    let mut level = vec![usize::MAX; n];
    level[root] = 0;
    let mut frontier = vec![root];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in a.row(v).0 {
                if level[w] == usize::MAX {
                    level[w] = depth + 1;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

/// Skyline Cholesky factor L Lᵀ = P A Pᵀ of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    rowptr: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors with a fresh RCM ordering.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with(a, perm)
    }

    /// Factors with the given ordering (`perm[new] = old`). Only the lower
    /// triangle of the permuted matrix is read.
    pub fn factor_with(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(a.ncols(), n);
        assert_eq!(perm.len(), n);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &j in a.row(old).0 {
                let c = iperm[j];
                if c < first[new] {
                    first[new] = c;
                }
            }
        }
        let mut rowptr = Vec::with_capacity(n + 1);
        rowptr.push(0);
        for i in 0..n {
            rowptr.push(rowptr[i] + i - first[i] + 1);
        }
        let mut data = vec![0.0; rowptr[n]];
        for (new, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&j, &v) in cols.iter().zip(vals) {
                let c = iperm[j];
                if c <= new {
                    data[rowptr[new] + c - first[new]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let ri = rowptr[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let rj = rowptr[j];
                let li = &data[ri + k0 - fi..ri + j - fi];
                let lj = &data[rj + k0 - fj..rj + j - fj];
                let s: f64 = li.iter().zip(lj).map(|(x, y)| x * y).sum();
                let djj = data[rj + j - fj];
                data[ri + j - fi] = (data[ri + j - fi] - s) / djj;
            }
            let row = &data[ri..ri + i - fi];
            let s: f64 = row.iter().map(|x| x * x).sum();
            let d = data[ri + i - fi] - s;
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: perm[i], value: d });
            }
            data[ri + i - fi] = libm::sqrt(d);
        }
        Ok(Self { perm, first, rowptr, data })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn stored_entries(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        self.solve_into(b, &mut x, &mut Vec::new());
        x
    }

    /// Solves A x = b using `work` as scratch space.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64], work: &mut Vec<f64>) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        assert_eq!(x.len(), n);
        work.clear();
        work.extend(self.perm.iter().map(|&o| b[o]));
        let y = work.as_mut_slice();
        for i in 0..n {
            let fi = self.first[i];
            let ri = self.rowptr[i];
            let row = &self.data[ri..ri + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / self.data[ri + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let ri = self.rowptr[i];
            y[i] /= self.data[ri + i - fi];
            let yi = y[i];
            if yi != 0.0 {
                for (k, l) in (fi..i).zip(&self.data[ri..ri + i - fi]) {
                    y[k] -= l * yi;
                }
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_2d(m: usize) -> CsrMatrix {
        let idx = |i: usize, j: usize| j * m + i;
        let mut t = Vec::new();
        for j in 0..m {
            for i in 0..m {
                t.push((idx(i, j), idx(i, j), 4.0 + 0.01 * (i + j) as f64));
                if i > 0 {
                    t.push((idx(i, j), idx(i - 1, j), -1.0));
                    t.push((idx(i - 1, j), idx(i, j), -1.0));
                }
                if j > 0 {
                    t.push((idx(i, j), idx(i, j - 1), -1.0));
                    t.push((idx(i, j - 1), idx(i, j), -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(m * m, m * m, &t)
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_2d(7);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort();
        assert_eq!(p, (0..49).collect::<Vec<_>>());
    }

    #[test]
    fn matches_dense_solve() {
        let a = laplacian_2d(9);
        let f = EnvelopeCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..81).map(|i| libm::sin(i as f64)).collect();
        let x = f.solve(&b);
        let dense = a.to_dense().lu().solve(&nalgebra::DVector::from_column_slice(&b)).unwrap();
        for i in 0..81 {
            assert!((x[i] - dense[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(
            EnvelopeCholesky::factor(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
