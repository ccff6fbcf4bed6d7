//! Compressed sparse rows plus a banded LU used for every direct solve.
//!
//! Liouvillians of ladder systems have a pattern that reverse Cuthill-McKee
//! squeezes into a band of width O(dim), so a banded factorisation with
//! partial pivoting is both simple and fast enough for the sizes used here.

use crate::error::{Error, Result};
use crate::C64;
use nalgebra::DMatrix;
use std::collections::VecDeque;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<C64>,
}

impl Csr {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Csr { nrows, ncols, indptr: vec![0; nrows + 1], indices: vec![], data: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        Csr {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn diag(d: &[C64]) -> Self {
        Self::from_triplets(d.len(), d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Duplicates are summed, exact zeros dropped, columns sorted.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, trips: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); nrows];
        for (i, j, v) in trips {
            assert!(i < nrows && j < ncols, "triplet ({i},{j}) out of range");
            rows[i].push((j, v));
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < r.len() {
                let j = r[k].0;
                let mut acc = ZERO;
                while k < r.len() && r[k].0 == j {
                    acc += r[k].1;
                    k += 1;
                }
                if acc != ZERO {
                    indices.push(j);
                    data.push(acc);
                }
            }
            indptr.push(indices.len());
        }
        Csr { nrows, ncols, indptr, indices, data }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.indptr[i]..self.indptr[i + 1]).map(move |k| (i, self.indices[k], self.data[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let row = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.data[self.indptr[i] + k],
            Err(_) => ZERO,
        }
    }

    pub fn transpose(&self) -> Csr {
        Self::from_triplets(self.ncols, self.nrows, self.iter().map(|(i, j, v)| (j, i, v)))
    }

    pub fn conj(&self) -> Csr {
        let mut c = self.clone();
        c.data.iter_mut().for_each(|v| *v = v.conj());
        c
    }

    pub fn adjoint(&self) -> Csr {
        Self::from_triplets(self.ncols, self.nrows, self.iter().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Csr {
        let mut c = self.clone();
        c.data.iter_mut().for_each(|v| *v *= s);
        if s == ZERO {
            return Csr::zeros(self.nrows, self.ncols);
        }
        c
    }

    /// `self + s * other`
    pub fn add_scaled(&self, other: &Csr, s: C64) -> Csr {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.iter().chain(other.iter().map(|(i, j, v)| (i, j, v * s))),
        )
    }

    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.ncols, other.nrows);
        let mut t = Vec::new();
        let mut acc = vec![ZERO; other.ncols];
        let mut touched = Vec::new();
        let mut mark = vec![false; other.ncols];
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let a = self.data[k];
                let r = self.indices[k];
                for l in other.indptr[r]..other.indptr[r + 1] {
                    let j = other.indices[l];
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * other.data[l];
                }
            }
            for &j in &touched {
                t.push((i, j, acc[j]));
                acc[j] = ZERO;
                mark[j] = false;
            }
            touched.clear();
        }
        Self::from_triplets(self.nrows, other.ncols, t)
    }

    pub fn kron(&self, other: &Csr) -> Csr {
        let (p, q) = (other.nrows, other.ncols);
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.iter() {
            for (k, l, b) in other.iter() {
                t.push((i * p + k, j * q + l, a * b));
            }
        }
        Self::from_triplets(self.nrows * p, self.ncols * q, t)
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let mut s = ZERO;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            y[i] = s;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.data[self.indptr[i]..self.indptr[i + 1]].iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Replace row `k` by the unit row e_k.
    pub fn with_unit_row(&self, k: usize) -> Csr {
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.iter().filter(|&(i, _, _)| i != k).chain(std::iter::once((k, k, C64::new(1.0, 0.0)))),
        )
    }

    /// `self + s * I`, keeping every diagonal slot in the pattern even when it cancels.
    pub fn shifted(&self, s: C64) -> Csr {
        let mut out = self.add_scaled(&Csr::identity(self.nrows), s);
        // restore structural diagonal entries lost to exact cancellation
        let missing: Vec<usize> = (0..self.nrows).filter(|&i| out.get(i, i) == ZERO).collect();
        if !missing.is_empty() {
            let tiny = C64::new(f64::MIN_POSITIVE, 0.0);
            out = Self::from_triplets(
                self.nrows,
                self.ncols,
                out.iter().chain(missing.into_iter().map(|i| (i, i, tiny))),
            );
        }
        out
    }
}

/// Reverse Cuthill-McKee ordering of the symmetrised pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm(a: &Csr) -> Vec<usize> {
    let n = a.nrows;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.iter() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let deg: Vec<usize> = adj.iter().map(|l| l.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, visited: &[bool]| -> (usize, usize) {
        // returns (last node of last level with min degree, eccentricity)
        let mut dist = vec![usize::MAX; n];
        let mut q = VecDeque::new();
        dist[start] = 0;
        q.push_back(start);
        let mut last = start;
        let mut ecc = 0;
        while let Some(u) = q.pop_front() {
            if dist[u] > ecc || (dist[u] == ecc && deg[u] < deg[last]) {
                ecc = dist[u];
                last = u;
            }
            for &v in &adj[u] {
                if !visited[v] && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        (last, ecc)
    };

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| deg[i]);
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start node
        let mut start = seed;
        let (mut cand, mut ecc) = bfs_levels(start, &visited);
        for _ in 0..8 {
            let (c2, e2) = bfs_levels(cand, &visited);
            if e2 <= ecc {
                break;
            }
            start = cand;
            cand = c2;
            ecc = e2;
        }
        let _ = start;
        let root = cand;
        let mut q = VecDeque::new();
        visited[root] = true;
        q.push_back(root);
        while let Some(u) = q.pop_front() {
            order.push(u);
            let mut nb: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            nb.sort_by_key(|&v| deg[v]);
            for v in nb {
                visited[v] = true;
                q.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// LU factorisation with partial pivoting of a banded matrix.
///
/// Row `i` stores columns `i - kl ..= i + kl + ku`, which is exactly the
/// room row interchanges and fill need.
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    a: Vec<C64>,
    piv: Vec<usize>,
    /// perm[new] = old
    perm: Vec<usize>,
    near_zero_pivots: usize,
}

impl BandLu {
    /// Reorders `m` with RCM and factors it.
    pub fn factor(m: &Csr) -> Result<BandLu> {
        let perm = rcm(m);
        Self::factor_with_perm(m, perm)
    }

    pub fn factor_with_perm(m: &Csr, perm: Vec<usize>) -> Result<BandLu> {
        assert_eq!(m.nrows, m.ncols, "square matrix required");
        let n = m.nrows;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let (mut kl, mut ku) = (0usize, 0usize);
        for (i, j, _) in m.iter() {
            let (pi, pj) = (inv[i], inv[j]);
            if pi > pj {
                kl = kl.max(pi - pj);
            } else {
                ku = ku.max(pj - pi);
            }
        }
        let width = 2 * kl + ku + 1;
        let mut a = vec![ZERO; n * width];
        for (i, j, v) in m.iter() {
            let (pi, pj) = (inv[i], inv[j]);
            a[pi * width + pj + kl - pi] += v;
        }
        let scale = m.max_abs().max(f64::MIN_POSITIVE);
        let mut lu = BandLu { n, kl, ku, width, a, piv: vec![0; n], perm, near_zero_pivots: 0 };
        lu.eliminate(scale)?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + j + self.kl - i
    }

    fn eliminate(&mut self, scale: f64) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut singular = 0;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = self.a[self.idx(k, k)].norm();
            for r in k + 1..=last_row {
                let v = self.a[self.idx(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            self.piv[k] = p;
            if best <= 1e-14 * scale {
                singular += 1;
                continue;
            }
            if best < 1e-10 * scale {
                self.near_zero_pivots += 1;
            }
            if p != k {
                for c in k..=last_col {
                    let (ik, ip) = (self.idx(k, c), self.idx(p, c));
                    self.a.swap(ik, ip);
                }
            }
            let pivot = self.a[self.idx(k, k)];
            let len = last_col - k;
            let krow_start = self.idx(k, k + 1);
            for r in k + 1..=last_row {
                let lk = self.idx(r, k);
                if self.a[lk] == ZERO {
                    continue;
                }
                let f = self.a[lk] / pivot;
                self.a[lk] = f;
                let rrow_start = self.idx(r, k + 1);
                // rows are disjoint slices of the same buffer
                let (head, tail) = self.a.split_at_mut(rrow_start);
                let src = &head[krow_start..krow_start + len];
                for (d, s) in tail[..len].iter_mut().zip(src) {
                    *d -= f * *s;
                }
            }
        }
        if singular > 0 {
            return Err(Error::Singular { multiplicity: singular });
        }
        Ok(())
    }

    /// Pivots below 1e-10 of the matrix scale; a hint of ill-conditioning.
    pub fn near_zero_pivots(&self) -> usize {
        self.near_zero_pivots
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<C64> = self.perm.iter().map(|&o| b[o]).collect();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk == ZERO {
                continue;
            }
            for r in k + 1..=(k + self.kl).min(n - 1) {
                x[r] -= self.a[self.idx(r, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + self.kl + self.ku).min(n - 1);
            let row = &self.a[self.idx(k, k)..=self.idx(k, last_col)];
            let mut s = x[k];
            for (u, xv) in row[1..].iter().zip(&x[k + 1..=last_col]) {
                s -= u * xv;
            }
            x[k] = s / row[0];
        }
        let mut out = vec![ZERO; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
