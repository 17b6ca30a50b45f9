use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Absolute tolerance on row sums for a matrix to count as stochastic.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Dense square matrix, row-major. Entry `(i, j)` is the weight `a_ij` of
/// arc `(j, i)`: node `i` listens to node `j`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::contract("matrix must have at least one row"));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::contract(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::contract(format!("row {i} holds non-finite entry {v}")));
            }
            data.extend(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Matrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix product");
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let out = &mut data[i * n..(i + 1) * n];
                for (o, b) in out.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Matrix { n, data }
    }

    /// Weighted averages `Σ_j a_ij v_j` of the given vectors, one per row.
    pub fn mix(&self, vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
        assert_eq!(vectors.len(), self.n, "one vector per node expected");
        let dim = vectors.first().map_or(0, Vec::len);
        (0..self.n)
            .map(|i| {
                let mut acc = vec![0.0; dim];
                for (a, v) in self.row(i).iter().zip(vectors) {
                    if *a != 0.0 {
                        for (o, x) in acc.iter_mut().zip(v) {
                            *o += a * x;
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// `μᵀ · self`.
    pub fn left_apply(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, m) in mu.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += m * a;
            }
        }
        out
    }

    /// Largest `max_i a_ij − min_i a_ij` over columns `j`.
    pub fn column_spread(&self) -> f64 {
        (0..self.n)
            .map(|j| {
                let (lo, hi) = (0..self.n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                    let v = self.get(i, j);
                    (lo.min(v), hi.max(v))
                });
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    pub fn row_average(&self) -> Vec<f64> {
        let n = self.n as f64;
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum::<f64>() / n)
            .collect()
    }

    /// Arc pattern: `adj[i][j]` is true when `a_ij > 0`.
    pub fn support(&self) -> Vec<Vec<bool>> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|&v| v > 0.0).collect())
            .collect()
    }

    pub fn min_positive(&self) -> Option<f64> {
        self.data.iter().copied().filter(|&v| v > 0.0).reduce(f64::min)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.n).map(|i| self.row(i)))
            .finish()
    }
}

/// A row-stochastic matrix with positive diagonal (every node keeps a self-loop).
#[derive(Clone, PartialEq)]
pub struct StochasticMatrix(Matrix);

impl StochasticMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        for i in 0..m.n() {
            if let Some(j) = (0..m.n()).find(|&j| m.get(i, j) < 0.0) {
                return Err(Error::domain(format!("negative entry at ({i}, {j})")));
            }
            let s = m.row_sum(i);
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::domain(format!("row {i} sums to {s}")));
            }
            if m.get(i, i) <= 0.0 {
                return Err(Error::domain(format!("missing self-loop at node {i}")));
            }
        }
        Ok(StochasticMatrix(m))
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        StochasticMatrix(Matrix::identity(n))
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }
}

impl Deref for StochasticMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl fmt::Debug for StochasticMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// True when every column sums to one as well (weighted in-degree equals
/// weighted out-degree at every node).
pub fn is_weight_balanced(a: &StochasticMatrix, tol: f64) -> bool {
    (0..a.n()).all(|i| (a.row_sum(i) - a.column_sum(i)).abs() <= tol)
}

/// `1 − min_{j1,j2} Σ_i min(a_{j1 i}, a_{j2 i})`.
pub fn ergodicity_coefficient(a: &Matrix) -> f64 {
    let n = a.n();
    let mut overlap = f64::INFINITY;
    for j1 in 0..n {
        for j2 in j1..n {
            let s: f64 = a
                .row(j1)
                .iter()
                .zip(a.row(j2))
                .map(|(p, q)| p.min(*q))
                .sum();
            overlap = overlap.min(s);
        }
    }
    (1.0 - overlap).clamp(0.0, 1.0)
}

/// Strong connectivity of the digraph whose arc `j → i` exists iff `adj[i][j]`.
pub fn strongly_connected(adj: &[Vec<bool>]) -> bool {
    let n = adj.len();
    if n <= 1 {
        return true;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let arc = if forward { adj[v][u] } else { adj[u][v] };
                if arc && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

fn check_positive_stochastic(mu: &[f64]) -> Result<()> {
    if mu.is_empty() {
        return Err(Error::domain("empty vector"));
    }
    if mu.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
        return Err(Error::domain(format!("vector {mu:?} is not positive")));
    }
    let s: f64 = mu.iter().sum();
    if (s - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::domain(format!("vector sums to {s}, not 1")));
    }
    Ok(())
}

/// Stochastic matrix on a directed cycle with self-loops whose left
/// eigenvector for eigenvalue one is `mu`.
///
/// The cycle runs `r+1 → r` (row `r` listens to `r+1`, wrapping at the end).
/// The minimal component of `mu` (lowest index on ties) carries the diagonal
/// `b11`; every other node `r` gets `1 − (1 − b11)·μ_min/μ_r`.
pub fn build_cycle_matrix(mu: &[f64], b11: f64) -> Result<StochasticMatrix> {
    check_positive_stochastic(mu)?;
    if !(b11 > 0.0 && b11 < 1.0) {
        return Err(Error::domain(format!("b11 = {b11} outside (0, 1)")));
    }
    let n = mu.len();
    if n == 1 {
        return Ok(StochasticMatrix::identity(1));
    }
    let (pivot, mu_min) = mu
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, m)| if m < best.1 { (i, m) } else { best });
    let mut rows = vec![vec![0.0; n]; n];
    for r in 0..n {
        let diag = if r == pivot {
            b11
        } else {
            1.0 - (1.0 - b11) * mu_min / mu[r]
        };
        rows[r][r] = diag;
        rows[r][(r + 1) % n] = 1.0 - diag;
    }
    // Row sums are exact by construction; only the diagonal bounds need checking.
    StochasticMatrix::new(Matrix::from_rows(rows)?)
}
