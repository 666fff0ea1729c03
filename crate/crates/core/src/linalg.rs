//! Structured dense/banded linear algebra for the compact schemes:
//! symmetric Toeplitz application, banded LU with a dense fallback, dense LU
//! with partial pivoting, Cholesky as a positive-definiteness certificate,
//! and Gershgorin eigenvalue intervals.

use crate::error::{Error, Result};

/// Relative pivot tolerance: a factorization step fails when the pivot
/// magnitude falls below `PIVOT_TOL * max|entry|`.
pub const PIVOT_TOL: f64 = 1e-14;

/// Relative symmetry / positive-definiteness tolerance (`* max|entry|`).
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Small row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, data: vec![0.0; n_rows * n_cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { n_rows, n_cols, data }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Matrix 1-norm (maximum absolute column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.n_cols)
            .map(|j| (0..self.n_rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, got: v.len() });
        }
        Ok((0..self.n_rows)
            .map(|i| {
                let row = &self.data[i * self.n_cols..(i + 1) * self.n_cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect())
    }

    /// C = A + s * B.
    pub fn add_scaled(&self, s: f64, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect();
        DenseMatrix { n_rows: self.n_rows, n_cols: self.n_cols, data }
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|v| s * v).collect(),
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n_cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n_cols + j]
    }
}

/// Symmetric Toeplitz matrix stored by its first row (t_0..t_{dim-1});
/// entry(i, j) = t_{|i−j|}.
#[derive(Debug, Clone)]
pub struct SymToeplitzMatrix {
    first_row: Vec<f64>,
}

impl SymToeplitzMatrix {
    pub fn new(first_row: Vec<f64>) -> Self {
        assert!(!first_row.is_empty(), "empty Toeplitz first row");
        Self { first_row }
    }

    pub fn dim(&self) -> usize {
        self.first_row.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.first_row[i.abs_diff(j)]
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.entry(i, j);
            }
        }
        m
    }
}

/// Direct O(M²) symmetric Toeplitz matrix-vector product (the reference
/// path; any accelerated path must match it to 1e-13 relative).
pub fn toeplitz_matvec(t: &SymToeplitzMatrix, v: &[f64]) -> Result<Vec<f64>> {
    let n = t.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    let row = &t.first_row;
    Ok((0..n)
        .map(|i| (0..n).map(|j| row[i.abs_diff(j)] * v[j]).sum())
        .collect())
}

/// Banded square matrix with half-bandwidth β; diagonals stored by offset
/// −β..β, each padded to the full dimension (entry (i, i+off) lives at
/// `diagonals[off + β][i]`).
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    dim: usize,
    beta: usize,
    diagonals: Vec<Vec<f64>>,
}

impl BandedMatrix {
    pub fn zeros(dim: usize, beta: usize) -> Self {
        Self { dim, beta, diagonals: vec![vec![0.0; dim]; 2 * beta + 1] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_bandwidth(&self) -> usize {
        self.beta
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i as isize, j as isize);
        let off = j - i;
        if off.unsigned_abs() > self.beta {
            0.0
        } else {
            self.diagonals[(off + self.beta as isize) as usize][i as usize]
        }
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: f64) {
        let off = j as isize - i as isize;
        assert!(off.unsigned_abs() <= self.beta, "entry outside band");
        self.diagonals[(off + self.beta as isize) as usize][i] = v;
    }

    pub fn add_to_entry(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.entry(i, j);
        self.set_entry(i, j, cur + v);
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        let mut out = vec![0.0; self.dim];
        for (i, o) in out.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.beta);
            let hi = (i + self.beta).min(self.dim - 1);
            *o = (lo..=hi).map(|j| self.entry(i, j) * v[j]).sum();
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.diagonals.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in i.saturating_sub(self.beta)..=(i + self.beta).min(self.dim - 1) {
                m[(i, j)] = self.entry(i, j);
            }
        }
        m
    }
}

/// LU factors with partial-pivoting permutation of a square dense matrix.
#[derive(Debug, Clone)]
pub struct DenseFactorization {
    lu: DenseMatrix,
    piv: Vec<usize>,
    /// 1-norm of the original matrix, kept for residual contracts.
    norm1: f64,
}

impl DenseFactorization {
    /// Factor with partial pivoting. Fails if any pivot magnitude drops
    /// below `PIVOT_TOL * max|entry|`.
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.n_cols() });
        }
        let tol = PIVOT_TOL * a.max_abs();
        let norm1 = a.norm1();
        let mut lu = a.clone();
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let (mut p, mut pmax) = (k, lu[(k, k)].abs());
            for i in k + 1..n {
                if lu[(i, k)].abs() > pmax {
                    p = i;
                    pmax = lu[(i, k)].abs();
                }
            }
            if pmax <= tol {
                return Err(Error::Singular { pivot: pmax, tol, step: k });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            piv.push(p);
            let d = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / d;
                lu[(i, k)] = m;
                for j in k + 1..n {
                    lu[(i, j)] -= m * lu[(k, j)];
                }
            }
        }
        Ok(Self { lu, piv, norm1 })
    }

    pub fn dim(&self) -> usize {
        self.lu.n_rows()
    }

    pub fn norm1(&self) -> f64 {
        self.norm1
    }

    /// Solve A x = rhs using the stored factors.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
        }
        let mut x = rhs.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            for i in k + 1..n {
                let m = self.lu[(i, k)];
                x[i] -= m * x[k];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = self.lu[(i, j)] * x[j];
                x[i] -= v;
            }
            x[i] /= self.lu[(i, i)];
        }
        Ok(x)
    }
}

/// Solve A x = rhs through an existing factorization.
pub fn lu_solve(f: &DenseFactorization, rhs: &[f64]) -> Result<Vec<f64>> {
    f.solve(rhs)
}

/// Solve a banded system by unpivoted banded LU; the scheme's left-hand
/// matrices are strictly diagonally dominant so pivoting is never needed,
/// but if a pivot does fall below tolerance we fall back to dense LU with
/// partial pivoting rather than failing.
pub fn banded_solve(b: &BandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = b.dim();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
    }
    let beta = b.half_bandwidth();
    let tol = PIVOT_TOL * b.max_abs();
    // Work on a dense band copy: band[i][j] for j in i-beta..=i+beta.
    let mut m = b.clone();
    let mut x = rhs.to_vec();
    for k in 0..n {
        let pivot = m.entry(k, k);
        if pivot.abs() <= tol {
            // Unpivoted breakdown: dense fallback.
            let f = DenseFactorization::factor(&b.to_dense())?;
            return f.solve(rhs);
        }
        for i in k + 1..=(k + beta).min(n - 1) {
            let factor = m.entry(i, k) / pivot;
            if factor != 0.0 {
                for j in k..=(k + beta).min(n - 1) {
                    let v = m.entry(i, j) - factor * m.entry(k, j);
                    if j as isize - i as isize <= beta as isize {
                        m.set_entry(i, j, v);
                    }
                }
                x[i] -= factor * x[k];
            }
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..=(i + beta).min(n - 1) {
            let v = m.entry(i, j) * x[j];
            x[i] -= v;
        }
        x[i] /= m.entry(i, i);
    }
    Ok(x)
}

/// Executable positive-definiteness certificate: attempt a Cholesky
/// factorization and report whether every pivot stayed (numerically)
/// positive. Requires symmetry up to `SYMMETRY_TOL * max|entry|`.
pub fn cholesky_pd_check(a: &DenseMatrix) -> Result<bool> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.n_cols() });
    }
    let scale = a.max_abs();
    let sym_tol = SYMMETRY_TOL * scale;
    let mut max_asym: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            max_asym = max_asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if max_asym > sym_tol {
        return Err(Error::Asymmetric { max_asym, tol: sym_tol });
    }
    let pd_tol = -SYMMETRY_TOL * scale;
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        // Pivots above the (negative) tolerance are treated as strictly
        // positive; anything at or below it certifies indefiniteness.
        if d <= pd_tol {
            return Ok(false);
        }
        let dj = d.max(f64::MIN_POSITIVE).sqrt();
        l[(j, j)] = dj;
        for i in j + 1..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / dj;
        }
    }
    Ok(true)
}

/// Closed interval guaranteed to contain every eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenInterval {
    pub lower: f64,
    pub upper: f64,
}

/// Gershgorin disc interval for a symmetric matrix:
/// [min_j (a_jj − R_j), max_j (a_jj + R_j)] with R_j the off-diagonal
/// absolute row sum.
pub fn gershgorin_interval(a: &DenseMatrix) -> EigenInterval {
    let n = a.n_rows();
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for i in 0..n {
        let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
        lower = lower.min(a[(i, i)] - r);
        upper = upper.max(a[(i, i)] + r);
    }
    EigenInterval { lower, upper }
}
