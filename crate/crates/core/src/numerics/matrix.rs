use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense row-major real matrix.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        if r == 0 || c == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(Mat {
            rows: r,
            cols: c,
            data,
        })
    }

    /// Column vector from a slice.
    pub fn column(values: &[f64]) -> Self {
        Mat::from_fn(values.len(), 1, |i, _| values[i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        self.add(&rhs.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Sub-matrix with the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Mat {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn max_abs_diff(&self, rhs: &Mat) -> f64 {
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self * q * self^T` for a symmetric `q`.
    pub fn sandwich(&self, q: &SymMat) -> SymMat {
        let aq = self.matmul(q.as_mat());
        SymMat::from_mat(&aq.matmul(&self.transpose()))
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:.6e}", self[(i, j)]))
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Symmetric matrix. Every write is mirrored, so symmetry is exact.
#[derive(Clone, PartialEq)]
pub struct SymMat {
    inner: Mat,
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        SymMat {
            inner: Mat::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        SymMat {
            inner: Mat::identity(n),
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = SymMat::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    /// Builds from the upper triangle produced by `f(i, j)` with `i <= j`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMat::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Symmetrizes `(m + m^T) / 2`.
    pub fn from_mat(m: &Mat) -> Self {
        assert_eq!(m.rows(), m.cols(), "symmetric matrix must be square");
        SymMat::from_upper(m.rows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Mat::from_rows(rows)?;
        if m.rows() != m.cols() {
            return Err(Error::Dimension("symmetric matrix must be square".into()));
        }
        Ok(SymMat::from_mat(&m))
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.inner[(i, j)] = v;
        self.inner[(j, i)] = v;
    }

    pub fn as_mat(&self) -> &Mat {
        &self.inner
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn add(&self, rhs: &SymMat) -> SymMat {
        SymMat {
            inner: self.inner.add(&rhs.inner),
        }
    }

    pub fn sub(&self, rhs: &SymMat) -> SymMat {
        SymMat {
            inner: self.inner.sub(&rhs.inner),
        }
    }

    pub fn scale(&self, s: f64) -> SymMat {
        SymMat {
            inner: self.inner.scale(s),
        }
    }

    pub fn add_identity(&self, s: f64) -> SymMat {
        let mut m = self.clone();
        for i in 0..self.dim() {
            m.inner[(i, i)] += s;
        }
        m
    }

    /// Principal sub-matrix on `idx`.
    pub fn principal(&self, idx: &[usize]) -> SymMat {
        SymMat {
            inner: self.inner.select(idx, idx),
        }
    }

    /// Block-diagonal concatenation.
    pub fn block_diag(a: &SymMat, b: &SymMat) -> SymMat {
        let (na, nb) = (a.dim(), b.dim());
        let mut m = SymMat::zeros(na + nb);
        for i in 0..na {
            for j in i..na {
                m.set(i, j, a.get(i, j));
            }
        }
        for i in 0..nb {
            for j in i..nb {
                m.set(na + i, na + j, b.get(i, j));
            }
        }
        m
    }

    /// Frobenius inner product.
    pub fn dot(&self, rhs: &SymMat) -> f64 {
        self.inner
            .as_slice()
            .iter()
            .zip(rhs.inner.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.inner.frobenius()
    }

    pub fn max_abs_diff(&self, rhs: &SymMat) -> f64 {
        self.inner.max_abs_diff(&rhs.inner)
    }
}

impl fmt::Debug for SymMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym{:?}", self.inner)
    }
}
