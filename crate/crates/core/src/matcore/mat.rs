//! Small dense real matrices.
//!
//! Everything here is sized for shape operators and Gram matrices (dimension
//! well below 20), so storage is a flat row-major `Vec<f64>` and all products
//! are naive triple loops.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// General real `rows × cols` matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct GenMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl GenMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        GenMat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(GenMat { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_row_major(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> GenMat {
        let mut t = GenMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &GenMat) -> Result<GenMat> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = GenMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, t: f64) -> GenMat {
        GenMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * t).collect(),
        }
    }

    /// `self + t * other`.
    pub fn add_scaled(&self, other: &GenMat, t: f64) -> Result<GenMat> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + t * b)
            .collect();
        Ok(GenMat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &GenMat) -> Result<GenMat> {
        self.add_scaled(other, -1.0)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frob_norm2(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_norm2().sqrt()
    }

    pub(crate) fn check_same_shape(&self, other: &GenMat) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Gauss–Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<GenMat> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "{}x{} is not square",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = GenMat::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .expect("non-empty range");
            let p = a[(pivot, col)];
            if p == 0.0 || !p.is_finite() {
                return Err(Error::Domain("singular matrix".into()));
            }
            if pivot != col {
                for k in 0..n {
                    a.data.swap(pivot * n + k, col * n + k);
                    inv.data.swap(pivot * n + k, col * n + k);
                }
            }
            for k in 0..n {
                a[(col, k)] /= p;
                inv[(col, k)] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor == 0.0 {
                    continue;
                }
                for k in 0..n {
                    a[(r, k)] -= factor * a[(col, k)];
                    inv[(r, k)] -= factor * inv[(col, k)];
                }
            }
        }
        Ok(inv)
    }

    /// Largest entrywise deviation from the identity of `selfᵀ self`.
    pub fn orthogonality_defect(&self) -> f64 {
        let qtq = self.transpose().matmul(self).expect("square product");
        let mut worst = 0.0f64;
        for i in 0..qtq.rows {
            for j in 0..qtq.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((qtq[(i, j)] - target).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for GenMat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for GenMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for GenMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GenMat{}x{}{:?}", self.rows, self.cols, self.to_rows())
    }
}

/// Real symmetric matrix. Construction always symmetrizes, so
/// `m[(i, j)] == m[(j, i)]` holds bit for bit.
#[derive(Clone, PartialEq)]
pub struct SymMat(GenMat);

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        SymMat(GenMat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        SymMat(GenMat::identity(dim))
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = GenMat::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        SymMat(m)
    }

    /// Symmetrizes `(a + aᵀ)/2`; the input must be square.
    pub fn from_gen(a: &GenMat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!(
                "{}x{} is not square",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut m = GenMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = a[(i, i)];
            for j in 0..i {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(SymMat(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_gen(&GenMat::from_rows(rows)?)
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        Self::from_gen(&GenMat::from_row_major(dim, dim, data)?)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_gen(&self) -> &GenMat {
        &self.0
    }

    pub fn into_gen(self) -> GenMat {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Writes both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
        self.0[(j, i)] = v;
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frob_norm2(&self) -> f64 {
        self.0.frob_norm2()
    }

    pub fn scaled(&self, t: f64) -> SymMat {
        SymMat(self.0.scaled(t))
    }

    pub fn add_scaled(&self, other: &SymMat, t: f64) -> Result<SymMat> {
        // a + t·b of symmetric matrices is symmetric entrywise, no re-symmetrization needed
        Ok(SymMat(self.0.add_scaled(&other.0, t)?))
    }

    /// `Qᵀ self Q`, re-symmetrized.
    pub fn congruence(&self, q: &GenMat) -> Result<SymMat> {
        let inner = self.0.matmul(q)?;
        SymMat::from_gen(&q.transpose().matmul(&inner)?)
    }
}

impl Index<(usize, usize)> for SymMat {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for SymMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMat{:?}", self.0.to_rows())
    }
}

/// `XY − YX`.
pub fn commutator(x: &GenMat, y: &GenMat) -> Result<GenMat> {
    if !x.is_square() || !y.is_square() || x.rows() != y.rows() {
        return Err(Error::Shape(format!(
            "commutator needs equal square matrices, got {}x{} and {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let n = x.rows();
    let mut out = GenMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += x[(i, k)] * y[(k, j)] - y[(i, k)] * x[(k, j)];
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// `Tr(X Yᵀ)`, i.e. the entrywise dot product.
pub fn frob_inner(x: &GenMat, y: &GenMat) -> Result<f64> {
    x.check_same_shape(y)?;
    Ok(x.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| a * b)
        .sum())
}

pub fn frob_norm2(x: &GenMat) -> f64 {
    x.frob_norm2()
}

/// Commutator of two symmetric matrices of equal dimension.
pub fn sym_commutator(a: &SymMat, b: &SymMat) -> Result<GenMat> {
    commutator(a.as_gen(), b.as_gen())
}
