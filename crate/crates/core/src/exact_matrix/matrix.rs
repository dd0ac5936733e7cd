use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use itertools::Itertools;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

/// Dense row-major matrix over a generic scalar.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for r in 0..self.rows {
            list.entry(&&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        list.finish()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::dims(c, bad.len()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::diagonal(vec![T::one(); d])
    }

    pub fn diagonal(diag: Vec<T>) -> Self {
        let d = diag.len();
        let mut m = Self::zeros(d, d);
        for (i, x) in diag.into_iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, cols);
        for (c, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::dims(rows, col.len()));
            }
            for (r, x) in col.iter().enumerate() {
                m[(r, c)] = x.clone();
            }
        }
        Ok(m)
    }

    /// Columns `0..count`.
    pub fn leading_columns(&self, count: usize) -> Self {
        self.select(
            &(0..self.rows).collect::<Vec<_>>(),
            &(0..count).collect::<Vec<_>>(),
        )
    }

    /// Submatrix on the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                data.push(self[(r, c)].clone());
            }
        }
        Self {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)].clone();
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    let x = &self[(r, c)];
                    if r == c {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self[(r, c)].is_zero()))
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dims(
                format!("{}x{} * {}x_", self.rows, self.cols, self.cols),
                format!(
                    "{}x{} * {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if !b.is_zero() {
                        let t = a.clone() * b.clone();
                        out[(r, c)] = out[(r, c)].clone() + t;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    /// Multiply column `c` by `scales[c]`.
    pub fn scale_columns(&self, scales: &[T]) -> Self {
        let mut m = self.clone();
        for r in 0..self.rows {
            for (c, s) in scales.iter().enumerate() {
                m[(r, c)] = m[(r, c)].clone() * s.clone();
            }
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn pivot_row(&self, col: usize, from: usize) -> Option<usize> {
        let candidates = (from..self.rows).filter(|&r| !self[(r, col)].is_negligible());
        if T::EXACT {
            candidates.min()
        } else {
            candidates.max_by(|&a, &b| {
                self[(a, col)]
                    .magnitude()
                    .total_cmp(&self[(b, col)].magnitude())
            })
        }
    }

    /// Determinant by Bareiss fraction-free elimination; every intermediate
    /// entry is a minor of the input, so exact types see no spurious growth.
    pub fn determinant(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::dims(
                "square",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(T::one());
        }
        let mut a = self.clone();
        let mut negate = false;
        let mut prev = T::one();
        for k in 0..n - 1 {
            let Some(p) = a.pivot_row(k, k) else {
                return Ok(T::zero());
            };
            if p != k {
                a.swap_rows(p, k);
                negate = !negate;
            }
            let pivot = a[(k, k)].clone();
            for i in k + 1..n {
                let lead = a[(i, k)].clone();
                for j in k + 1..n {
                    let v = (pivot.clone() * a[(i, j)].clone() - lead.clone() * a[(k, j)].clone())
                        / prev.clone();
                    a[(i, j)] = v;
                }
                a[(i, k)] = T::zero();
            }
            prev = pivot;
        }
        let det = a[(n - 1, n - 1)].clone();
        Ok(if negate { -det } else { det })
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.determinant().is_ok_and(|d| !d.is_negligible())
    }

    /// The `C(d,k) x C(d,k)` matrix of `k x k` minors, rows and columns indexed
    /// by lexicographically ordered `k`-subsets.
    pub fn exterior_power(&self, k: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::dims(
                "square",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let d = self.rows;
        if k == 0 || k > d {
            return Err(Error::OutOfRange {
                what: "exterior power degree",
                detail: format!("k = {k} with d = {d}"),
            });
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let subsets: Vec<Vec<usize>> = (0..d).combinations(k).collect();
        let m = subsets.len();
        let mut out = Self::zeros(m, m);
        for (i, rs) in subsets.iter().enumerate() {
            for (j, cs) in subsets.iter().enumerate() {
                out[(i, j)] = self.select(rs, cs).determinant()?;
            }
        }
        Ok(out)
    }
}

impl<T: Field> Matrix<T> {
    /// Inverse by fraction-free Gauss-Jordan on `[A | I]`.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::dims(
                "square",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, n + r)] = T::one();
        }
        let mut prev = T::one();
        for k in 0..n {
            let p = aug.pivot_row(k, k).ok_or(Error::Singular)?;
            aug.swap_rows(p, k);
            let pivot = aug[(k, k)].clone();
            for i in 0..n {
                if i == k {
                    continue;
                }
                let lead = aug[(i, k)].clone();
                for j in 0..2 * n {
                    if j == k {
                        continue;
                    }
                    let v = (pivot.clone() * aug[(i, j)].clone()
                        - lead.clone() * aug[(k, j)].clone())
                        / prev.clone();
                    aug[(i, j)] = v;
                }
                aug[(i, k)] = T::zero();
            }
            prev = pivot;
        }
        let mut inv = Self::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                inv[(r, c)] = aug[(r, n + c)].clone() / prev.clone();
            }
        }
        Ok(inv)
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(p) = a.pivot_row(col, row) else {
                for r in row..a.rows {
                    a[(r, col)] = T::zero();
                }
                continue;
            };
            a.swap_rows(p, row);
            let inv = T::one() / a[(row, col)].clone();
            for c in 0..a.cols {
                a[(row, c)] = a[(row, c)].clone() * inv.clone();
            }
            a[(row, col)] = T::one();
            for r in 0..a.rows {
                if r == row {
                    continue;
                }
                let f = a[(r, col)].clone();
                if f.is_zero() {
                    continue;
                }
                for c in 0..a.cols {
                    let v = a[(r, c)].clone() - f.clone() * a[(row, c)].clone();
                    a[(r, c)] = v;
                }
                a[(r, col)] = T::zero();
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Canonical reduced column-echelon form of the column span: column `k`
    /// has its first nonzero entry (a `1`) in row `pivots[k]`, and every other
    /// column vanishes in that row. Zero columns are dropped.
    pub fn column_echelon(&self) -> (Self, Vec<usize>) {
        let (r, pivots) = self.transpose().rref();
        let rank = pivots.len();
        let kept: Vec<usize> = (0..rank).collect();
        let all: Vec<usize> = (0..r.cols).collect();
        (r.select(&kept, &all).transpose(), pivots)
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::dims(self.rows, other.rows));
        }
        let mut m = Self::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = self[(r, c)].clone();
            }
            for c in 0..other.cols {
                m[(r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        Ok(m)
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    /// Panics on shape mismatch; use [`Matrix::multiply`] for a checked product.
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.multiply(rhs).expect("matrix shapes must agree")
    }
}
