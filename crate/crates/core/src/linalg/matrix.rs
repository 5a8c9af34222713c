use std::fmt;

use rug::{Assign, Float, Rational};

/// Dense symmetric matrix. Both triangles are stored and kept equal.
#[derive(Clone, PartialEq, Eq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> SymMatrix<T> {
    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle (`i <= j`).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data: Vec<Option<T>> = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[j * n + i] = Some(v.clone());
                data[i * n + j] = Some(v);
            }
        }
        SymMatrix {
            n,
            data: data.into_iter().map(|v| v.expect("filled")).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    /// Sets entries `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        if i != j {
            self.data[j * self.n + i] = v.clone();
        }
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn map<U: Clone>(&self, mut f: impl FnMut(&T) -> U) -> SymMatrix<U> {
        SymMatrix::from_fn(self.n, |i, j| f(self.get(i, j)))
    }

    /// Iterates the upper triangle as `(i, j, value)` with `i <= j`.
    pub fn upper(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        (0..self.n).flat_map(move |i| (i..self.n).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}

impl SymMatrix<Rational> {
    pub fn zeros(n: usize) -> Self {
        SymMatrix::from_fn(n, |_, _| Rational::new())
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix::from_fn(n, |i, j| Rational::from(u32::from(i == j)))
    }

    /// Builds a matrix from a row-major array, failing if it is not exactly symmetric.
    pub fn from_rows(rows: &[Vec<Rational>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return None;
                }
            }
        }
        Some(SymMatrix::from_fn(n, |i, j| rows[i][j].clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.cmp0().is_eq())
    }

    pub fn trace(&self) -> Rational {
        let mut t = Rational::new();
        for i in 0..self.n {
            t += self.get(i, i);
        }
        t
    }

    /// Frobenius inner product `trace(A B)`.
    pub fn dot(&self, other: &Self) -> Rational {
        assert_eq!(self.n, other.n);
        let mut s = Rational::new();
        for (a, b) in self.data.iter().zip(&other.data) {
            if a.cmp0().is_ne() && b.cmp0().is_ne() {
                s += Rational::from(a * b);
            }
        }
        s
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> Rational {
        let mut m = Rational::new();
        for v in &self.data {
            let a = Rational::from(v.abs_ref());
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn to_float(&self, prec: u32) -> SymMatrix<Float> {
        self.map(|v| Float::with_val(prec, v))
    }

    /// Quadratic form `vᵀ A v`.
    pub fn quad_form(&self, v: &[Rational]) -> Rational {
        assert_eq!(v.len(), self.n);
        let mut s = Rational::new();
        for i in 0..self.n {
            if v[i].cmp0().is_eq() {
                continue;
            }
            let mut row = Rational::new();
            for j in 0..self.n {
                if v[j].cmp0().is_ne() && self.get(i, j).cmp0().is_ne() {
                    row += Rational::from(self.get(i, j) * &v[j]);
                }
            }
            s += row * &v[i];
        }
        s
    }
}

impl SymMatrix<Float> {
    pub fn zeros_float(n: usize, prec: u32) -> Self {
        SymMatrix::from_fn(n, |_, _| Float::new(prec))
    }

    pub fn identity_float(n: usize, prec: u32) -> Self {
        SymMatrix::from_fn(n, |i, j| Float::with_val(prec, u32::from(i == j)))
    }

    pub fn prec(&self) -> u32 {
        self.data.first().map_or(53, Float::prec)
    }

    pub fn set_prec(&mut self, prec: u32) {
        for v in &mut self.data {
            v.set_prec(prec);
        }
    }

    pub fn trace(&self) -> Float {
        let mut t = Float::new(self.prec());
        for i in 0..self.n {
            t += self.get(i, i);
        }
        t
    }

    /// Frobenius inner product `trace(A B)` of two symmetric matrices.
    pub fn dot(&self, other: &Self) -> Float {
        assert_eq!(self.n, other.n);
        let mut s = Float::new(self.prec());
        for (a, b) in self.data.iter().zip(&other.data) {
            s += a * b;
        }
        s
    }

    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.prec());
        for v in &self.data {
            if v.as_abs().gt(&m) {
                m.assign(v.abs_ref());
            }
        }
        m
    }

    /// `self + alpha * other`, entrywise.
    pub fn add_scaled(&self, alpha: &Float, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let prec = self.prec();
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let mut v = Float::with_val(prec, alpha * b);
                v += a;
                v
            })
            .collect();
        SymMatrix { n: self.n, data }
    }

    pub fn scale(&self, alpha: &Float) -> Self {
        let prec = self.prec();
        let data = self.data.iter().map(|a| Float::with_val(prec, a * alpha)).collect();
        SymMatrix { n: self.n, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let prec = self.prec();
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| Float::with_val(prec, a - b))
            .collect();
        SymMatrix { n: self.n, data }
    }

    /// Product `A B` of two symmetric matrices (generally not symmetric).
    pub fn mul(&self, other: &Self) -> Matrix<Float> {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let prec = self.prec();
        let mut out = Matrix::from_fn(n, n, |_, _| Float::new(prec));
        for i in 0..n {
            let a = self.row(i);
            for j in 0..n {
                let mut s = Float::new(prec);
                for k in 0..n {
                    s += &a[k] * other.get(k, j);
                }
                out.data[i * n + j] = s;
            }
        }
        out
    }

    /// Exact rational copy of every entry.
    pub fn to_rational(&self) -> SymMatrix<Rational> {
        self.map(|v| v.to_rational().expect("finite matrix entry"))
    }
}

impl<T: fmt::Display> fmt::Debug for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix({}) [", self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                write!(f, "{} ", self.data[i * self.n + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Dense row-major rectangular matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{}) [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
