//! Dense exact linear algebra over the rationals.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use crate::rational::{format_rational, to_f64, Rational};

#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, &Rational::one())
    }

    pub fn scalar(n: usize, s: &Rational) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = s.clone();
        }
        m
    }

    pub fn diagonal(diag: &[Rational]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        QMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Outer product `u vᵀ`.
    pub fn outer(u: &[Rational], v: &[Rational]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, ui) in u.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, vj) in v.iter().enumerate() {
                m[(i, j)] = ui * vj;
            }
        }
        m
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

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// `M x`, skipping zero entries of `x` and of `M`.
    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, x.len(), "matrix-vector shape mismatch");
        let mut y = vec![Rational::zero(); self.rows];
        for (j, xj) in x.iter().enumerate() {
            if xj.is_zero() {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                let m = &self[(i, j)];
                if !m.is_zero() {
                    *yi += m * xj;
                }
            }
        }
        y
    }

    /// `xᵀ M` as a row vector.
    pub fn apply_left(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.rows, x.len());
        let mut y = vec![Rational::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter_mut().enumerate() {
                let m = &self[(i, j)];
                if !m.is_zero() {
                    *yj += xi * m;
                }
            }
        }
        y
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::identity(self.rows);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Commutator `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let factor = m[(i, c)].clone();
                    for j in c..m.cols {
                        if !m[(r, j)].is_zero() {
                            let v = &m[(r, j)] * &factor;
                            m[(i, j)] -= v;
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : M x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Basis of `{w : wᵀ M = 0}` in reduced echelon form, so every vector has a
    /// distinguished pivot coordinate equal to one.
    pub fn left_nullspace(&self) -> Vec<Vec<Rational>> {
        let basis = self.transpose().nullspace();
        if basis.is_empty() {
            return basis;
        }
        let (r, pivots) = QMatrix::from_rows(basis).rref();
        (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = QMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    /// Moore–Penrose pseudo-inverse via a rank factorization `M = F G`:
    /// `M⁺ = Gᵀ (G Gᵀ)⁻¹ (Fᵀ F)⁻¹ Fᵀ`.
    pub fn pseudo_inverse(&self) -> QMatrix {
        let (r, pivots) = self.rref();
        let k = pivots.len();
        if k == 0 {
            return QMatrix::zeros(self.cols, self.rows);
        }
        let f = QMatrix::from_rows(
            (0..self.rows).map(|i| pivots.iter().map(|&p| self[(i, p)].clone()).collect()).collect(),
        );
        let g = QMatrix::from_rows((0..k).map(|i| r.row(i).to_vec()).collect());
        let gt = g.transpose();
        let ft = f.transpose();
        let ggt_inv = g.mul(&gt).inverse().expect("full-rank Gram matrix");
        let ftf_inv = ft.mul(&f).inverse().expect("full-rank Gram matrix");
        gt.mul(&ggt_inv).mul(&ftf_inv).mul(&ft)
    }

    pub fn max_abs(&self) -> Rational {
        self.data.iter().map(|a| if a < &Rational::zero() { -a.clone() } else { a.clone() }).max().unwrap_or_else(Rational::zero)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| to_f64(&self[(i, j)]))
    }
}

/// Incrementally maintained echelon basis of a row space. Rows are kept fully
/// reduced against each other, so `reduce` yields a canonical remainder.
#[derive(Clone, Debug, Default)]
pub struct RowSpace {
    width: usize,
    rows: Vec<(usize, Vec<Rational>)>,
}

impl RowSpace {
    pub fn new(width: usize) -> Self {
        RowSpace { width, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn basis(&self) -> impl Iterator<Item = &[Rational]> {
        self.rows.iter().map(|(_, r)| r.as_slice())
    }

    /// Remainder of `v` after eliminating every pivot coordinate.
    pub fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.width);
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let factor = v[*p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= &factor * r;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Adds `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        let mut v = self.reduce(v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].recip();
        for x in v.iter_mut() {
            *x *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let factor = row[p].clone();
            for (x, r) in row.iter_mut().zip(&v) {
                if !r.is_zero() {
                    *x -= &factor * r;
                }
            }
        }
        self.rows.push((p, v));
        true
    }
}

/// Solves `A x = b` exactly. Free variables are set to zero.
pub fn solve(a: &QMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(a.rows(), b.len());
    let n = a.cols();
    let mut aug = QMatrix::zeros(a.rows(), n + 1);
    for i in 0..a.rows() {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, n)] = b[i].clone();
    }
    let (r, pivots) = aug.rref();
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = r[(row, n)].clone();
    }
    Some(x)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()
}

pub fn vec_is_zero(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};

    fn m(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), QMatrix::identity(2));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn nullspaces() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(vec_is_zero(&a.apply(v)));
        }
        let ln = a.left_nullspace();
        assert_eq!(ln.len(), 1);
        assert!(vec_is_zero(&a.apply_left(&ln[0])));
    }

    #[test]
    fn pseudo_inverse_penrose_conditions() {
        let a = m(&[&[1, -1, 0], &[-1, 1, 0], &[0, 0, 3]]);
        let p = a.pseudo_inverse();
        assert_eq!(a.mul(&p).mul(&a), a);
        assert_eq!(p.mul(&a).mul(&p), p);
        assert_eq!(a.mul(&p).transpose(), a.mul(&p));
        assert_eq!(p.mul(&a).transpose(), p.mul(&a));
        assert_eq!(p[(2, 2)], frac(1, 3));
        assert!(QMatrix::zeros(2, 2).pseudo_inverse().is_zero());
    }

    #[test]
    fn row_space_reduction_is_canonical() {
        let mut rs = RowSpace::new(3);
        assert!(rs.insert(&[q(1), q(1), q(0)]));
        assert!(rs.insert(&[q(0), q(1), q(1)]));
        assert!(!rs.insert(&[q(1), q(2), q(1)]));
        assert!(rs.contains(&[q(2), q(0), q(-2)]));
        assert_eq!(rs.reduce(&[q(0), q(0), q(1)]), vec![q(0), q(0), q(1)]);
    }

    #[test]
    fn linear_solve() {
        let a = m(&[&[1, 1], &[1, -1]]);
        assert_eq!(solve(&a, &[q(3), q(1)]).unwrap(), vec![q(2), q(1)]);
        let s = m(&[&[1, 1], &[2, 2]]);
        assert!(solve(&s, &[q(1), q(3)]).is_none());
    }
}
