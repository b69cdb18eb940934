//! Small dense linear algebra.
//!
//! Row-major `f64` matrices plus a validated symmetric wrapper. Everything
//! here is sized for the tensors of this crate (at most a few dozen rows), so
//! the algorithms are plain elimination without blocking.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot threshold used by inversion and inertia.
pub const PIVOT_TOL: f64 = 1e-12;

// Bunch–Kaufman growth constant (1 + sqrt(17)) / 8.
const BK_ALPHA: f64 = 0.640_388_203_202_207_9;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from rows. Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product. Panics on inner-dimension mismatch.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        self.sub(rhs).max_abs()
    }

    /// `self * rhs - rhs * self`.
    pub fn commutator(&self, rhs: &Matrix) -> Matrix {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows + b.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                out[(i, j)] = a[(i, j)];
            }
        }
        for i in 0..b.rows {
            for j in 0..b.cols {
                out[(a.rows + i, a.cols + j)] = b[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Square matrix with `m[i][j] == m[j][i]` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Wraps `m` after checking exact symmetry.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows,
                got: m.cols,
            });
        }
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        Ok(Self(m))
    }

    /// Symmetrizes `m` as `(m + mᵀ)/2`. Panics if `m` is not square.
    pub fn symmetrize(m: &Matrix) -> Self {
        assert!(m.is_square());
        Self(Matrix::from_fn(m.rows, m.cols, |i, j| {
            0.5 * (m[(i, j)] + m[(j, i)])
        }))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows))
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self(Matrix::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 }))
    }

    /// Ones on the antidiagonal, zeros elsewhere.
    pub fn antidiagonal(n: usize) -> Self {
        Self(Matrix::from_fn(n, n, |i, j| if i + j + 1 == n { 1.0 } else { 0.0 }))
    }

    pub fn block_diag(a: &SymMatrix, b: &SymMatrix) -> Self {
        Self(Matrix::block_diag(&a.0, &b.0))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `pᵀ · self · p`.
    pub fn congruence(&self, p: &Matrix) -> SymMatrix {
        SymMatrix::symmetrize(&p.transpose().mul(&self.0).mul(p))
    }

    pub fn quadratic(&self, x: &[f64], y: &[f64]) -> f64 {
        let my = self.0.mul_vec(y);
        x.iter().zip(&my).map(|(a, b)| a * b).sum()
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Counts of positive and negative directions of a nondegenerate symmetric
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.positive + self.negative
    }

    /// `positive - negative`.
    pub fn signature(&self) -> i64 {
        self.positive as i64 - self.negative as i64
    }
}

fn singular_tol(m: &Matrix) -> f64 {
    PIVOT_TOL * m.max_abs()
}

/// Inverse of a symmetric matrix by Gauss–Jordan elimination with partial
/// pivoting. The result is symmetrized.
pub fn invert(m: &SymMatrix) -> Result<SymMatrix> {
    let inv = invert_general(m.as_matrix())?;
    Ok(SymMatrix::symmetrize(&inv))
}

/// Inverse of a general square matrix.
pub fn invert_general(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows,
            got: m.cols,
        });
    }
    let n = m.rows;
    let tol = singular_tol(m);
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    if tol == 0.0 {
        return Err(Error::Singular);
    }
    let mut a = m.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let (piv, pval) = (col..n)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pval <= tol {
            return Err(Error::Singular);
        }
        if piv != col {
            for j in 0..n {
                a.data.swap(piv * n + j, col * n + j);
                inv.data.swap(piv * n + j, col * n + j);
            }
        }
        let d = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(r, j)] -= f * a[(col, j)];
                inv[(r, j)] -= f * inv[(col, j)];
            }
        }
    }
    Ok(inv)
}

fn sym_swap(a: &mut Matrix, p: usize, q: usize) {
    if p == q {
        return;
    }
    let n = a.rows;
    for j in 0..n {
        a.data.swap(p * n + j, q * n + j);
    }
    for i in 0..n {
        a.data.swap(i * n + p, i * n + q);
    }
}

/// Inertia by symmetric elimination with Bunch–Kaufman 1×1/2×2 pivoting.
///
/// Pivot signs are counted directly, so no eigenvalue iteration is involved.
/// A 2×2 pivot with negative determinant contributes one direction of each
/// sign; a positive determinant contributes two of the sign of its diagonal.
pub fn inertia(m: &SymMatrix) -> Result<Inertia> {
    let n = m.dim();
    let tol = singular_tol(m.as_matrix());
    if n > 0 && tol == 0.0 {
        return Err(Error::Singular);
    }
    let mut a = m.as_matrix().clone();
    let mut pos = 0;
    let mut neg = 0;
    let mut k = 0;
    while k < n {
        let akk = a[(k, k)].abs();
        let (r, lambda) = ((k + 1)..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if akk.max(lambda) <= tol {
            return Err(Error::Singular);
        }
        let two_by_two = if akk >= BK_ALPHA * lambda {
            false
        } else {
            let sigma = (k..n)
                .filter(|&j| j != r)
                .fold(0.0f64, |s, j| s.max(a[(r, j)].abs()));
            if akk * sigma >= BK_ALPHA * lambda * lambda {
                false
            } else if a[(r, r)].abs() >= BK_ALPHA * sigma {
                sym_swap(&mut a, k, r);
                false
            } else {
                sym_swap(&mut a, k + 1, r);
                true
            }
        };

        if !two_by_two {
            let d = a[(k, k)];
            if d.abs() <= tol {
                return Err(Error::Singular);
            }
            if d > 0.0 {
                pos += 1;
            } else {
                neg += 1;
            }
            for i in (k + 1)..n {
                let f = a[(i, k)] / d;
                if f == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    a[(i, j)] -= f * a[(k, j)];
                }
            }
            k += 1;
        } else {
            let (p, q, s) = (a[(k, k)], a[(k + 1, k + 1)], a[(k, k + 1)]);
            let det = p * q - s * s;
            if det.abs() <= tol * p.abs().max(q.abs()).max(s.abs()) {
                return Err(Error::Singular);
            }
            if det < 0.0 {
                pos += 1;
                neg += 1;
            } else if p + q > 0.0 {
                pos += 2;
            } else {
                neg += 2;
            }
            // Schur complement: A22 -= A21 E^{-1} A12 with E the 2x2 pivot.
            let (e00, e01, e11) = (q / det, -s / det, p / det);
            for i in (k + 2)..n {
                let (x0, x1) = (a[(i, k)], a[(i, k + 1)]);
                let w0 = e00 * x0 + e01 * x1;
                let w1 = e01 * x0 + e11 * x1;
                for j in (k + 2)..n {
                    a[(i, j)] -= w0 * a[(k, j)] + w1 * a[(k + 1, j)];
                }
            }
            k += 2;
        }
    }
    Ok(Inertia {
        positive: pos,
        negative: neg,
    })
}

/// Solves `a x ≈ b` in the least-squares sense through the normal equations.
///
/// Returns the minimizer and the max-abs residual `|a x - b|`, or `None` when
/// `aᵀa` is singular.
pub fn least_squares(a: &Matrix, b: &[f64]) -> Option<(Vec<f64>, f64)> {
    assert_eq!(a.rows(), b.len());
    let at = a.transpose();
    let ata = at.mul(a);
    let atb = at.mul_vec(b);
    let inv = invert_general(&ata).ok()?;
    let x = inv.mul_vec(&atb);
    let resid = a
        .mul_vec(&x)
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    Some((x, resid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn antidiagonal_is_its_own_inverse() {
        let a = SymMatrix::antidiagonal(3);
        assert_eq!(invert(&a).unwrap(), a);
    }

    #[test]
    fn invert_diagonal() {
        let inv = invert(&SymMatrix::diagonal(&[2.0, 2.0])).unwrap();
        assert_eq!(inv, SymMatrix::diagonal(&[0.5, 0.5]));
    }

    #[test]
    fn rank_one_is_singular() {
        let m = sym(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(invert(&m), Err(Error::Singular));
        assert_eq!(inertia(&m), Err(Error::Singular));
    }

    #[test]
    fn zero_matrix_is_singular() {
        assert_eq!(inertia(&SymMatrix::diagonal(&[0.0, 0.0])), Err(Error::Singular));
    }

    #[test]
    fn asymmetric_rejected() {
        assert_eq!(
            SymMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]),
            Err(Error::NotSymmetric)
        );
    }

    #[test]
    fn inertia_of_identities() {
        for n in 1..6 {
            let i = inertia(&SymMatrix::identity(n)).unwrap();
            assert_eq!((i.positive, i.negative), (n, 0));
            let m = SymMatrix::diagonal(&vec![-1.0; n]);
            let i = inertia(&m).unwrap();
            assert_eq!((i.positive, i.negative), (0, n));
        }
    }

    #[test]
    fn inertia_of_antidiagonal() {
        let a = SymMatrix::antidiagonal(3);
        // e1+e3, e2, e1-e3 diagonalize it to diag(2, 1, -2).
        let p = Matrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, -1.0]]);
        let d = a.congruence(&p);
        assert_eq!(d, SymMatrix::diagonal(&[2.0, 1.0, -2.0]));
        assert_eq!(
            inertia(&a).unwrap(),
            Inertia {
                positive: 2,
                negative: 1
            }
        );
        assert_eq!(inertia(&a).unwrap().signature(), 1);
    }

    #[test]
    fn inertia_needs_two_by_two_pivots() {
        // Hyperbolic planes have zero diagonal everywhere.
        let h = sym(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 3.0],
            &[0.0, 0.0, 3.0, 0.0],
        ]);
        assert_eq!(
            inertia(&h).unwrap(),
            Inertia {
                positive: 2,
                negative: 2
            }
        );
    }

    #[test]
    fn least_squares_exact_system() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]]);
        let (x, r) = least_squares(&a, &[1.0, 4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        assert!(r < 1e-12);
        assert!(least_squares(&Matrix::zeros(3, 2), &[1.0, 0.0, 0.0]).is_none());
    }

    fn well_conditioned(n: usize) -> impl Strategy<Value = SymMatrix> {
        proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
            // Diagonally dominant with random signs on the diagonal.
            let m = Matrix::from_fn(n, n, |i, j| {
                let (a, b) = (i.min(j), i.max(j));
                let x = v[a * n + b];
                if i == j {
                    if x >= 0.0 { n as f64 + 1.0 + x } else { -(n as f64) - 1.0 + x }
                } else {
                    x
                }
            });
            SymMatrix::new(m).unwrap()
        })
    }

    proptest! {
        #[test]
        fn double_inverse_round_trips(m in (1usize..7).prop_flat_map(well_conditioned)) {
            let back = invert(&invert(&m).unwrap()).unwrap();
            prop_assert!(back.as_matrix().max_abs_diff(m.as_matrix()) <= 1e-10);
            let prod = invert(&m).unwrap().as_matrix().mul(m.as_matrix());
            prop_assert!(prod.max_abs_diff(&Matrix::identity(m.dim())) <= 1e-12 * m.dim() as f64 * 10.0);
        }

        #[test]
        fn sylvester_law_of_inertia(
            m in (1usize..7).prop_flat_map(well_conditioned),
            seed in proptest::collection::vec(-1.0f64..1.0, 49),
        ) {
            let n = m.dim();
            // Unit lower-triangular times a permutation-free shear keeps P invertible.
            let p = Matrix::from_fn(n, n, |i, j| {
                if i == j { 1.0 + seed[i].abs() } else if i > j { seed[i * 7 + j] } else { 0.5 * seed[j * 7 + i] * seed[i] }
            });
            prop_assume!(invert_general(&p).is_ok());
            let before = inertia(&m).unwrap();
            let after = inertia(&m.congruence(&p)).unwrap();
            prop_assert_eq!(before, after);
            // Diagonal signs of a diagonally dominant matrix fix its inertia.
            let positive = (0..n).filter(|&i| m[(i, i)] > 0.0).count();
            prop_assert_eq!(before.positive, positive);
        }
    }
}
