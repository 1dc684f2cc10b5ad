//! Small dense matrices and the symmetric eigensolver used as a numerical
//! oracle for the closed-form block spectra.
//!
//! The solver is the classic two-stage scheme: Householder reduction of a
//! dense symmetric matrix to tridiagonal form, followed by implicit QL with
//! Wilkinson shifts on the tridiagonal. Eigenvectors are accumulated through
//! both stages.

use std::ops::{Add, Index, IndexMut, Mul};

use num_traits::{One, Zero};

use crate::scalar::{cst, Real};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Clone + Zero> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn column(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map<U: Clone + Zero>(&self, f: impl Fn(&S) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<S: Clone + Zero + One> Matrix<S> {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { S::one() } else { S::zero() })
    }
}

impl<S> Matrix<S> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
}

impl<S> Matrix<S>
where
    S: Clone + Zero + Add<Output = S> + Mul<Output = S>,
{
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                for j in 0..rhs.cols {
                    let v = out[(i, j)].clone() + a.clone() * rhs[(k, j)].clone();
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }
}

impl<T: Real> Matrix<T> {
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (0..r).all(|c| self[(r, c)] == self[(c, r)]))
    }

    /// `max |AᵀA − I|`.
    pub fn orthogonality_residual(&self) -> T {
        let g = self.transpose().matmul(self);
        g.max_abs_diff(&Matrix::identity(g.rows))
    }
}

/// Eigen-decomposition of a real symmetric matrix; eigenvalues ascending,
/// `vectors[(i, j)]` is component `i` of eigenvector `j`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

/// Returned when the QL sweep exceeds its iteration cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoConvergence;

const MAX_SWEEPS_PER_VALUE: usize = 60;

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and sub/super diagonal `off` (`off.len() + 1 == diag.len()`).
pub fn tridiagonal_eigen<T: Real>(diag: &[T], off: &[T]) -> Result<SymmetricEigen<T>, NoConvergence> {
    let n = diag.len();
    assert!(n == 0 && off.is_empty() || off.len() + 1 == n, "tridiagonal shape mismatch");
    let mut d = diag.to_vec();
    // tql2 expects e[i] to hold the coupling between i-1 and i
    let mut e = vec![T::zero(); n];
    for (i, &x) in off.iter().enumerate() {
        e[i + 1] = x;
    }
    let mut z = Matrix::identity(n);
    tql2(&mut d, &mut e, &mut z)?;
    Ok(SymmetricEigen { values: d, vectors: z })
}

/// Eigen-decomposition of a dense real symmetric matrix.
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>) -> Result<SymmetricEigen<T>, NoConvergence> {
    assert!(a.is_square(), "symmetric_eigen needs a square matrix");
    let mut z = a.clone();
    let n = a.rows();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut z, &mut d, &mut e);
    tql2(&mut d, &mut e, &mut z)?;
    Ok(SymmetricEigen { values: d, vectors: z })
}

/// Householder reduction to tridiagonal form. On return `v` holds the
/// accumulated orthogonal transform, `d` the diagonal and `e[1..]` the
/// off-diagonal.
fn tred2<T: Real>(v: &mut Matrix<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    if n == 0 {
        return;
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale = scale + d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
                v[(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] = d[k] / scale;
                h = h + d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = T::zero();
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g = g + v[(k, j)] * d[k];
                    e[k] = e[k] + v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] = v[(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }

    // accumulate transformations
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] = v[(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = T::zero();
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix,
/// accumulating rotations into `v`. Eigenpairs are sorted ascending.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], v: &mut Matrix<T>) -> Result<(), NoConvergence> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let two = cst::<T>(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[n-1] is zero, so m < n always
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS_PER_VALUE {
                    return Err(NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }

    // selection sort keeps the column swaps simple
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for j in 0..n {
                let tmp = v[(j, i)];
                v[(j, i)] = v[(j, k)];
                v[(j, k)] = tmp;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &Matrix<f64>, eig: &SymmetricEigen<f64>) -> f64 {
        let av = a.matmul(&eig.vectors);
        let ve = Matrix::from_fn(a.rows(), a.rows(), |r, c| eig.vectors[(r, c)] * eig.values[c]);
        av.max_abs_diff(&ve)
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        let s = 2f64.sqrt();
        let eig = tridiagonal_eigen(&[-1.0, 0.0], &[s]).unwrap();
        assert!((eig.values[0] + 2.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_input_gives_sorted_permutation() {
        let eig = tridiagonal_eigen(&[3.0f64, -1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(eig.values, vec![-1.0, 2.0, 3.0]);
        for c in 0..3 {
            let col = eig.vectors.column(c);
            assert_eq!(col.iter().filter(|x| x.abs() == 1.0).count(), 1);
            assert_eq!(col.iter().filter(|x| **x == 0.0).count(), 2);
        }
    }

    #[test]
    fn dense_and_tridiagonal_agree() {
        let n = 7;
        let a = Matrix::from_fn(n, n, |r, c| {
            let (i, j) = (r.min(c) as f64, r.max(c) as f64);
            (1.0 + i * 0.3 - j * 0.7).sin() + if r == c { i } else { 0.0 }
        });
        let eig = symmetric_eigen(&a).unwrap();
        assert!(residual(&a, &eig) < 1e-12 * a.max_abs());
        assert!(eig.vectors.orthogonality_residual() < 1e-13);
        for w in eig.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let trace: f64 = (0..n).map(|i| a[(i, i)]).sum();
        let sum: f64 = eig.values.iter().sum();
        assert!((trace - sum).abs() < 1e-12);
    }

    #[test]
    fn empty_and_single() {
        let eig = tridiagonal_eigen::<f64>(&[], &[]).unwrap();
        assert!(eig.values.is_empty());
        let eig = symmetric_eigen(&Matrix::from_fn(1, 1, |_, _| 4.5f64)).unwrap();
        assert_eq!(eig.values, vec![4.5]);
        assert_eq!(eig.vectors[(0, 0)], 1.0);
    }

    #[test]
    fn works_in_single_precision() {
        let eig = tridiagonal_eigen(&[-1.0f32, 0.0], &[2f32.sqrt()]).unwrap();
        assert!((eig.values[0] + 2.0).abs() < 1e-5);
    }
}
