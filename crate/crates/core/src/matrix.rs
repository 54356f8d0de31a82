//! Dense complex matrices over a generic real field, plus the handful of
//! factorizations the operator checks need.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{Real, C};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<C<R>>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<R>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[C<R>]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = d.clone();
        }
        m
    }

    /// Builds a `rows x columns.len()` matrix from column vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C<R>>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column {j} has the wrong length");
            for (i, v) in col.iter().enumerate() {
                m.data[i * cols + j] = v.clone();
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

    pub fn get(&self, i: usize, j: usize) -> &C<R> {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C<R>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<C<R>> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<C<R>>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.is_zero())
    }

    /// Conjugate transpose.
    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, s: &C<R>) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Scales row `i` by `left[i]` and column `j` by `right[j]`.
    pub fn scale_rows_cols(&self, left: &[R], right: &[R]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            let z = self.get(i, j);
            if z.is_zero() {
                C::zero()
            } else {
                z.scale(left[i].clone() * right[j].clone())
            }
        })
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = &out.data[idx] + a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C<R>]) -> Vec<C<R>> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = C::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc + a * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// Largest entry modulus, in f64.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.norm_sqr().to_f64().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(z.re.to_f64(), z.im.to_f64()))
                .collect(),
        }
    }

    /// Sub-block of rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j).clone())
    }
}

impl<R: Real> Add for &Matrix<R> {
    type Output = Matrix<R>;

    fn add(self, rhs: &Matrix<R>) -> Matrix<R> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<R: Real> Sub for &Matrix<R> {
    type Output = Matrix<R>;

    fn sub(self, rhs: &Matrix<R>) -> Matrix<R> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<R: Real> Mul for &Matrix<R> {
    type Output = Matrix<R>;

    fn mul(self, rhs: &Matrix<R>) -> Matrix<R> {
        self.matmul(rhs)
    }
}

/// Solves `K X = B` for Hermitian positive-definite `K` by an LDL^H
/// factorization. Returns `None` when a pivot is not strictly positive, which
/// is exactly the statement that `K` is not positive definite.
pub fn solve_hermitian_pd<R: Real>(k: &Matrix<R>, b: &Matrix<R>) -> Option<Matrix<R>> {
    let n = k.rows();
    assert_eq!(n, k.cols());
    assert_eq!(n, b.rows());
    let (l, d) = ldl(k)?;

    let mut x = b.clone();
    for c in 0..b.cols() {
        // L y = b
        for i in 0..n {
            let mut acc = x.get(i, c).clone();
            for p in 0..i {
                let lip = l.get(i, p);
                if !lip.is_zero() {
                    acc = acc - lip * x.get(p, c);
                }
            }
            x.set(i, c, acc);
        }
        // D z = y
        for (i, di) in d.iter().enumerate() {
            let v = x.get(i, c).unscale(di.clone());
            x.set(i, c, v);
        }
        // L^H x = z
        for i in (0..n).rev() {
            let mut acc = x.get(i, c).clone();
            for p in i + 1..n {
                let lpi = l.get(p, i);
                if !lpi.is_zero() {
                    acc = acc - lpi.conj() * x.get(p, c);
                }
            }
            x.set(i, c, acc);
        }
    }
    Some(x)
}

/// Exact (or float) positive-definiteness test via LDL^H pivots.
pub fn is_positive_definite<R: Real>(k: &Matrix<R>) -> bool {
    ldl(k).is_some()
}

fn ldl<R: Real>(k: &Matrix<R>) -> Option<(Matrix<R>, Vec<R>)> {
    let n = k.rows();
    let mut l = Matrix::<R>::identity(n);
    let mut d: Vec<R> = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj = k.get(j, j).re.clone();
        for (p, dp) in d.iter().enumerate() {
            let ljp = l.get(j, p);
            if !ljp.is_zero() {
                dj = dj - ljp.norm_sqr() * dp.clone();
            }
        }
        if dj <= R::zero() {
            return None;
        }
        for i in j + 1..n {
            let mut acc = k.get(i, j).clone();
            for (p, dp) in d.iter().enumerate() {
                let lip = l.get(i, p);
                let ljp = l.get(j, p);
                if !lip.is_zero() && !ljp.is_zero() {
                    acc = acc - (lip * ljp.conj()).scale(dp.clone());
                }
            }
            l.set(i, j, acc.unscale(dj.clone()));
        }
        d.push(dj);
    }
    Some((l, d))
}

/// Null space by reduced row echelon form, for exact fields.
pub fn exact_nullspace<R: Real>(m: &Matrix<R>) -> Vec<Vec<C<R>>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = a.get(p, j).clone();
                a.set(p, j, a.get(r, j).clone());
                a.set(r, j, tmp);
            }
        }
        let inv = C::<R>::one() / a.get(r, c);
        for j in c..cols {
            let v = a.get(r, j) * &inv;
            a.set(r, j, v);
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = a.get(i, c).clone();
            if f.is_zero() {
                continue;
            }
            for j in c..cols {
                let arj = a.get(r, j);
                if !arj.is_zero() {
                    let v = a.get(i, j) - &f * arj;
                    a.set(i, j, v);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }

    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![C::<R>::zero(); cols];
            v[fc] = C::one();
            for (pr, &pc) in pivots.iter().enumerate() {
                v[pc] = -a.get(pr, fc).clone();
            }
            v
        })
        .collect()
}

fn sqrt_metric<R: Real>(metric: &[R]) -> Vec<f64> {
    metric.iter().map(|w| w.to_f64().sqrt()).collect()
}

/// `G_cod^{1/2} M G_dom^{-1/2}` in f64: the matrix whose Euclidean geometry
/// is the metric geometry of `M`.
fn metric_normalized<R: Real>(m: &Matrix<R>, dom: &[R], cod: &[R]) -> DMatrix<Complex<f64>> {
    let f = m.to_f64();
    let left = sqrt_metric(cod);
    let right: Vec<f64> = sqrt_metric(dom).iter().map(|s| 1.0 / s).collect();
    DMatrix::from_fn(f.rows(), f.cols(), |i, j| f.get(i, j) * (left[i] * right[j]))
}

/// Singular values of a map between diagonal-metric spaces.
pub fn metric_singular_values<R: Real>(m: &Matrix<R>, dom: &[R], cod: &[R]) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    metric_normalized(m, dom, cod)
        .singular_values()
        .iter()
        .copied()
        .collect()
}

/// Operator norm of a map between diagonal-metric spaces.
pub fn metric_operator_norm<R: Real>(m: &Matrix<R>, dom: &[R], cod: &[R]) -> f64 {
    metric_singular_values(m, dom, cod)
        .into_iter()
        .fold(0.0, f64::max)
}

/// Float kernel: right singular vectors of the metric-normalized matrix whose
/// singular value is at most `tol`, mapped back to raw coordinates.
pub fn float_kernel(m: &Matrix<f64>, dom: &[f64], cod: &[f64], tol: f64) -> Vec<Vec<C<f64>>> {
    let cols = m.cols();
    if cols == 0 {
        return Vec::new();
    }
    let a = metric_normalized(m, dom, cod);
    // Pad wide matrices with zero rows so the SVD returns a full right basis.
    let a = if a.nrows() < cols {
        let mut padded = DMatrix::<Complex<f64>>::zeros(cols, cols);
        padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(&a);
        padded
    } else {
        a
    };
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let inv_sqrt: Vec<f64> = dom.iter().map(|w| 1.0 / w.sqrt()).collect();
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| {
            (0..cols)
                .map(|j| v_t[(i, j)].conj() * inv_sqrt[j])
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> C<BigRational> {
        Complex::new(BigRational::new(BigInt::from(n), BigInt::from(d)), BigRational::zero())
    }

    #[test]
    fn exact_hermitian_solve_recovers_inverse() {
        let k = Matrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) => q(4, 1),
            (1, 1) => q(3, 1),
            (2, 2) => q(2, 1),
            (0, 1) | (1, 0) => q(1, 1),
            (1, 2) | (2, 1) => q(1, 2),
            _ => q(0, 1),
        });
        let inv = solve_hermitian_pd(&k, &Matrix::identity(3)).unwrap();
        assert_eq!(k.matmul(&inv), Matrix::identity(3));
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let k = Matrix::from_fn(2, 2, |i, j| if i == j { q(1, 1) } else { q(2, 1) });
        assert!(!is_positive_definite(&k));
        assert!(solve_hermitian_pd(&k, &Matrix::identity(2)).is_none());
    }

    #[test]
    fn exact_nullspace_of_rank_one() {
        let m = Matrix::from_fn(2, 3, |i, j| q(((i + 1) * (j + 1)) as i64, 1));
        let ker = exact_nullspace(&m);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            assert!(m.mul_vec(v).iter().all(|z| z.is_zero()));
        }
    }

    #[test]
    fn float_kernel_of_wide_matrix() {
        let m = Matrix::<f64>::from_fn(1, 3, |_, j| Complex::new(j as f64, 0.0));
        let ker = float_kernel(&m, &[1.0, 0.5, 0.25], &[1.0], 1e-12);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            assert!(m.mul_vec(v)[0].norm() < 1e-12);
        }
    }

    #[test]
    fn metric_norm_of_weighted_identity_embedding() {
        // identity from weights (1, 1/2) into weights (1, 1/8): norm is 1/2 on the
        // second coordinate, 1 on the first.
        let m = Matrix::<f64>::identity(2);
        let sv = metric_singular_values(&m, &[1.0, 0.5], &[1.0, 0.125]);
        let mut sv = sv;
        sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((sv[0] - 0.5).abs() < 1e-15 && (sv[1] - 1.0).abs() < 1e-15);
    }
}
