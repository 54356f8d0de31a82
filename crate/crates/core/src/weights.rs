//! Weight sequence of the standard weighted Bergman space and the shift
//! coefficients derived from it.
//!
//! The weights are `w_n = n! Gamma(2+a) / Gamma(n+2+a)`, produced here by the
//! recurrence `w_0 = 1`, `w_{n+1} = w_n (n+1)/(n+2+a)`, which never overflows
//! and stays exact over the rationals. The shift coefficient
//! `C(N,a,n) = w_{n+N} / w_n` is computed as its own N-factor product so that
//! identities between the two can be checked rather than assumed.

use crate::error::{Error, Result};
use crate::scalar::{Alpha, Real};
use crate::space::TruncatedSpace;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightParams {
    alpha: Alpha,
    multiplicity: usize,
    dim: usize,
}

impl WeightParams {
    /// Requires `alpha > -1`, `multiplicity >= 1` and `dim >= multiplicity + 1`.
    pub fn new(alpha: Alpha, multiplicity: usize, dim: usize) -> Result<Self> {
        alpha.validate()?;
        if multiplicity == 0 {
            return Err(Error::InvalidParams(
                "shift multiplicity N must be at least 1".into(),
            ));
        }
        if dim < multiplicity + 1 {
            return Err(Error::InvalidParams(format!(
                "truncation dimension {dim} must be at least N + 1 = {}",
                multiplicity + 1
            )));
        }
        Ok(WeightParams {
            alpha,
            multiplicity,
            dim,
        })
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence<R> {
    params: WeightParams,
    values: Vec<R>,
}

impl<R: Real> WeightSequence<R> {
    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: usize) -> Option<&R> {
        self.values.get(n)
    }

    /// The truncated space spanned by the first `dim` monomials.
    pub fn space(&self, dim: usize) -> Result<TruncatedSpace<R>> {
        if dim > self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.values.len(),
            });
        }
        Ok(TruncatedSpace::from_metric(self.values[..dim].to_vec()))
    }
}

/// The first `params.dim()` weights in the scalar field `R`.
pub fn weight_sequence<R: Real>(params: &WeightParams) -> Result<WeightSequence<R>> {
    let alpha = R::from_alpha(params.alpha())?;
    let values = weights_with::<R>(&alpha, params.dim());
    Ok(WeightSequence {
        params: params.clone(),
        values,
    })
}

/// Weights for `dim` degrees with a given `alpha` already in the field.
pub(crate) fn weights_with<R: Real>(alpha: &R, dim: usize) -> Vec<R> {
    R::weight_recurrence(alpha, dim)
}

/// The recurrence evaluated directly in the field.
pub(crate) fn plain_recurrence<R: Real>(alpha: &R, dim: usize) -> Vec<R> {
    let two = R::from_i64(2);
    let mut values = Vec::with_capacity(dim);
    let mut w = R::one();
    for n in 0..dim {
        values.push(w.clone());
        let num = R::from_usize(n + 1);
        let den = R::from_usize(n) + two.clone() + alpha.clone();
        w = w * num / den;
    }
    values
}

/// The recurrence carried in double-double arithmetic and rounded once per
/// weight, so rounding does not accumulate over long sequences.
pub(crate) fn compensated_recurrence(alpha: f64, dim: usize) -> Vec<f64> {
    let mut values = Vec::with_capacity(dim);
    let (mut hi, mut lo) = (1.0f64, 0.0f64);
    for n in 0..dim {
        values.push(hi + lo);
        let num = (n + 1) as f64;
        let (dh, dl) = two_sum((n + 2) as f64, alpha);
        // (hi, lo) * num, exactly up to the low-order product.
        let (p, e) = two_prod(hi, num);
        let (p, e) = quick_two_sum(p, e + lo * num);
        // Long division of (p, e) by (dh, dl).
        let q1 = p / dh;
        let (r, re) = two_prod(q1, dh);
        let rem = ((p - r) - re + e) - q1 * dl;
        let q2 = rem / dh;
        (hi, lo) = quick_two_sum(q1, q2);
    }
    values
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    (s, (a - (s - v)) + (b - v))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `C(N, alpha, n) = prod_{j=1..N} (n+j) / (n+j+1+alpha)`.
pub fn shift_coeff<R: Real>(multiplicity: usize, alpha: &Alpha, n: usize) -> Result<R> {
    let a = R::from_alpha(alpha)?;
    Ok(shift_coeff_with(multiplicity, &a, n))
}

pub(crate) fn shift_coeff_with<R: Real>(multiplicity: usize, alpha: &R, n: usize) -> R {
    (1..=multiplicity).fold(R::one(), |acc, j| {
        let m = R::from_usize(n + j);
        acc * m.clone() / (m + R::one() + alpha.clone())
    })
}

/// Constant by which `A^m` scales the coefficient of `z^n` as it moves it to
/// degree `n + mN`. Equals `w_n / w_{n+mN}`, the product of `1/C` along the
/// ladder `n, n+N, ..., n+(m-1)N`.
pub fn iterated_coeff<R: Real>(multiplicity: usize, alpha: &Alpha, n: usize, m: usize) -> Result<R> {
    if m == 0 {
        return Err(Error::InvalidParams("iteration count m must be at least 1".into()));
    }
    let a = R::from_alpha(alpha)?;
    Ok(iterated_coeff_with(multiplicity, &a, n, m))
}

pub(crate) fn iterated_coeff_with<R: Real>(multiplicity: usize, alpha: &R, n: usize, m: usize) -> R {
    // w_n / w_{n+mN} = prod_{k=n}^{n+mN-1} (k+2+alpha)/(k+1)
    (n..n + m * multiplicity).fold(R::one(), |acc, k| {
        acc * (R::from_usize(k + 2) + alpha.clone()) / R::from_usize(k + 1)
    })
}

/// The bounded-below constant `(3 + alpha)^{-N}`.
pub fn lower_bound<R: Real>(multiplicity: usize, alpha: &Alpha) -> Result<R> {
    let a = R::from_alpha(alpha)?;
    Ok(lower_bound_with(multiplicity, &a))
}

pub(crate) fn lower_bound_with<R: Real>(multiplicity: usize, alpha: &R) -> R {
    let base = R::from_i64(3) + alpha.clone();
    (0..multiplicity).fold(R::one(), |acc, _| acc / base.clone())
}
