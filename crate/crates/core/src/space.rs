//! Truncated weighted spaces and coefficient vectors.
//!
//! Vectors keep raw coefficients; the metric is applied when inner products
//! are taken. A `TruncatedSpace` is any coordinate space with a diagonal
//! positive metric: the monomial coordinates of `span{1, z, ..., z^{D-1}}`
//! (metric = the Bergman weights), or the coordinates of an orthogonal basis
//! of a subspace (metric = squared basis norms).

use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{dyadic, Real, C};

#[derive(Clone, Debug)]
pub struct TruncatedSpace<R> {
    metric: Arc<[R]>,
}

impl<R: Real> TruncatedSpace<R> {
    /// A coordinate space with the given diagonal metric. Entries must be
    /// strictly positive.
    pub fn from_metric(metric: Vec<R>) -> Self {
        debug_assert!(metric.iter().all(|w| *w > R::zero()));
        TruncatedSpace {
            metric: metric.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.metric.len()
    }

    pub fn metric(&self) -> &[R] {
        &self.metric
    }

    /// True when both spaces carry the same metric.
    pub fn same_as(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.metric, &other.metric) || self.metric == other.metric
    }

    /// True when `self` is a leading block of `other`, so vectors of `self`
    /// embed into `other` by zero padding.
    pub fn is_prefix_of(&self, other: &Self) -> bool {
        self.dim() <= other.dim() && other.metric[..self.dim()] == self.metric[..]
    }

    /// `sum_n metric_n a_n conj(b_n)` on raw coefficient slices.
    pub fn inner_coeffs(&self, a: &[C<R>], b: &[C<R>]) -> C<R> {
        debug_assert_eq!(a.len(), self.dim());
        debug_assert_eq!(b.len(), self.dim());
        let mut acc = C::zero();
        for ((w, x), y) in self.metric.iter().zip(a).zip(b) {
            if x.is_zero() || y.is_zero() {
                continue;
            }
            acc = acc + (x * y.conj()).scale(w.clone());
        }
        acc
    }

    pub fn norm_sqr_coeffs(&self, a: &[C<R>]) -> R {
        let mut acc = R::zero();
        for (w, x) in self.metric.iter().zip(a) {
            if !x.is_zero() {
                acc = acc + w.clone() * x.norm_sqr();
            }
        }
        acc
    }
}

impl<R: Real> PartialEq for TruncatedSpace<R> {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector<R: Real> {
    space: TruncatedSpace<R>,
    coeffs: Vec<C<R>>,
}

impl<R: Real> CoefficientVector<R> {
    pub fn new(space: &TruncatedSpace<R>, coeffs: Vec<C<R>>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: coeffs.len(),
            });
        }
        Ok(CoefficientVector {
            space: space.clone(),
            coeffs,
        })
    }

    pub fn zero(space: &TruncatedSpace<R>) -> Self {
        CoefficientVector {
            space: space.clone(),
            coeffs: vec![C::zero(); space.dim()],
        }
    }

    /// The coordinate vector `e_k` (the monomial `z^k` in monomial coordinates).
    pub fn basis(space: &TruncatedSpace<R>, k: usize) -> Self {
        let mut v = Self::zero(space);
        v.coeffs[k] = C::new(R::one(), R::zero());
        v
    }

    pub fn from_real(space: &TruncatedSpace<R>, coeffs: &[R]) -> Result<Self> {
        Self::new(
            space,
            coeffs.iter().map(|r| Complex::new(r.clone(), R::zero())).collect(),
        )
    }

    pub fn space(&self) -> &TruncatedSpace<R> {
        &self.space
    }

    pub fn coeffs(&self) -> &[C<R>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C<R>> {
        self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn norm_sqr(&self) -> R {
        self.space.norm_sqr_coeffs(&self.coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|z| z.is_zero())
    }
}

/// Weighted inner product `<f, g> = sum w_n a_n conj(b_n)`.
pub fn inner<R: Real>(f: &CoefficientVector<R>, g: &CoefficientVector<R>) -> Result<C<R>> {
    if !f.space.same_as(&g.space) {
        return Err(Error::AmbientMismatch);
    }
    Ok(f.space.inner_coeffs(&f.coeffs, &g.coeffs))
}

/// Weighted norm, reported in f64 (it is irrational in general).
pub fn norm<R: Real>(f: &CoefficientVector<R>) -> f64 {
    f.norm_sqr().to_f64().sqrt()
}

const RANDOM_BITS: u32 = 20;

/// Deterministic pseudo-random vector.
///
/// Real and imaginary parts are drawn independently and uniformly from the
/// dyadic grid `k / 2^20`, `|k| <= 2^20`, i.e. a discretized uniform
/// distribution on the box `[-1, 1] x [-1, 1]`. Grid values are exact in both
/// scalar modes, so a seed names the same vector in float and exact mode.
pub fn random_vector<R: Real>(space: &TruncatedSpace<R>, seed: u64) -> CoefficientVector<R> {
    let coeffs = random_coeffs(space.dim(), seed);
    CoefficientVector {
        space: space.clone(),
        coeffs,
    }
}

pub(crate) fn random_coeffs<R: Real>(dim: usize, seed: u64) -> Vec<C<R>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 1i64 << RANDOM_BITS;
    (0..dim)
        .map(|_| {
            let re = rng.random_range(-bound..=bound);
            let im = rng.random_range(-bound..=bound);
            Complex::new(dyadic(re, RANDOM_BITS), dyadic(im, RANDOM_BITS))
        })
        .collect()
}
