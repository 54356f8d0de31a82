//! Scalar modes.
//!
//! Every routine in the crate is generic over a real field `R: Real`; vector
//! and matrix entries are `Complex<R>`. Two fields are provided: `f64` for
//! floating-point sweeps and `BigRational` for exact verification when the
//! weight parameter is rational.

use std::fmt;
use std::fmt::Debug;
use std::ops::Neg;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, Matrix};
use crate::weights;

/// Complex scalar over the real field `R`.
pub type C<R> = Complex<R>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScalarMode {
    Float64,
    ExactRational,
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarMode::Float64 => f.write_str("float64"),
            ScalarMode::ExactRational => f.write_str("exact"),
        }
    }
}

impl FromStr for ScalarMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" | "float64" | "f64" => Ok(ScalarMode::Float64),
            "exact" | "rational" | "exact-rational" => Ok(ScalarMode::ExactRational),
            _ => Err(Error::Parse {
                what: "scalar mode",
                input: s.to_string(),
            }),
        }
    }
}

/// The weight parameter alpha.
///
/// Keeps a rational value whenever one is known (a `p/q` literal, a finite
/// decimal literal, or an explicit ratio), so that the same parameter can
/// drive both scalar modes.
#[derive(Clone, Debug, PartialEq)]
pub struct Alpha {
    value: f64,
    exact: Option<BigRational>,
    ratio_syntax: bool,
}

impl Alpha {
    /// An alpha known only as a floating-point value. Exact mode rejects it.
    pub fn from_f64(value: f64) -> Self {
        Alpha {
            value,
            exact: None,
            ratio_syntax: false,
        }
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        let q = BigRational::new(BigInt::from(numer), BigInt::from(denom));
        Self::from_rational(q)
    }

    pub fn from_rational(q: BigRational) -> Self {
        Alpha {
            value: ToPrimitive::to_f64(&q).unwrap_or(f64::NAN),
            exact: Some(q),
            ratio_syntax: true,
        }
    }

    /// Parses `p/q`, a finite decimal literal such as `-0.5`, or any other
    /// float literal (which then has no exact value).
    pub fn parse(s: &str) -> Result<Self> {
        let err = || Error::Parse {
            what: "alpha",
            input: s.to_string(),
        };
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            return Ok(Self::from_rational(BigRational::new(p, q)));
        }
        if let Some(q) = parse_decimal(t) {
            return Ok(Alpha {
                value: ToPrimitive::to_f64(&q).unwrap_or(f64::NAN),
                exact: Some(q),
                ratio_syntax: false,
            });
        }
        let value: f64 = t.parse().map_err(|_| err())?;
        if !value.is_finite() {
            return Err(err());
        }
        Ok(Self::from_f64(value))
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    /// True when the literal used `p/q` syntax.
    pub fn is_ratio_literal(&self) -> bool {
        self.ratio_syntax
    }

    pub fn is_valid(&self) -> bool {
        match &self.exact {
            Some(q) => *q > -BigRational::one(),
            None => self.value.is_finite() && self.value > -1.0,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidAlpha(self.to_string()))
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.exact, self.ratio_syntax) {
            (Some(q), true) => write!(f, "{q}"),
            _ => write!(f, "{}", self.value),
        }
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits_ok = |d: &str| d.bytes().all(|b| b.is_ascii_digit());
    if !digits_ok(int_part) || !digits_ok(frac_part) {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let q = BigRational::new(numer, denom);
    Some(if neg { -q } else { q })
}

/// A real scalar field the linear algebra is generic over.
pub trait Real:
    Clone + Debug + PartialEq + PartialOrd + Num + Neg<Output = Self> + Signed + Send + Sync + 'static
{
    const MODE: ScalarMode;

    fn from_i64(n: i64) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_i64(n as i64)
    }

    /// Brings alpha into this field; exact mode requires a rational alpha.
    fn from_alpha(alpha: &Alpha) -> Result<Self>;

    fn to_f64(&self) -> f64;

    /// Square root when the field can represent it.
    fn sqrt_opt(&self) -> Option<Self>;

    /// Rank decision used by Gram-Schmidt: is a residual negligible next to
    /// the norm of the vector it came from?
    fn is_negligible(residual_sq: &Self, original_sq: &Self) -> bool;

    /// Basis of `{v : m v = 0}` (exact) or `{v : |m v| <= tol |v|}` (float),
    /// with norms taken in the given diagonal metrics.
    fn kernel_vectors(m: &Matrix<Self>, dom: &[Self], cod: &[Self], tol: f64)
        -> Vec<Vec<C<Self>>>;

    /// Rejects Gram maps too close to singular to invert reliably.
    fn check_conditioning(gram: &Matrix<Self>, metric: &[Self]) -> Result<()>;

    fn render(&self) -> String;

    /// The weights `w_0 = 1`, `w_{n+1} = w_n (n+1)/(n+2+alpha)` for `dim` degrees.
    fn weight_recurrence(alpha: &Self, dim: usize) -> Vec<Self> {
        weights::plain_recurrence(alpha, dim)
    }

    fn is_exact() -> bool {
        Self::MODE == ScalarMode::ExactRational
    }
}

/// Relative tolerance for Gram-Schmidt rank decisions in float mode.
pub const RANK_TOL: f64 = 1e-10;

/// Condition-number ceiling for the Gram solve in float mode.
pub const CONDITION_LIMIT: f64 = 1e12;

impl Real for f64 {
    const MODE: ScalarMode = ScalarMode::Float64;

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_alpha(alpha: &Alpha) -> Result<Self> {
        alpha.validate()?;
        Ok(alpha.value())
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt_opt(&self) -> Option<Self> {
        Some(self.sqrt())
    }

    fn is_negligible(residual_sq: &Self, original_sq: &Self) -> bool {
        *residual_sq <= RANK_TOL * RANK_TOL * *original_sq
    }

    fn kernel_vectors(m: &Matrix<Self>, dom: &[Self], cod: &[Self], tol: f64) -> Vec<Vec<C<Self>>> {
        matrix::float_kernel(m, dom, cod, tol)
    }

    fn check_conditioning(gram: &Matrix<Self>, metric: &[Self]) -> Result<()> {
        let sv = matrix::metric_singular_values(gram, metric, metric);
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if sv.is_empty() || condition <= CONDITION_LIMIT {
            Ok(())
        } else {
            Err(Error::SingularGram { condition })
        }
    }

    fn render(&self) -> String {
        format!("{self:e}")
    }

    fn weight_recurrence(alpha: &Self, dim: usize) -> Vec<Self> {
        weights::compensated_recurrence(*alpha, dim)
    }
}

impl Real for BigRational {
    const MODE: ScalarMode = ScalarMode::ExactRational;

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_alpha(alpha: &Alpha) -> Result<Self> {
        alpha.validate()?;
        alpha
            .exact()
            .cloned()
            .ok_or_else(|| Error::ModeMismatch(alpha.to_string()))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Ratios of huge integers can defeat the direct conversion.
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    fn sqrt_opt(&self) -> Option<Self> {
        None
    }

    fn is_negligible(residual_sq: &Self, _original_sq: &Self) -> bool {
        residual_sq.is_zero()
    }

    fn kernel_vectors(m: &Matrix<Self>, _dom: &[Self], _cod: &[Self], _tol: f64) -> Vec<Vec<C<Self>>> {
        matrix::exact_nullspace(m)
    }

    fn check_conditioning(_gram: &Matrix<Self>, _metric: &[Self]) -> Result<()> {
        // Singularity is detected exactly by the solve itself.
        Ok(())
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

/// Converts a float that is exactly representable (a dyadic rational) into `R`.
pub(crate) fn dyadic<R: Real>(numer: i64, log2_denom: u32) -> R {
    R::from_i64(numer) / R::from_i64(1i64 << log2_denom)
}
