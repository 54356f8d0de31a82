//! Linear maps between truncated spaces, the graded shift, restrictions to
//! subspaces and the auxiliary operator `A = T (T*T)^{-1}`.
//!
//! The shift is kept as an exact rectangular map `V_d -> V_{d+N}` so that no
//! coefficient is lost at the top of the truncation. Adjoints are always taken
//! with respect to the weighted metrics, `G_dom^{-1} M^H G_cod`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::{self, Matrix};
use crate::scalar::{Alpha, Real, C};
use crate::space::{CoefficientVector, TruncatedSpace};
use crate::subspaces::{is_invariant, residue_subspace, Subspace};
use crate::weights::shift_coeff;

#[derive(Clone, Debug)]
pub struct LinearMap<R: Real> {
    domain: TruncatedSpace<R>,
    codomain: TruncatedSpace<R>,
    matrix: Matrix<R>,
}

impl<R: Real> LinearMap<R> {
    pub fn new(domain: &TruncatedSpace<R>, codomain: &TruncatedSpace<R>, matrix: Matrix<R>) -> Result<Self> {
        if matrix.rows() != codomain.dim() {
            return Err(Error::DimensionMismatch {
                expected: codomain.dim(),
                found: matrix.rows(),
            });
        }
        if matrix.cols() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: matrix.cols(),
            });
        }
        Ok(LinearMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix,
        })
    }

    pub fn identity(space: &TruncatedSpace<R>) -> Self {
        LinearMap {
            domain: space.clone(),
            codomain: space.clone(),
            matrix: Matrix::identity(space.dim()),
        }
    }

    pub fn zero(domain: &TruncatedSpace<R>, codomain: &TruncatedSpace<R>) -> Self {
        LinearMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix: Matrix::zeros(codomain.dim(), domain.dim()),
        }
    }

    pub fn domain(&self) -> &TruncatedSpace<R> {
        &self.domain
    }

    pub fn codomain(&self) -> &TruncatedSpace<R> {
        &self.codomain
    }

    pub fn matrix(&self) -> &Matrix<R> {
        &self.matrix
    }

    pub fn apply(&self, v: &CoefficientVector<R>) -> Result<CoefficientVector<R>> {
        if !v.space().same_as(&self.domain) {
            return Err(Error::AmbientMismatch);
        }
        CoefficientVector::new(&self.codomain, self.matrix.mul_vec(v.coeffs()))
    }

    pub fn apply_coeffs(&self, v: &[C<R>]) -> Vec<C<R>> {
        self.matrix.mul_vec(v)
    }

    /// The metric adjoint: `<m v, w>_cod = <v, m* w>_dom`.
    pub fn adjoint(&self) -> Self {
        let gd = self.domain.metric();
        let gc = self.codomain.metric();
        let m = Matrix::from_fn(self.domain.dim(), self.codomain.dim(), |j, i| {
            let z = self.matrix.get(i, j);
            if z.is_zero() {
                C::zero()
            } else {
                z.conj().scale(gc[i].clone()).unscale(gd[j].clone())
            }
        });
        LinearMap {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            matrix: m,
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.codomain.same_as(&self.domain) {
            return Err(Error::AmbientMismatch);
        }
        Ok(LinearMap {
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: self.matrix.matmul(&inner.matrix),
        })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.domain.same_as(&other.domain) && self.codomain.same_as(&other.codomain) {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    pub fn subtract(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(LinearMap {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(LinearMap {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Singular values with respect to the two metrics.
    pub fn singular_values(&self) -> Vec<f64> {
        matrix::metric_singular_values(&self.matrix, self.domain.metric(), self.codomain.metric())
    }

    pub fn operator_norm(&self) -> f64 {
        matrix::metric_operator_norm(&self.matrix, self.domain.metric(), self.codomain.metric())
    }

    pub fn min_singular_value(&self) -> f64 {
        let sv = self.singular_values();
        if self.domain.dim() > self.codomain.dim() {
            return 0.0;
        }
        sv.into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Metric norm of `self - other`, with an exact-zero flag.
    pub fn distance(&self, other: &Self) -> Result<Discrepancy> {
        let diff = self.subtract(other)?;
        Ok(Discrepancy::of(&diff))
    }
}

/// Size of an operator that should vanish.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Discrepancy {
    pub norm: f64,
    pub exact_zero: bool,
}

impl Discrepancy {
    pub fn of<R: Real>(m: &LinearMap<R>) -> Self {
        if m.matrix().is_zero() {
            return Discrepancy {
                norm: 0.0,
                exact_zero: true,
            };
        }
        let norm = m.operator_norm();
        Discrepancy {
            // A nonzero exact difference must not print as zero.
            norm: if norm > 0.0 { norm } else { f64::MIN_POSITIVE },
            exact_zero: false,
        }
    }

    pub fn zero() -> Self {
        Discrepancy {
            norm: 0.0,
            exact_zero: true,
        }
    }

    pub fn max(self, other: Self) -> Self {
        Discrepancy {
            norm: self.norm.max(other.norm),
            exact_zero: self.exact_zero && other.exact_zero,
        }
    }
}

pub fn identity<R: Real>(space: &TruncatedSpace<R>) -> LinearMap<R> {
    LinearMap::identity(space)
}

pub fn adjoint<R: Real>(m: &LinearMap<R>) -> LinearMap<R> {
    m.adjoint()
}

pub fn compose<R: Real>(f: &LinearMap<R>, g: &LinearMap<R>) -> Result<LinearMap<R>> {
    f.compose(g)
}

pub fn apply<R: Real>(m: &LinearMap<R>, v: &CoefficientVector<R>) -> Result<CoefficientVector<R>> {
    m.apply(v)
}

pub fn subtract<R: Real>(f: &LinearMap<R>, g: &LinearMap<R>) -> Result<LinearMap<R>> {
    f.subtract(g)
}

fn check_graded<R: Real>(small: &TruncatedSpace<R>, large: &TruncatedSpace<R>, multiplicity: usize) -> Result<()> {
    if large.dim() != small.dim() + multiplicity {
        return Err(Error::DimensionMismatch {
            expected: small.dim() + multiplicity,
            found: large.dim(),
        });
    }
    if !small.is_prefix_of(large) {
        return Err(Error::AmbientMismatch);
    }
    Ok(())
}

/// `z^n -> z^{n+N}` as the exact map `V_d -> V_{d+N}`.
pub fn shift<R: Real>(
    domain: &TruncatedSpace<R>,
    codomain: &TruncatedSpace<R>,
    multiplicity: usize,
) -> Result<LinearMap<R>> {
    check_graded(domain, codomain, multiplicity)?;
    let d = domain.dim();
    let m = Matrix::from_fn(d + multiplicity, d, |i, j| {
        if i == j + multiplicity {
            C::one()
        } else {
            C::zero()
        }
    });
    LinearMap::new(domain, codomain, m)
}

/// The adjoint of the shift written out coefficientwise:
/// `b_{N+n} -> C(N, alpha, n) b_{N+n}` at degree `n`; degrees below `N` vanish.
pub fn shift_adjoint<R: Real>(
    domain: &TruncatedSpace<R>,
    codomain: &TruncatedSpace<R>,
    multiplicity: usize,
    alpha: &Alpha,
) -> Result<LinearMap<R>> {
    let coeffs = (0..codomain.dim())
        .map(|n| shift_coeff::<R>(multiplicity, alpha, n))
        .collect::<Result<Vec<R>>>()?;
    shift_adjoint_from(domain, codomain, multiplicity, &coeffs)
}

/// `shift_adjoint` with caller-supplied coefficients `C_0, C_1, ...`.
pub fn shift_adjoint_from<R: Real>(
    domain: &TruncatedSpace<R>,
    codomain: &TruncatedSpace<R>,
    multiplicity: usize,
    coeffs: &[R],
) -> Result<LinearMap<R>> {
    check_graded(codomain, domain, multiplicity)?;
    if coeffs.len() < codomain.dim() {
        return Err(Error::DimensionMismatch {
            expected: codomain.dim(),
            found: coeffs.len(),
        });
    }
    let m = Matrix::from_fn(codomain.dim(), domain.dim(), |i, j| {
        if j == i + multiplicity {
            Complex::new(coeffs[i].clone(), R::zero())
        } else {
            C::zero()
        }
    });
    LinearMap::new(domain, codomain, m)
}

/// Tolerance for the invariance precondition of `restrict` in float mode.
pub const RESTRICT_TOL: f64 = 1e-10;

/// `T = S|_H` as a map from the coordinates of `H` to the coordinates of
/// `H'`, the extension of `H` to the codomain truncation.
#[derive(Clone, Debug)]
pub struct Restriction<R: Real> {
    map: LinearMap<R>,
    domain: Subspace<R>,
    codomain: Subspace<R>,
}

impl<R: Real> Restriction<R> {
    pub fn map(&self) -> &LinearMap<R> {
        &self.map
    }

    pub fn domain_subspace(&self) -> &Subspace<R> {
        &self.domain
    }

    pub fn codomain_subspace(&self) -> &Subspace<R> {
        &self.codomain
    }

    pub fn into_parts(self) -> (LinearMap<R>, Subspace<R>, Subspace<R>) {
        (self.map, self.domain, self.codomain)
    }
}

/// Restricts a degree-raising map to an invariant subspace.
///
/// The extension `H'` of `H` is the residue subspace with the same classes
/// when `H` carries a residue tag, and `span(H ∪ S H)` otherwise. `H` must be
/// invariant under `S` at finite section (see `is_invariant`) and `S H` must
/// lie in `H'`.
pub fn restrict<R: Real>(s: &LinearMap<R>, h: &Subspace<R>) -> Result<Restriction<R>> {
    if !h.ambient().same_as(s.domain()) {
        return Err(Error::AmbientMismatch);
    }
    let tol = if R::is_exact() { 0.0 } else { RESTRICT_TOL };
    let inv = is_invariant(s, h, tol)?;
    if !inv.invariant {
        return Err(Error::NotInvariant {
            residual: inv.residual,
        });
    }

    let images: Vec<Vec<C<R>>> = h.basis().iter().map(|b| s.apply_coeffs(b)).collect();
    let extension = match h.tag() {
        Some(tag) if s.domain().is_prefix_of(s.codomain()) => residue_subspace(s.codomain(), tag),
        _ => {
            let padded = h.pad_to(s.codomain()).unwrap_or_else(|_| Subspace::zero(s.codomain()));
            Subspace::span(s.codomain(), padded.basis().iter().cloned().chain(images.iter().cloned()))
        }
    };

    let mut worst: f64 = 0.0;
    for (img, g) in images.iter().zip(h.sq_norms()) {
        let r = extension.residual_sqr(img) / g.clone();
        worst = worst.max(r.to_f64().sqrt());
    }
    if worst > tol {
        return Err(Error::NotInvariant { residual: worst });
    }

    let columns: Vec<Vec<C<R>>> = images.iter().map(|img| extension.coordinates(img)).collect();
    let m = Matrix::from_columns(extension.dim(), &columns);
    let map = LinearMap::new(&h.coords_space(), &extension.coords_space(), m)?;
    Ok(Restriction {
        map,
        domain: h.clone(),
        codomain: extension,
    })
}

/// `A = T (T*T)^{-1}`.
///
/// `T*T` is inverted entrywise when it is diagonal (always the case for
/// shift restrictions to residue subspaces) and by a Hermitian
/// positive-definite solve otherwise, after a conditioning guard.
pub fn build_a<R: Real>(t: &LinearMap<R>) -> Result<LinearMap<R>> {
    let gram = t.adjoint().compose(t)?;
    let inverse = invert_gram(&gram)?;
    t.compose(&inverse)
}

fn invert_gram<R: Real>(gram: &LinearMap<R>) -> Result<LinearMap<R>> {
    let n = gram.domain().dim();
    let g = gram.matrix();
    R::check_conditioning(g, gram.domain().metric())?;

    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || g.get(i, j).is_zero()));
    if diagonal {
        let mut inv = Vec::with_capacity(n);
        for i in 0..n {
            let d = g.get(i, i);
            if d.is_zero() {
                return Err(Error::SingularGram {
                    condition: f64::INFINITY,
                });
            }
            inv.push(C::<R>::one() / d);
        }
        return LinearMap::new(gram.domain(), gram.domain(), Matrix::from_diagonal(&inv));
    }

    // G (T*T) is Hermitian positive definite; (G T*T) X = G gives X = (T*T)^{-1}.
    let metric: Vec<C<R>> = gram
        .domain()
        .metric()
        .iter()
        .map(|w| Complex::new(w.clone(), R::zero()))
        .collect();
    let gm = Matrix::from_diagonal(&metric);
    let k = gm.matmul(g);
    let x = matrix::solve_hermitian_pd(&k, &gm).ok_or(Error::SingularGram {
        condition: f64::INFINITY,
    })?;
    LinearMap::new(gram.domain(), gram.domain(), x)
}

/// The graded tower `H_0 -> H_1 -> ... -> H_L` with `H_j ⊂ V_{D+jN}`, the
/// restricted shifts `T_j : H_j -> H_{j+1}` and the auxiliary operators
/// `A_j = T_j (T_j* T_j)^{-1}` with their adjoints.
#[derive(Clone, Debug)]
pub struct ShiftLadder<R: Real> {
    multiplicity: usize,
    levels: Vec<Subspace<R>>,
    shifts: Vec<LinearMap<R>>,
    t: Vec<LinearMap<R>>,
    a: Vec<LinearMap<R>>,
    a_adj: Vec<LinearMap<R>>,
}

impl<R: Real> ShiftLadder<R> {
    /// `weights` must cover degrees below `D + depth * N`, where `D` is the
    /// dimension of `base`'s ambient space.
    pub fn new(weights: &[R], multiplicity: usize, base: &Subspace<R>, depth: usize) -> Result<Self> {
        let d = base.ambient().dim();
        let needed = d + depth * multiplicity;
        if weights.len() < needed {
            return Err(Error::DimensionMismatch {
                expected: needed,
                found: weights.len(),
            });
        }
        let space = |k: usize| TruncatedSpace::from_metric(weights[..d + k * multiplicity].to_vec());
        if !base.ambient().same_as(&space(0)) {
            return Err(Error::AmbientMismatch);
        }

        let mut ladder = ShiftLadder {
            multiplicity,
            levels: vec![base.clone()],
            shifts: Vec::new(),
            t: Vec::new(),
            a: Vec::new(),
            a_adj: Vec::new(),
        };
        for j in 0..depth {
            let h = &ladder.levels[j];
            let s = shift(h.ambient(), &space(j + 1), multiplicity)?;
            let (t, _, next) = restrict(&s, h)?.into_parts();
            let a = build_a(&t)?;
            ladder.a_adj.push(a.adjoint());
            ladder.a.push(a);
            ladder.t.push(t);
            ladder.shifts.push(s);
            ladder.levels.push(next);
        }
        Ok(ladder)
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn depth(&self) -> usize {
        self.t.len()
    }

    pub fn level(&self, j: usize) -> &Subspace<R> {
        &self.levels[j]
    }

    pub fn ambient_shift(&self, j: usize) -> &LinearMap<R> {
        &self.shifts[j]
    }

    pub fn t(&self, j: usize) -> &LinearMap<R> {
        &self.t[j]
    }

    pub fn a(&self, j: usize) -> &LinearMap<R> {
        &self.a[j]
    }

    pub fn a_adjoint(&self, j: usize) -> &LinearMap<R> {
        &self.a_adj[j]
    }

    /// `T^k : H_from -> H_{from+k}`.
    pub fn t_power(&self, from: usize, k: usize) -> LinearMap<R> {
        self.power(&self.t, from, k)
    }

    /// `A^k : H_from -> H_{from+k}`.
    pub fn a_power(&self, from: usize, k: usize) -> LinearMap<R> {
        self.power(&self.a, from, k)
    }

    fn power(&self, maps: &[LinearMap<R>], from: usize, k: usize) -> LinearMap<R> {
        let mut acc = LinearMap::identity(&self.levels[from].coords_space());
        for m in &maps[from..from + k] {
            acc = m.compose(&acc).expect("ladder levels chain");
        }
        acc
    }

    /// `(A*)^k : H_to+k -> H_to`.
    pub fn a_adjoint_power(&self, to: usize, k: usize) -> LinearMap<R> {
        let mut acc = LinearMap::identity(&self.levels[to + k].coords_space());
        for j in (to..to + k).rev() {
            acc = self.a_adj[j].compose(&acc).expect("ladder levels chain");
        }
        acc
    }

    /// Expresses a map between two ladder levels in ambient monomial
    /// coordinates: embed after, extract before. It acts as zero on the
    /// orthogonal complement of the source level.
    pub fn to_monomial(&self, m: &LinearMap<R>, from: usize, to: usize) -> LinearMap<R> {
        let src = &self.levels[from];
        let dst = &self.levels[to];
        let extract = src.embedding().adjoint();
        dst.embedding()
            .compose(m)
            .and_then(|x| x.compose(&extract))
            .expect("ladder levels chain")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{inner, random_vector};
    use crate::subspaces::{residue_subspace_of, unit};
    use crate::weights::{weight_sequence, WeightParams};
    use num_rational::BigRational;

    fn weights<R: Real>(alpha: Alpha, len: usize) -> Vec<R> {
        let p = WeightParams::new(alpha, 1, len).unwrap();
        weight_sequence::<R>(&p).unwrap().values().to_vec()
    }

    fn graded<R: Real>(alpha: Alpha, n: usize, d: usize) -> (TruncatedSpace<R>, TruncatedSpace<R>) {
        let w = weights::<R>(alpha, d + n);
        (
            TruncatedSpace::from_metric(w[..d].to_vec()),
            TruncatedSpace::from_metric(w),
        )
    }

    fn q(n: i64, d: i64) -> C<BigRational> {
        Complex::new(BigRational::new(n.into(), d.into()), BigRational::zero())
    }

    #[test]
    fn shift_moves_monomials() {
        let (v, w) = graded::<f64>(Alpha::from_ratio(0, 1), 1, 2);
        let s = shift(&v, &w, 1).unwrap();
        assert_eq!(s.apply_coeffs(&unit(2, 0)), unit(3, 1));
        assert_eq!(s.apply_coeffs(&unit(2, 1)), unit(3, 2));
        assert!(shift(&v, &v, 1).is_err());
    }

    #[test]
    fn shift_adjoint_examples() {
        let (v, w) = graded::<BigRational>(Alpha::from_ratio(0, 1), 1, 3);
        let adj = shift_adjoint(&w, &v, 1, &Alpha::from_ratio(0, 1)).unwrap();
        let mut expected = vec![C::zero(); 3];
        expected[0] = q(1, 2);
        assert_eq!(adj.apply_coeffs(&unit(4, 1)), expected);

        let (v2, w2) = graded::<BigRational>(Alpha::from_ratio(3, 7), 2, 3);
        let adj = shift_adjoint(&w2, &v2, 2, &Alpha::from_ratio(3, 7)).unwrap();
        assert!(adj.apply_coeffs(&unit(5, 0)).iter().all(|z| z.is_zero()));
        assert!(adj.apply_coeffs(&unit(5, 1)).iter().all(|z| z.is_zero()));
    }

    #[test]
    fn metric_adjoint_matches_explicit_formula() {
        for n in 1..=3 {
            let alpha = Alpha::from_ratio(1, 2);
            let (v, w) = graded::<BigRational>(alpha.clone(), n, 10);
            let s = shift(&v, &w, n).unwrap();
            let explicit = shift_adjoint(&w, &v, n, &alpha).unwrap();
            assert!(s.adjoint().distance(&explicit).unwrap().exact_zero);

            let (vf, wf) = graded::<f64>(alpha.clone(), n, 10);
            let s = shift(&vf, &wf, n).unwrap();
            let explicit = shift_adjoint(&wf, &vf, n, &alpha).unwrap();
            assert!(s.adjoint().matrix().to_f64().max_abs() > 0.0);
            assert!((&s.adjoint().matrix().clone() - explicit.matrix()).max_abs() <= 1e-13);
        }
    }

    #[test]
    fn adjoint_pairing_on_random_vectors() {
        let (v, w) = graded::<f64>(Alpha::parse("2.5").unwrap(), 2, 12);
        let s = shift(&v, &w, 2).unwrap();
        let sa = s.adjoint();
        for seed in 0..50 {
            let f = random_vector(&v, seed);
            let g = random_vector(&w, 1000 + seed);
            let lhs = inner(&s.apply(&f).unwrap(), &g).unwrap();
            let rhs = inner(&f, &sa.apply(&g).unwrap()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn adjoint_is_an_involution_and_fixes_identity() {
        let (v, w) = graded::<BigRational>(Alpha::from_ratio(1, 3), 1, 5);
        let m = LinearMap::new(
            &v,
            &w,
            Matrix::from_fn(6, 5, |i, j| q((i * 7 + j * 3) as i64 % 5 - 2, 1 + (i + j) as i64 % 3)),
        )
        .unwrap();
        assert!(m.adjoint().adjoint().distance(&m).unwrap().exact_zero);
        let id = LinearMap::identity(&v);
        assert!(id.adjoint().distance(&id).unwrap().exact_zero);
    }

    #[test]
    fn compose_with_identity_and_gram_of_shift() {
        let alpha = Alpha::from_ratio(1, 1);
        let (v, w) = graded::<BigRational>(alpha.clone(), 2, 8);
        let s = shift(&v, &w, 2).unwrap();
        assert!(LinearMap::identity(&w).compose(&s).unwrap().distance(&s).unwrap().exact_zero);
        let gram = shift_adjoint(&w, &v, 2, &alpha).unwrap().compose(&s).unwrap();
        let expected: Vec<C<BigRational>> = (0..8)
            .map(|n| Complex::new(shift_coeff(2, &alpha, n).unwrap(), BigRational::zero()))
            .collect();
        assert_eq!(gram.matrix(), &Matrix::from_diagonal(&expected));
        assert!(s.compose(&s).is_err());
    }

    #[test]
    fn restriction_to_full_space_is_the_shift() {
        let (v, w) = graded::<BigRational>(Alpha::from_ratio(0, 1), 1, 6);
        let s = shift(&v, &w, 1).unwrap();
        let h = residue_subspace_of(&v, 1, &[0]).unwrap();
        let r = restrict(&s, &h).unwrap();
        // exact bases are the monomials themselves
        assert_eq!(r.map().matrix(), s.matrix());
    }

    #[test]
    fn restriction_to_even_ladder() {
        let alpha = Alpha::parse("0.5").unwrap();
        let (v, w) = graded::<f64>(alpha, 2, 8);
        let s = shift(&v, &w, 2).unwrap();
        let h = residue_subspace_of(&v, 2, &[0]).unwrap();
        let r = restrict(&s, &h).unwrap();
        assert_eq!(r.map().domain().dim(), 4);
        assert_eq!(r.map().codomain().dim(), 5);
        // monomial coordinates: T e_j = e_{j+1}, and T*T = diag(C(2, a, 2j))
        for j in 0..4 {
            for i in 0..5 {
                let expected = if i == j + 1 { C::one() } else { C::zero() };
                assert_eq!(*r.map().matrix().get(i, j), expected);
            }
        }
        let gram = r.map().adjoint().compose(r.map()).unwrap();
        let wts = w.metric();
        for j in 0..4 {
            let c: f64 = shift_coeff(2, &Alpha::parse("0.5").unwrap(), 2 * j).unwrap();
            assert!((gram.matrix().get(j, j).re - c).abs() <= 1e-15);
            assert!((gram.matrix().get(j, j).re - wts[2 * j + 2] / wts[2 * j]).abs() <= 1e-15);
        }
    }

    #[test]
    fn restricted_norm_equals_ambient_norm() {
        let alpha = Alpha::parse("1").unwrap();
        let (v, w) = graded::<f64>(alpha, 3, 15);
        let s = shift(&v, &w, 3).unwrap();
        let h = residue_subspace_of(&v, 3, &[0, 2]).unwrap();
        let r = restrict(&s, &h).unwrap();
        for seed in 0..20 {
            let f = h.project(random_vector(&v, seed).coeffs());
            let coords = h.coordinates(&f);
            let tf = r.map().apply_coeffs(&coords);
            let in_h = r.map().codomain().norm_sqr_coeffs(&tf);
            let ambient = w.norm_sqr_coeffs(&s.apply_coeffs(&f));
            assert!((in_h - ambient).abs() <= 1e-12 * ambient.max(1e-300));
        }
    }

    #[test]
    fn restrict_rejects_non_invariant_subspace() {
        let (v, w) = graded::<f64>(Alpha::from_ratio(0, 1), 1, 6);
        let s = shift(&v, &w, 1).unwrap();
        let mut f = unit(6, 0);
        f[1] = C::one();
        let h = Subspace::span(&v, [f]);
        assert!(matches!(restrict(&s, &h), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn a_on_constants_doubles_and_shifts() {
        let (v, w) = graded::<BigRational>(Alpha::from_ratio(0, 1), 1, 5);
        let s = shift(&v, &w, 1).unwrap();
        let t = restrict(&s, &Subspace::full(&v)).unwrap();
        let a = build_a(t.map()).unwrap();
        let mut expected = vec![C::zero(); 6];
        expected[1] = q(2, 1);
        assert_eq!(a.apply_coeffs(&unit(5, 0)), expected);
        let ident = a.adjoint().compose(t.map()).unwrap();
        assert!(ident.distance(&LinearMap::identity(&v)).unwrap().exact_zero);
    }

    #[test]
    fn build_a_handles_non_diagonal_gram() {
        // T: C^2 -> C^3 with a full-rank non-orthogonal image
        let dom = TruncatedSpace::from_metric(vec![1.0, 0.5]);
        let cod = TruncatedSpace::from_metric(vec![1.0, 0.5, 0.25]);
        let m = Matrix::<f64>::from_fn(3, 2, |i, j| Complex::new((i + 2 * j + 1) as f64, (i as f64) - (j as f64)));
        let t = LinearMap::new(&dom, &cod, m).unwrap();
        let a = build_a(&t).unwrap();
        let d = a.adjoint().compose(&t).unwrap().distance(&LinearMap::identity(&dom)).unwrap();
        assert!(d.norm <= 1e-12);
    }

    #[test]
    fn build_a_rejects_singular_gram() {
        let dom = TruncatedSpace::from_metric(vec![1.0, 1.0]);
        let cod = TruncatedSpace::from_metric(vec![1.0, 1.0]);
        let m = Matrix::<f64>::from_fn(2, 2, |_, _| Complex::new(1.0, 0.0));
        let t = LinearMap::new(&dom, &cod, m).unwrap();
        assert!(matches!(build_a(&t), Err(Error::SingularGram { .. })));

        let domq = TruncatedSpace::from_metric(vec![BigRational::one(), BigRational::one()]);
        let m = Matrix::from_fn(2, 2, |_, _| q(1, 1));
        let t = LinearMap::new(&domq, &domq, m).unwrap();
        assert!(matches!(build_a(&t), Err(Error::SingularGram { .. })));
    }

    #[test]
    fn ladder_power_of_a_matches_closed_form() {
        let alpha = Alpha::from_ratio(0, 1);
        let w = weights::<BigRational>(alpha, 4 + 3);
        let base = Subspace::full(&TruncatedSpace::from_metric(w[..4].to_vec()));
        let ladder = ShiftLadder::new(&w, 1, &base, 2).unwrap();
        let a2 = ladder.to_monomial(&ladder.a_power(0, 2), 0, 2);
        // A^2 1 = (w_0 / w_2) z^2 = 3 z^2
        assert_eq!(*a2.matrix().get(2, 0), q(3, 1));
    }
}
