//! Subspaces with metric-orthogonal bases: residue-class reducing subspaces,
//! invariance tests, wandering subspaces, invariant closures, kernels and
//! principal-angle distances.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{self, Matrix};
use crate::operators::{LinearMap, Restriction};
use crate::scalar::{Real, C};
use crate::space::{random_coeffs, CoefficientVector, TruncatedSpace};

/// A set of residues mod `N`, naming the subspace spanned by the monomials
/// whose degree falls in one of the classes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Residues {
    modulus: usize,
    classes: BTreeSet<usize>,
}

impl Residues {
    pub fn new(modulus: usize, classes: impl IntoIterator<Item = usize>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidParams("residue modulus must be at least 1".into()));
        }
        let classes: BTreeSet<usize> = classes.into_iter().collect();
        if let Some(&residue) = classes.iter().find(|&&k| k >= modulus) {
            return Err(Error::BadResidue { residue, modulus });
        }
        Ok(Residues { modulus, classes })
    }

    /// Every residue class: the whole space.
    pub fn all(modulus: usize) -> Self {
        Residues {
            modulus,
            classes: (0..modulus).collect(),
        }
    }

    /// All `2^N` subsets of `{0, ..., N-1}`, in binary-counter order.
    pub fn all_subsets(modulus: usize) -> Vec<Self> {
        (0..1usize << modulus)
            .map(|mask| Residues {
                modulus,
                classes: (0..modulus).filter(|k| mask >> k & 1 == 1).collect(),
            })
            .collect()
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn classes(&self) -> &BTreeSet<usize> {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn contains_degree(&self, degree: usize) -> bool {
        self.classes.contains(&(degree % self.modulus))
    }
}

impl fmt::Display for Residues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.classes.iter().map(|k| k.to_string()).collect();
        write!(f, "{{{}}} mod {}", parts.join(","), self.modulus)
    }
}

/// A subspace of a `TruncatedSpace`, held as a metric-orthogonal basis.
///
/// Gram-Schmidt output is orthonormal in float mode. Exact mode cannot take
/// square roots, so there the basis is orthogonal and the squared norms are
/// kept alongside; residue subspaces use unnormalized monomials in both
/// modes. Every formula below divides by the stored squared norms.
#[derive(Clone, Debug)]
pub struct Subspace<R: Real> {
    ambient: TruncatedSpace<R>,
    basis: Vec<Vec<C<R>>>,
    sq_norms: Vec<R>,
    tag: Option<Residues>,
}

impl<R: Real> Subspace<R> {
    pub fn zero(ambient: &TruncatedSpace<R>) -> Self {
        Subspace {
            ambient: ambient.clone(),
            basis: Vec::new(),
            sq_norms: Vec::new(),
            tag: None,
        }
    }

    /// The whole space, on the (unnormalized) coordinate basis.
    pub fn full(ambient: &TruncatedSpace<R>) -> Self {
        let d = ambient.dim();
        Subspace {
            ambient: ambient.clone(),
            basis: (0..d).map(|k| unit(d, k)).collect(),
            sq_norms: ambient.metric().to_vec(),
            tag: None,
        }
    }

    /// Orthogonalized span of the given coefficient vectors.
    pub fn span(ambient: &TruncatedSpace<R>, vectors: impl IntoIterator<Item = Vec<C<R>>>) -> Self {
        let mut s = Self::zero(ambient);
        s.extend(vectors);
        s
    }

    pub fn span_of(ambient: &TruncatedSpace<R>, vectors: &[CoefficientVector<R>]) -> Result<Self> {
        for v in vectors {
            if !v.space().same_as(ambient) {
                return Err(Error::AmbientMismatch);
            }
        }
        Ok(Self::span(ambient, vectors.iter().map(|v| v.coeffs().to_vec())))
    }

    /// Modified Gram-Schmidt with one re-orthogonalization pass (float) in
    /// the ambient metric. Candidates already in the span are dropped.
    fn extend(&mut self, vectors: impl IntoIterator<Item = Vec<C<R>>>) {
        let passes = if R::is_exact() { 1 } else { 2 };
        for mut v in vectors {
            assert_eq!(v.len(), self.ambient.dim(), "vector length differs from ambient");
            let original = self.ambient.norm_sqr_coeffs(&v);
            if original.is_zero() {
                continue;
            }
            for _ in 0..passes {
                for (b, g) in self.basis.iter().zip(&self.sq_norms) {
                    let c = self.ambient.inner_coeffs(&v, b).unscale(g.clone());
                    if c.is_zero() {
                        continue;
                    }
                    for (x, y) in v.iter_mut().zip(b) {
                        if !y.is_zero() {
                            *x = &*x - &c * y;
                        }
                    }
                }
            }
            let residual = self.ambient.norm_sqr_coeffs(&v);
            if R::is_negligible(&residual, &original) {
                continue;
            }
            match residual.sqrt_opt() {
                Some(s) => {
                    for x in v.iter_mut() {
                        *x = x.unscale(s.clone());
                    }
                    self.basis.push(v);
                    self.sq_norms.push(R::one());
                }
                None => {
                    self.basis.push(v);
                    self.sq_norms.push(residual);
                }
            }
        }
    }

    pub fn ambient(&self) -> &TruncatedSpace<R> {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Vec<C<R>>] {
        &self.basis
    }

    pub fn sq_norms(&self) -> &[R] {
        &self.sq_norms
    }

    pub fn tag(&self) -> Option<&Residues> {
        self.tag.as_ref()
    }

    pub fn with_tag(mut self, tag: Option<Residues>) -> Self {
        self.tag = tag;
        self
    }

    /// Coordinate space of the basis: its metric is the squared basis norms.
    pub fn coords_space(&self) -> TruncatedSpace<R> {
        TruncatedSpace::from_metric(self.sq_norms.clone())
    }

    /// Basis coordinates `c_i = <v, b_i> / |b_i|^2` of the projection of `v`.
    pub fn coordinates(&self, v: &[C<R>]) -> Vec<C<R>> {
        self.basis
            .iter()
            .zip(&self.sq_norms)
            .map(|(b, g)| self.ambient.inner_coeffs(v, b).unscale(g.clone()))
            .collect()
    }

    /// Ambient vector with the given basis coordinates.
    pub fn combine(&self, coords: &[C<R>]) -> Vec<C<R>> {
        let mut out = vec![C::zero(); self.ambient.dim()];
        for (c, b) in coords.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (o, y) in out.iter_mut().zip(b) {
                if !y.is_zero() {
                    *o = &*o + c * y;
                }
            }
        }
        out
    }

    pub fn project(&self, v: &[C<R>]) -> Vec<C<R>> {
        self.combine(&self.coordinates(v))
    }

    /// Squared metric distance from `v` to the subspace.
    pub fn residual_sqr(&self, v: &[C<R>]) -> R {
        let p = self.project(v);
        let diff: Vec<C<R>> = v.iter().zip(&p).map(|(a, b)| a - b).collect();
        self.ambient.norm_sqr_coeffs(&diff)
    }

    /// Inclusion of basis coordinates into the ambient space.
    pub fn embedding(&self) -> LinearMap<R> {
        let m = Matrix::from_columns(self.ambient.dim(), &self.basis);
        LinearMap::new(&self.coords_space(), &self.ambient, m).expect("shapes agree by construction")
    }

    /// Orthogonal projector on the ambient space.
    pub fn projector(&self) -> LinearMap<R> {
        let d = self.ambient.dim();
        let w = self.ambient.metric();
        let mut m = Matrix::zeros(d, d);
        for (b, g) in self.basis.iter().zip(&self.sq_norms) {
            for j in 0..d {
                if b[j].is_zero() {
                    continue;
                }
                for k in 0..d {
                    if b[k].is_zero() {
                        continue;
                    }
                    let add = (&b[j] * b[k].conj()).scale(w[k].clone()).unscale(g.clone());
                    m.set(j, k, m.get(j, k) + add);
                }
            }
        }
        LinearMap::new(&self.ambient, &self.ambient, m).expect("square by construction")
    }

    /// The same subspace inside a larger space whose metric extends this one.
    pub fn pad_to(&self, larger: &TruncatedSpace<R>) -> Result<Self> {
        if !self.ambient.is_prefix_of(larger) {
            return Err(Error::AmbientMismatch);
        }
        Ok(Subspace {
            ambient: larger.clone(),
            basis: self.basis.iter().map(|b| pad(b, larger.dim())).collect(),
            sq_norms: self.sq_norms.clone(),
            tag: self.tag.clone(),
        })
    }

    /// Intersection with the span of the first `cut` coordinates, as a
    /// subspace of the leading `cut`-dimensional block.
    pub fn restrict_degrees(&self, cut: usize) -> Result<Self> {
        if cut > self.ambient.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient.dim(),
                found: cut,
            });
        }
        let low = TruncatedSpace::from_metric(self.ambient.metric()[..cut].to_vec());
        let tail_rows = self.ambient.dim() - cut;
        let tail = Matrix::from_fn(tail_rows, self.dim(), |i, j| self.basis[j][cut + i].clone());
        let tail_metric = self.ambient.metric()[cut..].to_vec();
        let kernel = R::kernel_vectors(&tail, &self.sq_norms, &tail_metric, KERNEL_TOL);
        let vectors = kernel.iter().map(|c| self.combine(c)[..cut].to_vec());
        let mut s = Self::span(&low, vectors);
        s.tag = self.tag.clone();
        Ok(s)
    }

    /// Largest degree carrying a nonzero coefficient in some basis vector.
    pub fn max_degree(&self) -> Option<usize> {
        self.basis
            .iter()
            .filter_map(|b| b.iter().rposition(|z| !z.is_zero()))
            .max()
    }

    /// Maximum change of basis vectors under a second orthogonalization.
    pub fn reorthogonalization_drift(&self) -> f64 {
        let again = Self::span(&self.ambient, self.basis.iter().cloned());
        self.basis
            .iter()
            .zip(&again.basis)
            .map(|(a, b)| {
                let diff: Vec<C<R>> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                self.ambient.norm_sqr_coeffs(&diff).to_f64().sqrt()
            })
            .fold(if again.dim() == self.dim() { 0.0 } else { f64::INFINITY }, f64::max)
    }

    /// Largest deviation of the basis Gram matrix from `diag(sq_norms)`.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let g = self.ambient.inner_coeffs(a, b);
                let expected = if i == j { self.sq_norms[i].clone() } else { R::zero() };
                let d = g - Complex::new(expected, R::zero());
                worst = worst.max(d.norm_sqr().to_f64().sqrt());
            }
        }
        worst
    }
}

pub(crate) const KERNEL_TOL: f64 = 1e-10;

pub(crate) fn unit<R: Real>(dim: usize, k: usize) -> Vec<C<R>> {
    let mut v = vec![C::zero(); dim];
    v[k] = C::one();
    v
}

pub(crate) fn pad<R: Real>(v: &[C<R>], dim: usize) -> Vec<C<R>> {
    let mut out = v.to_vec();
    out.resize(dim, C::zero());
    out
}

/// Span of `{z^{k + jN} : k in residues, k + jN < D}`.
///
/// The basis is the monomials themselves, with their weights as squared
/// norms, in both scalar modes: shift images of basis vectors are then basis
/// vectors again and project with no rounding.
pub fn residue_subspace<R: Real>(space: &TruncatedSpace<R>, residues: &Residues) -> Subspace<R> {
    let d = space.dim();
    let mut s = Subspace::zero(space);
    for n in (0..d).filter(|&n| residues.contains_degree(n)) {
        s.basis.push(unit(d, n));
        s.sq_norms.push(space.metric()[n].clone());
    }
    s.tag = Some(residues.clone());
    s
}

/// Convenience wrapper taking the multiplicity and class list directly.
pub fn residue_subspace_of<R: Real>(
    space: &TruncatedSpace<R>,
    multiplicity: usize,
    classes: &[usize],
) -> Result<Subspace<R>> {
    let residues = Residues::new(multiplicity, classes.iter().copied())?;
    Ok(residue_subspace(space, &residues))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Invariance {
    pub invariant: bool,
    pub residual: f64,
}

/// Tests `m H ⊆ H` at finite section: every basis vector of `H` is padded
/// into the domain of `m`, mapped, cut back to `H`'s own truncation, and its
/// distance to `H` measured relative to the basis vector's norm.
pub fn is_invariant<R: Real>(m: &LinearMap<R>, h: &Subspace<R>, tol: f64) -> Result<Invariance> {
    if !(h.ambient().is_prefix_of(m.domain()) || m.domain().is_prefix_of(h.ambient())) {
        return Err(Error::AmbientMismatch);
    }
    let c = h.ambient().dim();
    let a = m.domain().dim();
    let mut worst: f64 = 0.0;
    for (b, g) in h.basis().iter().zip(h.sq_norms()) {
        if a < c && b[a..].iter().any(|z| !z.is_zero()) {
            return Err(Error::DimensionMismatch { expected: c, found: a });
        }
        let input: Vec<C<R>> = if a >= c { pad(b, a) } else { b[..a].to_vec() };
        let mut image = m.matrix().mul_vec(&input);
        image.resize(c, C::zero());
        let r = h.residual_sqr(&image) / g.clone();
        worst = worst.max(r.to_f64().sqrt());
    }
    Ok(Invariance {
        invariant: worst <= tol,
        residual: worst,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Reducing {
    pub reducing: bool,
    pub invariant_residual: f64,
    pub adjoint_residual: f64,
}

impl Reducing {
    pub fn residual(&self) -> f64 {
        self.invariant_residual.max(self.adjoint_residual)
    }
}

/// `H` is reducing when it is invariant under both `S` and its metric adjoint.
pub fn is_reducing<R: Real>(s: &LinearMap<R>, h: &Subspace<R>, tol: f64) -> Result<Reducing> {
    let fwd = is_invariant(s, h, tol)?;
    let back = is_invariant(&s.adjoint(), h, tol)?;
    Ok(Reducing {
        reducing: fwd.invariant && back.invariant,
        invariant_residual: fwd.residual,
        adjoint_residual: back.residual,
    })
}

/// Orthogonal complement of `self` inside the full coordinate space.
pub fn complement<R: Real>(u: &Subspace<R>) -> Subspace<R> {
    let d = u.ambient().dim();
    let mut s = u.clone();
    s.tag = None;
    let k = s.dim();
    s.extend((0..d).map(|i| unit(d, i)));
    Subspace {
        ambient: u.ambient().clone(),
        basis: s.basis.split_off(k),
        sq_norms: s.sq_norms.split_off(k),
        tag: None,
    }
}

/// Range of a map, as a subspace of its codomain.
pub fn range<R: Real>(m: &LinearMap<R>) -> Subspace<R> {
    Subspace::span(m.codomain(), m.matrix().columns())
}

/// `E = H' ⊖ T H` in the basis coordinates of `H'`, for `T : H -> H'`.
pub fn wandering_coords<R: Real>(t: &LinearMap<R>) -> Subspace<R> {
    complement(&range(t))
}

/// The wandering subspace `E = H' ⊖ T H` of a restriction, in ambient
/// monomial coordinates of the codomain truncation.
pub fn wandering<R: Real>(restriction: &Restriction<R>) -> Subspace<R> {
    let e = wandering_coords(restriction.map());
    let h = restriction.codomain_subspace();
    Subspace::span(h.ambient(), e.basis().iter().map(|c| h.combine(c)))
}

/// Orthogonalized span of `{S^j e : e in basis(E), 0 <= j <= depth}` inside
/// the domain of `S`. `S` must raise degree (e.g. the shift `V_D -> V_{D+N}`);
/// images are cut back to `V_D`, and a nonzero cut-off tail is reported as
/// `DepthOverflow`.
pub fn invariant_closure<R: Real>(
    e: &Subspace<R>,
    s: &LinearMap<R>,
    h: &Subspace<R>,
    depth: usize,
) -> Result<Subspace<R>> {
    let ambient = s.domain();
    if !h.ambient().same_as(ambient) {
        return Err(Error::AmbientMismatch);
    }
    let d = ambient.dim();
    let codomain = s.codomain();
    let fit = |v: Vec<C<R>>, metric_space: &TruncatedSpace<R>, step: usize| -> Result<Vec<C<R>>> {
        if v.len() <= d {
            return Ok(pad(&v, d));
        }
        let total = metric_space.norm_sqr_coeffs(&v);
        let tail: R = v[d..]
            .iter()
            .zip(&metric_space.metric()[d..])
            .fold(R::zero(), |acc, (z, w)| acc + w.clone() * z.norm_sqr());
        if !tail.is_zero() && !R::is_negligible(&tail, &total) {
            let degree = v.iter().rposition(|z| !z.is_zero()).unwrap_or(0);
            return Err(Error::DepthOverflow { depth: step, degree, dim: d });
        }
        Ok(v[..d].to_vec())
    };

    let mut generators = Vec::new();
    for b in e.basis() {
        let mut v = fit(b.clone(), e.ambient(), 0)?;
        generators.push(v.clone());
        for j in 1..=depth {
            let image = s.matrix().mul_vec(&v);
            v = fit(image, codomain, j)?;
            generators.push(v.clone());
        }
    }
    Ok(Subspace::span(ambient, generators))
}

/// Metric-orthogonal basis of the (numerical) kernel of `m`.
pub fn kernel<R: Real>(m: &LinearMap<R>, tol: f64) -> Subspace<R> {
    let vectors = R::kernel_vectors(
        m.matrix(),
        m.domain().metric(),
        m.codomain().metric(),
        tol,
    );
    Subspace::span(m.domain(), vectors)
}

/// `|P_U - P_V|` in the metric operator norm: the sine of the largest
/// principal angle, 0 exactly when the subspaces coincide.
pub fn subspace_distance<R: Real>(u: &Subspace<R>, v: &Subspace<R>) -> Result<f64> {
    if !u.ambient().same_as(v.ambient()) {
        return Err(Error::AmbientMismatch);
    }
    let diff = u.projector().subtract(&v.projector())?;
    if diff.matrix().is_zero() {
        return Ok(0.0);
    }
    let w = u.ambient().metric();
    Ok(matrix::metric_operator_norm(diff.matrix(), w, w))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusReport {
    pub residue_total: usize,
    pub residue_passed: usize,
    pub max_residue_residual: f64,
    pub random_total: usize,
    pub random_failed: usize,
    pub min_random_residual: f64,
}

impl CensusReport {
    pub fn all_pass(&self) -> bool {
        self.residue_passed == self.residue_total && self.random_failed == self.random_total
    }
}

/// Checks that all `2^N` residue subspaces of `S`'s domain are reducing and
/// that `trials` seeded random two-dimensional subspaces are not.
pub fn reducing_census<R: Real>(
    s: &LinearMap<R>,
    multiplicity: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<CensusReport> {
    let space = s.domain();
    let mut report = CensusReport {
        residue_total: 0,
        residue_passed: 0,
        max_residue_residual: 0.0,
        random_total: trials,
        random_failed: 0,
        min_random_residual: f64::INFINITY,
    };
    for residues in Residues::all_subsets(multiplicity) {
        let h = residue_subspace(space, &residues);
        let r = is_reducing(s, &h, tol)?;
        report.residue_total += 1;
        report.max_residue_residual = report.max_residue_residual.max(r.residual());
        if r.reducing {
            report.residue_passed += 1;
        }
    }
    for t in 0..trials as u64 {
        let base = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(2 * t);
        let h = Subspace::span(
            space,
            [random_coeffs(space.dim(), base), random_coeffs(space.dim(), base + 1)],
        );
        let r = is_reducing(s, &h, tol)?;
        report.min_random_residual = report.min_random_residual.min(r.residual());
        if !r.reducing {
            report.random_failed += 1;
        }
    }
    if trials == 0 {
        report.min_random_residual = 0.0;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::shift;
    use crate::scalar::Alpha;
    use crate::weights::{weight_sequence, WeightParams};
    use num_rational::BigRational;

    fn spaces<R: Real>(alpha: Alpha, n: usize, d: usize) -> (TruncatedSpace<R>, TruncatedSpace<R>) {
        let p = WeightParams::new(alpha, n, d + n).unwrap();
        let w = weight_sequence::<R>(&p).unwrap();
        (w.space(d).unwrap(), w.space(d + n).unwrap())
    }

    fn real<R: Real>(x: i64) -> C<R> {
        Complex::new(R::from_i64(x), R::zero())
    }

    #[test]
    fn residue_subspace_examples() {
        let (v, _) = spaces::<f64>(Alpha::from_ratio(0, 1), 2, 6);
        let h = residue_subspace_of(&v, 2, &[0]).unwrap();
        assert_eq!(h.dim(), 3);
        assert_eq!(h.max_degree(), Some(4));
        let degrees: Vec<usize> = h
            .basis()
            .iter()
            .map(|b| b.iter().position(|z| !z.is_zero()).unwrap())
            .collect();
        assert_eq!(degrees, vec![0, 2, 4]);

        let (v1, _) = spaces::<f64>(Alpha::from_ratio(0, 1), 1, 6);
        let full = residue_subspace_of(&v1, 1, &[0]).unwrap();
        assert_eq!(subspace_distance(&full, &Subspace::full(&v1)).unwrap(), 0.0);

        let (v3, _) = spaces::<f64>(Alpha::from_ratio(0, 1), 3, 9);
        let h = residue_subspace_of(&v3, 3, &[1, 2]).unwrap();
        let counted: usize = [1usize, 2]
            .iter()
            .map(|&k| (0..9).filter(|j| k + j * 3 < 9).count())
            .sum();
        assert_eq!(h.dim(), counted);
        assert_eq!(h.dim(), 6);

        assert!(matches!(
            residue_subspace_of(&v3, 3, &[3]),
            Err(Error::BadResidue { residue: 3, modulus: 3 })
        ));
        assert!(residue_subspace_of(&v3, 3, &[]).unwrap().is_zero());
    }

    #[test]
    fn basis_is_orthonormal_in_float_and_orthogonal_in_exact() {
        let (v, _) = spaces::<f64>(Alpha::from_ratio(1, 2), 1, 12);
        let h = Subspace::span(&v, (0..4).map(|s| random_coeffs(12, s)));
        assert_eq!(h.dim(), 4);
        assert!(h.orthogonality_defect() <= 1e-12);
        assert!(h.reorthogonalization_drift() <= 1e-12);

        let (q, _) = spaces::<BigRational>(Alpha::from_ratio(1, 2), 1, 6);
        let h = Subspace::span(&q, (0..3).map(|s| random_coeffs(6, s)));
        assert_eq!(h.orthogonality_defect(), 0.0);
        assert_eq!(h.reorthogonalization_drift(), 0.0);
    }

    #[test]
    fn dependent_vectors_are_dropped() {
        let (q, _) = spaces::<BigRational>(Alpha::from_ratio(0, 1), 1, 4);
        let a = random_coeffs::<BigRational>(4, 1);
        let b = random_coeffs::<BigRational>(4, 2);
        let sum: Vec<_> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        assert_eq!(Subspace::span(&q, [a, b, sum]).dim(), 2);
    }

    #[test]
    fn shift_preserves_residue_classes() {
        let (v, w) = spaces::<f64>(Alpha::from_ratio(0, 1), 2, 8);
        let s = shift(&v, &w, 2).unwrap();
        for residues in Residues::all_subsets(2) {
            let h = residue_subspace(&v, &residues);
            let inv = is_invariant(&s, &h, 1e-12).unwrap();
            assert!(inv.invariant);
            assert_eq!(inv.residual, 0.0);
        }
    }

    #[test]
    fn one_plus_z_is_not_invariant() {
        let (v, w) = spaces::<BigRational>(Alpha::from_ratio(0, 1), 1, 6);
        let s = shift(&v, &w, 1).unwrap();
        let mut f = vec![C::zero(); 6];
        f[0] = real(1);
        f[1] = real(1);
        let h = Subspace::span(&v, [f]);
        let inv = is_invariant(&s, &h, 1e-12).unwrap();
        assert!(!inv.invariant);
        // z + z^2 against span{1+z} at alpha = 0: distance^2 = |z+z^2|^2 - |<z+z^2,1+z>|^2/|1+z|^2
        // = (1/2 + 1/3) - (1/2)^2 / (3/2) = 5/6 - 1/6 = 2/3, relative to |1+z|^2 = 3/2.
        let expected = ((2.0 / 3.0) / 1.5f64).sqrt();
        assert!((inv.residual - expected).abs() < 1e-15);
        assert!(!is_reducing(&s, &h, 1e-12).unwrap().reducing);
    }

    #[test]
    fn identity_leaves_everything_invariant() {
        let (v, _) = spaces::<f64>(Alpha::from_ratio(0, 1), 1, 6);
        let h = Subspace::span(&v, [random_coeffs(6, 5)]);
        assert!(is_invariant(&LinearMap::identity(&v), &h, 1e-12).unwrap().invariant);
    }

    #[test]
    fn trivial_subspaces_are_reducing() {
        let (v, w) = spaces::<f64>(Alpha::from_ratio(1, 2), 2, 8);
        let s = shift(&v, &w, 2).unwrap();
        assert!(is_reducing(&s, &Subspace::zero(&v), 1e-12).unwrap().reducing);
        assert!(is_reducing(&s, &Subspace::full(&v), 1e-12).unwrap().reducing);
    }

    #[test]
    fn distance_examples() {
        let (v, _) = spaces::<f64>(Alpha::from_ratio(0, 1), 1, 4);
        let u = Subspace::span(&v, [unit(4, 0)]);
        assert_eq!(subspace_distance(&u, &u).unwrap(), 0.0);
        let perp = Subspace::span(&v, [unit(4, 2)]);
        assert!((subspace_distance(&u, &perp).unwrap() - 1.0).abs() < 1e-15);
        let mut f = unit(4, 0);
        f[1] = C::one();
        let tilt = Subspace::span(&v, [f]);
        // principal angle between 1 and 1+z at alpha=0: cos^2 = 1/(3/2), sin = sqrt(1/3)
        let d = subspace_distance(&u, &tilt).unwrap();
        assert!(d > 0.0 && d < 1.0);
        assert!((d - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert_eq!(subspace_distance(&Subspace::zero(&v), &Subspace::zero(&v)).unwrap(), 0.0);
    }

    #[test]
    fn kernel_examples() {
        let (v, w) = spaces::<BigRational>(Alpha::from_ratio(0, 1), 2, 6);
        assert!(kernel(&LinearMap::identity(&v), 1e-12).is_zero());
        let adj = shift(&v, &w, 2).unwrap().adjoint();
        let k = kernel(&adj, 1e-12);
        let expected = Subspace::span(&w, [unit(8, 0), unit(8, 1)]);
        assert_eq!(subspace_distance(&k, &expected).unwrap(), 0.0);

        let (vf, wf) = spaces::<f64>(Alpha::from_ratio(0, 1), 2, 6);
        let k = kernel(&shift(&vf, &wf, 2).unwrap().adjoint(), 1e-10);
        let expected = Subspace::span(&wf, [unit(8, 0), unit(8, 1)]);
        assert!(subspace_distance(&k, &expected).unwrap() < 1e-12);
    }

    #[test]
    fn closure_of_constants_is_everything() {
        let (v, w) = spaces::<f64>(Alpha::from_ratio(0, 1), 1, 8);
        let s = shift(&v, &w, 1).unwrap();
        let full = Subspace::full(&v);
        let e = Subspace::span(&v, [unit(8, 0)]);
        let c = invariant_closure(&e, &s, &full, 7).unwrap();
        assert!(subspace_distance(&c, &full).unwrap() <= 1e-15);
        let c0 = invariant_closure(&e, &s, &full, 0).unwrap();
        assert_eq!(subspace_distance(&c0, &e).unwrap(), 0.0);
        assert!(matches!(
            invariant_closure(&e, &s, &full, 8),
            Err(Error::DepthOverflow { .. })
        ));
    }

    #[test]
    fn restrict_degrees_intersects() {
        let (v, _) = spaces::<BigRational>(Alpha::from_ratio(0, 1), 1, 4);
        // span{1 + z^3, z}: intersection with degrees < 3 is span{z}
        let mut f = unit(4, 0);
        f[3] = C::one();
        let h = Subspace::span(&v, [f, unit(4, 1)]);
        let low = h.restrict_degrees(3).unwrap();
        assert_eq!(low.dim(), 1);
        let expected = Subspace::span(low.ambient(), [unit(3, 1)]);
        assert_eq!(subspace_distance(&low, &expected).unwrap(), 0.0);
    }

    #[test]
    fn census_small() {
        for n in [2usize, 3] {
            let (v, w) = spaces::<f64>(Alpha::from_ratio(1, 2), n, 12);
            let s = shift(&v, &w, n).unwrap();
            let r = reducing_census(&s, n, 10, 1, 1e-12).unwrap();
            assert_eq!(r.residue_total, 1 << n);
            assert!(r.all_pass(), "{r:?}");
            assert_eq!(r.max_residue_residual, 0.0);
        }
    }
}
