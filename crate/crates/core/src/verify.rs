//! The property suite.
//!
//! Each [`CheckKind`] turns one identity or inequality about the restricted
//! shift into a number: a residual that should vanish (or a violation that
//! should be zero). Float checks pass when the residual is within the
//! tolerance; exact checks pass only on exact equality or an exact
//! inequality certificate.

use std::cell::OnceCell;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, Matrix};
use crate::operators::{restrict, shift, shift_adjoint_from, Discrepancy, LinearMap, ShiftLadder};
use crate::scalar::{Alpha, Real, ScalarMode, C};
use crate::space::{random_coeffs, TruncatedSpace};
use crate::subspaces::{
    invariant_closure, is_reducing, kernel, residue_subspace, subspace_distance, wandering,
    wandering_coords, Residues, Subspace, KERNEL_TOL,
};
use crate::weights::{iterated_coeff_with, lower_bound_with, shift_coeff_with, weights_with, WeightParams};

/// Random vectors drawn per sampling check.
pub const SAMPLES: u64 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    CoeffRatio,
    CoeffBounds,
    IteratedCoeff,
    NormIdentity,
    LowerBound,
    AdjointFormula,
    AstarT,
    Projection,
    Telescoping,
    KernelContainment,
    Expansive,
    MinDegree,
    Beurling,
    Reducing,
}

impl CheckKind {
    pub const ALL: [CheckKind; 14] = [
        CheckKind::CoeffRatio,
        CheckKind::CoeffBounds,
        CheckKind::IteratedCoeff,
        CheckKind::NormIdentity,
        CheckKind::LowerBound,
        CheckKind::AdjointFormula,
        CheckKind::AstarT,
        CheckKind::Projection,
        CheckKind::Telescoping,
        CheckKind::KernelContainment,
        CheckKind::Expansive,
        CheckKind::MinDegree,
        CheckKind::Beurling,
        CheckKind::Reducing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::CoeffRatio => "coeff_ratio",
            CheckKind::CoeffBounds => "coeff_bounds",
            CheckKind::IteratedCoeff => "iterated_coeff",
            CheckKind::NormIdentity => "norm_identity",
            CheckKind::LowerBound => "lower_bound",
            CheckKind::AdjointFormula => "adjoint_formula",
            CheckKind::AstarT => "astar_t",
            CheckKind::Projection => "projection",
            CheckKind::Telescoping => "telescoping",
            CheckKind::KernelContainment => "kernel_containment",
            CheckKind::Expansive => "expansive",
            CheckKind::MinDegree => "min_degree",
            CheckKind::Beurling => "beurling",
            CheckKind::Reducing => "reducing",
        }
    }

    /// Float-mode tolerance used when a spec does not set its own.
    pub fn default_tol(self) -> f64 {
        match self {
            CheckKind::CoeffRatio
            | CheckKind::CoeffBounds
            | CheckKind::IteratedCoeff
            | CheckKind::NormIdentity
            | CheckKind::LowerBound
            | CheckKind::Expansive => 1e-12,
            CheckKind::KernelContainment => 1e-9,
            CheckKind::MinDegree => 1e-13,
            CheckKind::AdjointFormula
            | CheckKind::AstarT
            | CheckKind::Projection
            | CheckKind::Telescoping
            | CheckKind::Beurling
            | CheckKind::Reducing => 1e-10,
        }
    }

    /// True for checks that look only at the ambient shift, so one residue
    /// set per grid point is enough.
    pub fn ambient_only(self) -> bool {
        matches!(
            self,
            CheckKind::CoeffRatio | CheckKind::CoeffBounds | CheckKind::NormIdentity | CheckKind::AdjointFormula
        )
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.name().replace('_', "-") == s)
            .ok_or_else(|| Error::Parse {
                what: "check name",
                input: s.to_string(),
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckParams {
    pub multiplicity: usize,
    pub alpha: Alpha,
    pub dim: usize,
    pub residues: Residues,
    pub depth: usize,
    pub seed: u64,
}

/// Adds `parts_per_million * 1e-6` to one shift coefficient before any check
/// reads the coefficient table. Used to confirm the suite can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perturbation {
    pub degree: usize,
    pub parts_per_million: i64,
}

impl Perturbation {
    pub fn new(degree: usize) -> Self {
        Perturbation {
            degree,
            parts_per_million: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckSpec {
    pub kind: CheckKind,
    pub params: CheckParams,
    pub mode: ScalarMode,
    pub tol: f64,
    pub perturb: Option<Perturbation>,
}

impl CheckSpec {
    pub fn new(kind: CheckKind, params: CheckParams, mode: ScalarMode) -> Result<Self> {
        let spec = CheckSpec {
            kind,
            params,
            mode,
            tol: kind.default_tol(),
            perturb: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        self.tol = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_perturbation(mut self, perturb: Perturbation) -> Result<Self> {
        self.perturb = Some(perturb);
        self.validate()?;
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    fn validate(&self) -> Result<()> {
        let p = &self.params;
        WeightParams::new(p.alpha.clone(), p.multiplicity, p.dim)?;
        if p.residues.modulus() != p.multiplicity {
            return Err(Error::InvalidParams(format!(
                "residues are taken mod {} but N = {}",
                p.residues.modulus(),
                p.multiplicity
            )));
        }
        if p.depth == 0 {
            return Err(Error::InvalidParams("depth must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParams(format!("tolerance {} must be positive", self.tol)));
        }
        if let Some(q) = &self.perturb {
            if q.degree >= p.dim {
                return Err(Error::InvalidParams(format!(
                    "perturbed degree {} is outside the truncation D = {}",
                    q.degree, p.dim
                )));
            }
        }
        if self.mode == ScalarMode::ExactRational && p.alpha.exact().is_none() {
            return Err(Error::ModeMismatch(p.alpha.to_string()));
        }
        Ok(())
    }

    /// Orders by everything that determines the parameter point, ignoring
    /// the check kind and tolerance.
    fn point_cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.params, &other.params);
        self.mode
            .cmp(&other.mode)
            .then(a.multiplicity.cmp(&b.multiplicity))
            .then(a.alpha.value().total_cmp(&b.alpha.value()))
            .then_with(|| a.alpha.to_string().cmp(&b.alpha.to_string()))
            .then(a.dim.cmp(&b.dim))
            .then_with(|| a.residues.cmp(&b.residues))
            .then(a.depth.cmp(&b.depth))
            .then(a.seed.cmp(&b.seed))
            .then(self.perturb.cmp(&other.perturb))
    }
}

impl Eq for CheckSpec {}

impl PartialOrd for CheckSpec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CheckSpec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.kind
            .cmp(&other.kind)
            .then_with(|| self.point_cmp(other))
            .then(self.tol.total_cmp(&other.tol))
    }
}

/// One executed check. `residual` is `None` when the check could not run.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub spec: CheckSpec,
    pub residual: Option<f64>,
    pub pass: bool,
    pub wall_ms: f64,
    pub note: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    pub entries: Vec<Entry>,
}

impl VerificationReport {
    pub fn summary(&self) -> Summary {
        let passed = self.entries.iter().filter(|e| e.pass).count();
        Summary {
            total: self.entries.len(),
            passed,
            failed: self.entries.len() - passed,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

/// Runs every spec and returns the entries in canonical order. Specs that
/// share a parameter point share one setup; points run in parallel. A check
/// that errors becomes a failing entry; nothing aborts the run.
pub fn run_suite(grid: &[CheckSpec]) -> VerificationReport {
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.point_cmp(b).then_with(|| a.cmp(b)));
    let groups: Vec<&[CheckSpec]> = sorted
        .chunk_by(|a, b| a.point_cmp(b) == Ordering::Equal)
        .collect();
    let mut entries: Vec<Entry> = groups.par_iter().flat_map_iter(|g| run_group(g)).collect();
    entries.sort_by(|a, b| a.spec.cmp(&b.spec));
    VerificationReport { entries }
}

pub fn run_check(spec: &CheckSpec) -> Entry {
    run_group(std::slice::from_ref(spec)).remove(0)
}

fn run_group(specs: &[CheckSpec]) -> Vec<Entry> {
    match specs.first().map(|s| s.mode) {
        None => Vec::new(),
        Some(ScalarMode::Float64) => run_group_in::<f64>(specs),
        Some(ScalarMode::ExactRational) => run_group_in::<BigRational>(specs),
    }
}

fn run_group_in<R: Real>(specs: &[CheckSpec]) -> Vec<Entry> {
    let mut start = Instant::now();
    let mut setup = Setup::<R>::new(&specs[0]);
    specs
        .iter()
        .map(|spec| {
            let outcome = match &mut setup {
                Ok(s) => {
                    s.tol = spec.tol;
                    evaluate(s, spec.kind)
                }
                Err(e) => Err(e.clone()),
            };
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            start = Instant::now();
            match outcome {
                Ok(o) => Entry {
                    spec: spec.clone(),
                    residual: Some(o.residual),
                    pass: o.pass,
                    wall_ms,
                    note: o.note,
                },
                Err(e) => Entry {
                    spec: spec.clone(),
                    residual: None,
                    pass: false,
                    wall_ms,
                    note: format!("error: {e}"),
                },
            }
        })
        .collect()
}

/// The grid behind `suite --grid default`.
pub fn default_grid() -> Vec<CheckSpec> {
    let float_alphas = ["-0.5", "0", "0.5", "1", "2.5"];
    let exact_alphas = ["0/1", "1/2", "1/1"];
    let mut grid = Vec::new();
    for (mode, alphas) in [
        (ScalarMode::Float64, &float_alphas[..]),
        (ScalarMode::ExactRational, &exact_alphas[..]),
    ] {
        for n in 1..=3 {
            for a in alphas {
                let alpha = Alpha::parse(a).expect("grid literals parse");
                for dim in [32, 64] {
                    grid.extend(grid_point(n, &alpha, dim, 4, 1, mode));
                }
            }
        }
    }
    grid
}

/// Every check at one `(N, alpha, D)`: ambient checks once, the others for
/// each nonempty residue set.
pub fn grid_point(
    multiplicity: usize,
    alpha: &Alpha,
    dim: usize,
    depth: usize,
    seed: u64,
    mode: ScalarMode,
) -> Vec<CheckSpec> {
    let mut specs = Vec::new();
    for residues in Residues::all_subsets(multiplicity).into_iter().filter(|r| !r.is_empty()) {
        let full = residues.len() == multiplicity;
        for kind in CheckKind::ALL {
            if kind.ambient_only() && !full {
                continue;
            }
            let params = CheckParams {
                multiplicity,
                alpha: alpha.clone(),
                dim,
                residues: residues.clone(),
                depth,
                seed,
            };
            specs.push(CheckSpec::new(kind, params, mode).expect("grid points are valid"));
        }
    }
    specs
}

struct Outcome {
    residual: f64,
    pass: bool,
    note: String,
}

impl Outcome {
    fn new(residual: f64, pass: bool) -> Self {
        Outcome {
            residual,
            pass,
            note: String::new(),
        }
    }

    fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// Exact mode: pass on exact zero. Float mode: pass within tolerance.
fn judge<R: Real>(residual: f64, exact_zero: bool, tol: f64) -> bool {
    if R::is_exact() {
        exact_zero
    } else {
        residual <= tol
    }
}

fn from_discrepancy<R: Real>(d: Discrepancy, tol: f64) -> Outcome {
    Outcome::new(d.norm, judge::<R>(d.norm, d.exact_zero, tol))
}

fn sample_seed(seed: u64, i: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i)
}

fn real<R: Real>(x: R) -> C<R> {
    Complex::new(x, R::zero())
}

struct Setup<R: Real> {
    n: usize,
    depth: usize,
    seed: u64,
    tol: f64,
    alpha: R,
    weights: Vec<R>,
    space: TruncatedSpace<R>,
    upper: TruncatedSpace<R>,
    h: Subspace<R>,
    coeffs: Vec<R>,
    ladder: OnceCell<Result<ShiftLadder<R>>>,
}

impl<R: Real> Setup<R> {
    fn new(spec: &CheckSpec) -> Result<Self> {
        let p = &spec.params;
        let alpha = R::from_alpha(&p.alpha)?;
        let (n, d) = (p.multiplicity, p.dim);
        let weights = weights_with(&alpha, d + p.depth * n);
        let mut coeffs: Vec<R> = (0..weights.len()).map(|k| shift_coeff_with(n, &alpha, k)).collect();
        if let Some(q) = &spec.perturb {
            let delta = R::from_i64(q.parts_per_million) / R::from_i64(1_000_000);
            coeffs[q.degree] = coeffs[q.degree].clone() + delta;
        }
        let space = TruncatedSpace::from_metric(weights[..d].to_vec());
        let upper = TruncatedSpace::from_metric(weights[..d + n].to_vec());
        let h = residue_subspace(&space, &p.residues);
        Ok(Setup {
            n,
            depth: p.depth,
            seed: p.seed,
            tol: spec.tol,
            alpha,
            weights,
            space,
            upper,
            h,
            coeffs,
            ladder: OnceCell::new(),
        })
    }

    fn d(&self) -> usize {
        self.space.dim()
    }

    fn ladder(&self) -> Result<&ShiftLadder<R>> {
        self.ladder
            .get_or_init(|| ShiftLadder::new(&self.weights, self.n, &self.h, self.depth))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn shift(&self) -> Result<LinearMap<R>> {
        shift(&self.space, &self.upper, self.n)
    }

    fn samples(&self, dim: usize) -> impl Iterator<Item = Vec<C<R>>> + '_ {
        (0..SAMPLES).map(move |i| random_coeffs(dim, sample_seed(self.seed, i)))
    }
}

fn evaluate<R: Real>(s: &Setup<R>, kind: CheckKind) -> Result<Outcome> {
    match kind {
        CheckKind::CoeffRatio => coeff_ratio(s),
        CheckKind::CoeffBounds => coeff_bounds(s),
        CheckKind::IteratedCoeff => iterated(s),
        CheckKind::NormIdentity => norm_identity(s),
        CheckKind::LowerBound => lower_bound(s),
        CheckKind::AdjointFormula => adjoint_formula(s),
        CheckKind::AstarT => astar_t(s),
        CheckKind::Projection => projection(s),
        CheckKind::Telescoping => telescoping(s),
        CheckKind::KernelContainment => kernel_containment(s),
        CheckKind::Expansive => expansive(s),
        CheckKind::MinDegree => min_degree(s),
        CheckKind::Beurling => beurling(s),
        CheckKind::Reducing => reducing(s),
    }
}

fn relative<R: Real>(diff: &R, scale: &R) -> f64 {
    (diff.clone() / scale.clone()).abs().to_f64()
}

fn coeff_ratio<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for k in 0..s.d() {
        let ratio = s.weights[k + s.n].clone() / s.weights[k].clone();
        let diff = s.coeffs[k].clone() - ratio.clone();
        if !diff.is_zero() {
            exact = false;
            worst = worst.max(relative(&diff, &ratio));
        }
    }
    Ok(Outcome::new(worst, judge::<R>(worst, exact, s.tol)))
}

fn coeff_bounds<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let lb = lower_bound_with(s.n, &s.alpha);
    let mut strict = true;
    let mut worst: f64 = 0.0;
    for c in &s.coeffs[..s.d()] {
        strict &= *c > lb && *c < R::one();
        let low = (lb.clone() - c.clone()).to_f64();
        let high = (c.clone() - R::one()).to_f64();
        worst = worst.max(low).max(high);
    }
    Ok(Outcome::new(worst, strict))
}

fn iterated<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let ladder = s.ladder()?;
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for m in 1..=s.depth {
        let map = ladder.to_monomial(&ladder.a_power(0, m), 0, m);
        let a = map.matrix();
        for k in 0..s.d() {
            let in_h = s.h.tag().is_some_and(|t| t.contains_degree(k));
            let expected = if in_h {
                iterated_coeff_with(s.n, &s.alpha, k, m)
            } else {
                R::zero()
            };
            let scale = if in_h { expected.clone() } else { R::one() };
            for i in 0..a.rows() {
                let want = if i == k + m * s.n { expected.clone() } else { R::zero() };
                let diff = a.get(i, k) - real(want);
                if !diff.is_zero() {
                    exact = false;
                    worst = worst.max(diff.norm_sqr().to_f64().sqrt() / scale.to_f64().abs());
                }
            }
            if in_h {
                let product = (0..m).fold(R::one(), |acc, j| acc / s.coeffs[k + j * s.n].clone());
                let diff = product - expected.clone();
                if !diff.is_zero() {
                    exact = false;
                    worst = worst.max(relative(&diff, &expected));
                }
            }
        }
    }
    Ok(Outcome::new(worst, judge::<R>(worst, exact, s.tol)))
}

fn norm_identity<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let shift = s.shift()?;
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for f in s.samples(s.d()) {
        let lhs = s.upper.norm_sqr_coeffs(&shift.apply_coeffs(&f));
        let rhs = f
            .iter()
            .enumerate()
            .fold(R::zero(), |acc, (k, a)| acc + s.coeffs[k].clone() * s.weights[k].clone() * a.norm_sqr());
        let total = s.space.norm_sqr_coeffs(&f);
        let diff = lhs - rhs;
        if !diff.is_zero() {
            exact = false;
            worst = worst.max(relative(&diff, &total));
        }
    }
    Ok(Outcome::new(worst, judge::<R>(worst, exact, s.tol)))
}

fn lower_bound<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let note = "closed range checked through the smallest singular value of T on the truncation";
    if s.h.is_zero() {
        return Ok(Outcome::new(0.0, true).noted("zero subspace"));
    }
    let ladder = s.ladder()?;
    let t = ladder.t(0);
    let lb = lower_bound_with(s.n, &s.alpha);
    let coords = s.h.coords_space();

    let mut worst: f64 = 0.0;
    let mut holds = true;
    for g in s.samples(coords.dim()) {
        let total = coords.norm_sqr_coeffs(&g);
        let image = t.codomain().norm_sqr_coeffs(&t.apply_coeffs(&g));
        let gap = lb.clone() * total.clone() - image;
        if gap >= R::zero() {
            holds = false;
            worst = worst.max(relative(&gap, &total));
        }
    }

    let sigma = t.min_singular_value();
    worst = worst.max(lb.to_f64().sqrt() - sigma);
    let pass = if R::is_exact() {
        // T*T - lb I is positive definite in the metric of H.
        let gram = t.adjoint().compose(t)?;
        let shifted = gram.matrix() - &Matrix::identity(coords.dim()).scale(&real(lb));
        let metric: Vec<C<R>> = coords.metric().iter().cloned().map(real).collect();
        holds && matrix::is_positive_definite(&Matrix::from_diagonal(&metric).matmul(&shifted))
    } else {
        holds && worst <= s.tol
    };
    Ok(Outcome::new(worst.max(0.0), pass).noted(note))
}

fn adjoint_formula<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let shift = s.shift()?;
    let metric_adjoint = shift.adjoint();
    let explicit = shift_adjoint_from(&s.upper, &s.space, s.n, &s.coeffs)?;
    let diag: Vec<C<R>> = s.coeffs[..s.d()].iter().cloned().map(real).collect();
    let expected_gram = LinearMap::new(&s.space, &s.space, Matrix::from_diagonal(&diag))?;
    let gram = metric_adjoint.compose(&shift)?;
    let d = explicit
        .distance(&metric_adjoint)?
        .max(gram.distance(&expected_gram)?);
    Ok(from_discrepancy::<R>(d, s.tol))
}

fn astar_t<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let ladder = s.ladder()?;
    let mut d = Discrepancy::zero();
    for j in 0..s.depth {
        let id = LinearMap::identity(t_domain(ladder, j));
        d = d.max(ladder.a_adjoint(j).compose(ladder.t(j))?.distance(&id)?);
    }
    Ok(from_discrepancy::<R>(d, s.tol))
}

fn t_domain<R: Real>(ladder: &ShiftLadder<R>, j: usize) -> &TruncatedSpace<R> {
    ladder.t(j).domain()
}

fn projection<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let ladder = s.ladder()?;
    let mut d = Discrepancy::zero();
    for j in 0..s.depth {
        let t = ladder.t(j);
        let q = t.compose(ladder.a_adjoint(j))?;
        let id = LinearMap::identity(t.codomain());
        let e = wandering_coords(t);
        d = d
            .max(q.compose(&q)?.distance(&q)?)
            .max(q.adjoint().distance(&q)?)
            .max(q.compose(t)?.distance(t)?)
            .max(Discrepancy::of(&q.compose(&e.embedding())?))
            .max(id.subtract(&q)?.distance(&e.projector())?);
    }
    Ok(from_discrepancy::<R>(d, s.tol))
}

/// Projectors onto `E_j = H_j ⊖ T H_{j-1}` for `j = 1..=depth`, index `j-1`.
fn wandering_projectors<R: Real>(ladder: &ShiftLadder<R>) -> Vec<LinearMap<R>> {
    (0..ladder.depth())
        .map(|j| wandering_coords(ladder.t(j)).projector())
        .collect()
}

fn telescoping<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let ladder = s.ladder()?;
    let projectors = wandering_projectors(ladder);
    let mut d = Discrepancy::zero();
    for n in 1..=s.depth {
        let top = ladder.t(n - 1).codomain();
        let mut lhs = LinearMap::zero(top, top);
        for k in 0..n {
            let term = ladder
                .t_power(n - k, k)
                .compose(&projectors[n - k - 1])?
                .compose(&ladder.a_adjoint_power(n - k, k))?;
            lhs = lhs.add(&term)?;
        }
        let rhs = LinearMap::identity(top)
            .subtract(&ladder.t_power(0, n).compose(&ladder.a_adjoint_power(0, n))?)?;
        d = d.max(lhs.distance(&rhs)?);
    }
    Ok(from_discrepancy::<R>(d, s.tol))
}

fn kernel_containment<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let ladder = s.ladder()?;
    let classes = s.h.tag().map_or(0, Residues::len);
    let mut worst: f64 = 0.0;
    let mut exact = true;
    let mut dims_ok = true;
    let mut dims = Vec::new();
    for n in 1..=s.depth {
        let k = kernel(&ladder.a_adjoint_power(0, n), KERNEL_TOL);
        let top = ladder.t(n - 1).codomain();
        let mut generators = Vec::new();
        for j in 0..n {
            let level = n - j;
            let e = wandering_coords(ladder.t(level - 1));
            let tj = ladder.t_power(level, j);
            generators.extend(e.basis().iter().map(|v| tj.apply_coeffs(v)));
        }
        let w = Subspace::span(top, generators);
        for (v, g) in k.basis().iter().zip(k.sq_norms()) {
            let r = w.residual_sqr(v);
            if !r.is_zero() {
                exact = false;
                worst = worst.max((r / g.clone()).to_f64().sqrt());
            }
        }
        dims_ok &= k.dim() == n * classes && w.dim() == n * classes;
        dims.push(k.dim());
    }
    let pass = dims_ok && judge::<R>(worst, exact, s.tol);
    let note = format!("kernel dimensions {dims:?} for n = 1..={}, expected n * {classes}", s.depth);
    Ok(Outcome::new(worst, pass).noted(note))
}

fn expansive<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let ladder = s.ladder()?;
    let coords = s.h.coords_space();
    let d = coords.dim();
    let probes: Vec<Vec<C<R>>> = s
        .samples(d)
        .chain((0..d).map(|k| crate::subspaces::unit(d, k)))
        .collect();
    let mut worst: f64 = 0.0;
    let mut holds = true;
    for g in &probes {
        let total = coords.norm_sqr_coeffs(g);
        if total.is_zero() {
            continue;
        }
        let mut image = g.clone();
        for m in 0..s.depth {
            let a = ladder.a(m);
            image = a.apply_coeffs(&image);
            let gap = total.clone() - a.codomain().norm_sqr_coeffs(&image);
            if gap > R::zero() {
                holds = false;
                worst = worst.max(relative(&gap, &total));
            }
        }
    }
    let pass = if R::is_exact() { holds } else { worst <= s.tol };
    Ok(Outcome::new(worst, pass))
}

fn min_degree<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let ladder = s.ladder()?;
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for m in 1..=s.depth {
        let a = ladder.to_monomial(&ladder.a_power(0, m), 0, m);
        let a = a.matrix();
        for i in 0..(m * s.n).min(a.rows()) {
            for j in 0..a.cols() {
                let z = a.get(i, j);
                if !z.is_zero() {
                    exact = false;
                    worst = worst.max(z.norm_sqr().to_f64().sqrt());
                }
            }
        }
    }
    let note = format!(
        "trivial intersection of the ranges of A^m checked as: range of A^m vanishes below degree mN, m <= {}",
        s.depth
    );
    Ok(Outcome::new(worst, judge::<R>(worst, exact, s.tol)).noted(note))
}

fn reducing_tol<R: Real>(tol: f64) -> f64 {
    if R::is_exact() {
        0.0
    } else {
        tol
    }
}

fn beurling<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let shift = s.shift()?;
    let red = is_reducing(&shift, &s.h, reducing_tol::<R>(s.tol))?;
    if !red.reducing {
        return Err(Error::NotReducing {
            invariant: red.invariant_residual,
            adjoint: red.adjoint_residual,
        });
    }
    if s.h.is_zero() {
        return Ok(Outcome::new(0.0, true).noted("zero subspace"));
    }
    let restriction = restrict(&shift, &s.h)?;
    let e = wandering(&restriction);
    let classes = s.h.tag().map_or(0, Residues::len);
    let top = e.max_degree().unwrap_or(0);
    if top >= s.d() {
        return Err(Error::DepthOverflow {
            depth: 0,
            degree: top,
            dim: s.d(),
        });
    }
    let depth = (s.d() - 1 - top) / s.n;
    let closure = invariant_closure(&e, &shift, &s.h, depth)?;
    let cut = s.d().min((depth + 1) * s.n);
    let dist = subspace_distance(&closure.restrict_degrees(cut)?, &s.h.restrict_degrees(cut)?)?;
    let pass = e.dim() == classes && judge::<R>(dist, dist == 0.0, s.tol);
    let note = format!(
        "closure of E (dim {}) to depth {depth}, compared on degrees below {cut}",
        e.dim()
    );
    Ok(Outcome::new(dist, pass).noted(note))
}

fn reducing<R: Real>(s: &Setup<R>) -> Result<Outcome> {
    let shift = s.shift()?;
    let r = is_reducing(&shift, &s.h, reducing_tol::<R>(s.tol))?;
    Ok(Outcome::new(r.residual(), r.reducing))
}
