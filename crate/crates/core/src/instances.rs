//! Seeded instance generators.
//!
//! Every generator is a pure function of its [`GenSpec`]. Scenarios are
//! restricted to constructions whose hypothesis constants have closed forms
//! (scalings, diagonal weight shifts, planar rotations), so the constants
//! handed to the checkers are certified by construction rather than
//! estimated. Setting [`GenSpec::spoiler`] produces the negative control of
//! a scenario: an instance that violates the relevant hypothesis by a wide
//! margin.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{self, FrameError, WeightedSubspaceFamily};
use crate::kfusion::{self, KFusionError, KFusionInstance};
use crate::numerics::{self, c, Matrix, NumericsError, Subspace, DRAZIN_TOL, RANK_TOL};
use crate::rng::SeededRng;
use crate::theorems::{self, CheckError, CheckOptions, LambdaKind, PerturbationConstants, TheoremId, TheoremReport};
use num_complex::Complex64;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 32;

/// Weights are drawn log-uniformly from this interval.
pub const WEIGHT_RANGE: (f64, f64) = (0.5, 2.0);

/// Rotation constants are certified by a grid over each rotation plane with
/// this angular step, then inflated by [`ROTATION_SAFETY`].
pub const ROTATION_GRID_STEP: f64 = 1e-3;
pub const ROTATION_SAFETY: f64 = 1.01;

/// A generated family counts as spanning once `λ_min(S_W) > SPAN_RATIO·λ_max(S_W)`.
pub const SPAN_RATIO: f64 = 1e-4;

// Independent streams for the pieces of an instance.
const FAMILY_STREAM: u64 = 0;
const OPERATOR_STREAM: u64 = 0x6a09_e667_f3bc_c908;
const PERTURB_STREAM: u64 = 0xbb67_ae85_84ca_a73b;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scalar {
    #[default]
    Real,
    Complex,
}

impl Scalar {
    pub fn is_complex(self) -> bool {
        self == Scalar::Complex
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Coordinate axes with unit weights, cycling when there are more
    /// members than axes.
    Axes,
    /// Random subspaces and weights.
    Random,
    /// Random subspaces inside the hyperplane orthogonal to the last axis.
    Hyperplane,
    /// Operator of prescribed rank.
    Rank,
    /// Operator with prescribed Drazin index.
    DrazinIndex,
    /// Idempotent operator, with a family satisfying the image inclusion
    /// hypothesis.
    Idempotent,
    Invertible,
    /// A family with an erasure set of small total weight.
    Erasure,
    /// `K₂ = t·K₁`.
    Scale,
    /// `K₂ = K₁ + K₁·M` with `‖M‖ = ε`.
    Additive,
    /// `K₁ = I + E` with `‖E‖ = ε`, `K₂ = I`.
    IdentityTarget,
    /// The perturbed family equals the original.
    Identical,
    /// Weights decrease on a rotated coordinate-axis family.
    WeightShift,
    /// One member per disjoint coordinate plane is rotated within the plane.
    Rotation,
    /// `K = (1+ε)·T_W T_W*` for the reduced family.
    SynthesisScale,
    /// `K = (1+ε)·T_W T_W* + shift·P_{R(T_W)}` for the reduced family.
    SynthesisShift,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Axes => "axes",
            Scenario::Random => "random",
            Scenario::Hyperplane => "hyperplane",
            Scenario::Rank => "rank",
            Scenario::DrazinIndex => "drazin_index",
            Scenario::Idempotent => "idempotent",
            Scenario::Invertible => "invertible",
            Scenario::Erasure => "erasure",
            Scenario::Scale => "scale",
            Scenario::Additive => "additive",
            Scenario::IdentityTarget => "identity_target",
            Scenario::Identical => "identical",
            Scenario::WeightShift => "weight_shift",
            Scenario::Rotation => "rotation",
            Scenario::SynthesisScale => "synthesis_scale",
            Scenario::SynthesisShift => "synthesis_shift",
        }
    }
}

fn default_true() -> bool {
    true
}

/// Full description of one generated instance. Unset scenario parameters
/// are drawn from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub seed: u64,
    pub dim: usize,
    pub n_members: usize,
    pub max_subspace_dim: usize,
    pub scenario: Scenario,
    #[serde(default)]
    pub scalar: Scalar,
    /// Append coordinate axes until the family spans.
    #[serde(default = "default_true")]
    pub spanning: bool,
    #[serde(default)]
    pub spoiler: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orthogonal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drazin_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erased_set: Option<Vec<usize>>,
}

impl GenSpec {
    pub fn new(seed: u64, dim: usize, scenario: Scenario) -> Self {
        Self {
            seed,
            dim,
            n_members: dim,
            max_subspace_dim: 1.max(dim / 2),
            scenario,
            scalar: Scalar::Real,
            spanning: true,
            spoiler: false,
            rank: None,
            orthogonal: None,
            drazin_index: None,
            t: None,
            epsilon: None,
            delta: None,
            angle: None,
            shift: None,
            erased_set: None,
        }
    }

    pub fn complex(mut self) -> Self {
        self.scalar = Scalar::Complex;
        self
    }

    pub fn spoiled(mut self) -> Self {
        self.spoiler = true;
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |field: &'static str, reason: &str| {
            Err(GenError::InvalidSpec {
                field,
                reason: reason.to_owned(),
            })
        };
        if !(MIN_DIM..=MAX_DIM).contains(&self.dim) {
            return bad("dim", "must lie in [2, 32]");
        }
        if self.max_subspace_dim < 1 || self.max_subspace_dim > self.dim {
            return bad("max_subspace_dim", "must lie in [1, dim]");
        }
        if self.n_members < 1 {
            return bad("n_members", "must be at least 1");
        }
        if let Some(r) = self.rank {
            if r < 1 || r > self.dim {
                return bad("rank", "must lie in [1, dim]");
            }
        }
        if let Some(k) = self.drazin_index {
            if k < 1 || (k >= 2 && k > self.dim - 1) {
                return bad("drazin_index", "must be 1, or at most dim - 1");
            }
        }
        if let Some(t) = self.t {
            if !(t > 0.0 && t < 2.0) {
                return bad("t", "must lie in (0, 2)");
            }
        }
        if let Some(e) = self.epsilon {
            let limit = if self.scenario == Scenario::IdentityTarget { 1.0 } else { f64::INFINITY };
            if !(e >= 0.0 && e < limit) {
                return bad("epsilon", "must be non-negative (and below 1 for identity_target)");
            }
        }
        for (field, value) in [("delta", self.delta), ("angle", self.angle), ("shift", self.shift)] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(field, "must be positive");
                }
            }
        }
        if let Some(angle) = self.angle {
            if angle >= std::f64::consts::FRAC_PI_2 {
                return bad("angle", "must be below π/2");
            }
        }
        if let Some(set) = &self.erased_set {
            let mut sorted = set.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != set.len() {
                return bad("erased_set", "indices must be distinct");
            }
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> SeededRng {
        SeededRng::new(self.seed ^ stream)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },
    #[error("scenario `{0}` has no negative control")]
    NoSpoiler(&'static str),
    #[error("generated operator failed its property check: {0}")]
    Verification(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    KFusion(#[from] KFusionError),
}

/// Everything a checker may need. Fields irrelevant to the scenario are
/// `None` or empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    /// The spec it was generated from, if any.
    pub spec: Option<GenSpec>,
    pub family: WeightedSubspaceFamily,
    pub perturbed: Option<WeightedSubspaceFamily>,
    pub k: Option<Matrix>,
    pub k1: Option<Matrix>,
    pub k2: Option<Matrix>,
    pub constants: Option<PerturbationConstants>,
    pub r: Option<f64>,
    pub erased: Vec<usize>,
}

impl Instance {
    /// An instance holding only a family.
    pub fn from_family(family: WeightedSubspaceFamily) -> Self {
        Self {
            spec: None,
            family,
            perturbed: None,
            k: None,
            k1: None,
            k2: None,
            constants: None,
            r: None,
            erased: Vec::new(),
        }
    }

    fn new(spec: &GenSpec, family: WeightedSubspaceFamily) -> Self {
        Self {
            spec: Some(spec.clone()),
            family,
            perturbed: None,
            k: None,
            k1: None,
            k2: None,
            constants: None,
            r: None,
            erased: Vec::new(),
        }
    }
}

fn random_subspace(rng: &mut SeededRng, n: usize, d: usize, complex: bool) -> Subspace {
    loop {
        let s = Subspace::span(&rng.gaussian_matrix(n, d, complex));
        if s.dim() == d {
            return s;
        }
    }
}

fn weight(rng: &mut SeededRng) -> f64 {
    rng.log_uniform(WEIGHT_RANGE.0, WEIGHT_RANGE.1)
}

fn spans(pairs: &[(Subspace, f64)], n: usize) -> Result<bool, GenError> {
    let family = WeightedSubspaceFamily::from_pairs(n, pairs.iter().cloned())?;
    let b = frame::fusion_bounds(&family)?;
    Ok(b.upper > 0.0 && b.lower > SPAN_RATIO * b.upper)
}

/// Append weighted coordinate axes in order until the family spans.
fn append_axes(rng: &mut SeededRng, pairs: &mut Vec<(Subspace, f64)>, n: usize) -> Result<(), GenError> {
    for j in 0..n {
        if spans(pairs, n)? {
            break;
        }
        pairs.push((Subspace::axes(n, &[j]), weight(rng)));
    }
    Ok(())
}

fn family_with(rng: &mut SeededRng, spec: &GenSpec) -> Result<WeightedSubspaceFamily, GenError> {
    let n = spec.dim;
    let complex = spec.scalar.is_complex();
    let mut pairs = Vec::with_capacity(spec.n_members + n);
    match spec.scenario {
        Scenario::Axes => {
            pairs.extend((0..spec.n_members).map(|i| (Subspace::axes(n, &[i % n]), 1.0)));
        }
        Scenario::Hyperplane => {
            let top = spec.max_subspace_dim.min(n - 1);
            for _ in 0..spec.n_members {
                let d = rng.int_in(1, top);
                let inner = random_subspace(rng, n - 1, d, complex);
                let mut basis = Matrix::zeros(n, d);
                basis.view_mut((0, 0), (n - 1, d)).copy_from(inner.basis());
                pairs.push((Subspace::new(basis)?, weight(rng)));
            }
        }
        _ => {
            for _ in 0..spec.n_members {
                let d = rng.int_in(1, spec.max_subspace_dim);
                pairs.push((random_subspace(rng, n, d, complex), weight(rng)));
            }
            if spec.spanning {
                append_axes(rng, &mut pairs, n)?;
            }
        }
    }
    Ok(WeightedSubspaceFamily::from_pairs(n, pairs)?)
}

/// Weighted subspace family described by `spec`.
///
/// Subspaces are spans of Gaussian matrices with dimension uniform in
/// `[1, max_subspace_dim]`; weights are log-uniform in [`WEIGHT_RANGE`].
pub fn gen_family(spec: &GenSpec) -> Result<WeightedSubspaceFamily, GenError> {
    spec.validate()?;
    family_with(&mut spec.rng(FAMILY_STREAM), spec)
}

fn log_uniform_diag(rng: &mut SeededRng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.log_uniform(0.5, 2.0)).collect()
}

fn diag(values: &[Complex64]) -> Matrix {
    Matrix::from_diagonal(&numerics::Vector::from_column_slice(values))
}

/// `U1·diag(s)·U2` with `s` log-uniform in `[0.5, 2]`: condition number at
/// most 4.
fn well_conditioned(rng: &mut SeededRng, n: usize, complex: bool) -> Matrix {
    let s: Vec<Complex64> = log_uniform_diag(rng, n).into_iter().map(c).collect();
    rng.unitary(n, complex) * diag(&s) * rng.unitary(n, complex)
}

fn rank_operator(rng: &mut SeededRng, n: usize, rank: usize, complex: bool) -> Matrix {
    let mut s: Vec<Complex64> = log_uniform_diag(rng, rank).into_iter().map(c).collect();
    s.resize(n, c(0.0));
    rng.unitary(n, complex) * diag(&s) * rng.unitary(n, complex)
}

fn idempotent_operator(rng: &mut SeededRng, n: usize, rank: usize, orthogonal: bool, complex: bool) -> Matrix {
    let mut d = vec![c(1.0); rank];
    d.resize(n, c(0.0));
    let d = diag(&d);
    if orthogonal {
        let q = rng.unitary(n, complex);
        &q * d * q.adjoint()
    } else {
        let t = well_conditioned(rng, n, complex);
        let t_inv = t.clone().try_inverse().expect("well-conditioned similarity");
        t * d * t_inv
    }
}

/// Nilpotent Jordan blocks of sizes `block` (repeated) filling `m` rows.
fn nilpotent_block(m: usize, block: usize) -> Matrix {
    let mut j = Matrix::zeros(m, m);
    let mut start = 0;
    while start < m {
        let size = block.min(m - start);
        for i in 0..size.saturating_sub(1) {
            j[(start + i, start + i + 1)] = c(1.0);
        }
        start += size;
    }
    j
}

/// `T·blockdiag(C, N)·T⁻¹` with an invertible upper-triangular core `C`
/// (`|λ| ∈ [0.5, 2]`) and a nilpotent part of index `index`.
fn drazin_operator(rng: &mut SeededRng, n: usize, index: usize, complex: bool) -> Matrix {
    let m = if index == 1 { rng.int_in(0, n - 1) } else { rng.int_in(index, n - 1) };
    let r = n - m;
    let mut core = Matrix::zeros(r, r);
    for i in 0..r {
        let magnitude = rng.log_uniform(0.5, 2.0);
        core[(i, i)] = if complex {
            Complex64::from_polar(magnitude, rng.uniform_in(0.0, std::f64::consts::TAU))
        } else if rng.uniform() < 0.5 {
            c(-magnitude)
        } else {
            c(magnitude)
        };
        for j in i + 1..r {
            core[(i, j)] = rng.scalar(complex) * (0.3 / (r as f64).sqrt());
        }
    }
    let mut block = Matrix::zeros(n, n);
    block.view_mut((0, 0), (r, r)).copy_from(&core);
    if m > 0 {
        block.view_mut((r, r), (m, m)).copy_from(&nilpotent_block(m, index.max(1)));
    }
    similar(rng, &block, complex)
}

fn similar(rng: &mut SeededRng, block: &Matrix, complex: bool) -> Matrix {
    let t = well_conditioned(rng, block.nrows(), complex);
    let t_inv = t.clone().try_inverse().expect("well-conditioned similarity");
    t * block * t_inv
}

fn draw_rank(rng: &mut SeededRng, spec: &GenSpec) -> usize {
    spec.rank.unwrap_or_else(|| rng.int_in(1, spec.dim))
}

fn operator_with(rng: &mut SeededRng, spec: &GenSpec) -> Result<Matrix, GenError> {
    let n = spec.dim;
    let complex = spec.scalar.is_complex();
    let k = match spec.scenario {
        Scenario::Idempotent => {
            let rank = draw_rank(rng, spec);
            let orthogonal = spec.orthogonal.unwrap_or_else(|| rng.uniform() < 0.5);
            let k = idempotent_operator(rng, n, rank, orthogonal, complex);
            let residual = numerics::operator_norm(&(&k * &k - &k));
            if residual > 1e-10 * numerics::operator_norm(&k).max(1.0) {
                return Err(GenError::Verification(format!("‖K² - K‖ = {residual:e}")));
            }
            k
        }
        Scenario::DrazinIndex => {
            let index = spec.drazin_index.unwrap_or_else(|| rng.int_in(1, 3.min(n - 1)));
            let k = drazin_operator(rng, n, index, complex);
            let found = numerics::drazin(&k, DRAZIN_TOL)?.index;
            if found != index {
                return Err(GenError::Verification(format!("Drazin index {found}, expected {index}")));
            }
            k
        }
        Scenario::Invertible => well_conditioned(rng, n, complex),
        _ => {
            let rank = draw_rank(rng, spec);
            rank_operator(rng, n, rank, complex)
        }
    };
    Ok(k)
}

/// Operator with the property selected by the scenario: prescribed rank,
/// idempotent (oblique, or orthogonal when `orthogonal` is set), prescribed
/// Drazin index, or invertible. Other scenarios yield a random operator of
/// prescribed (or random) rank.
pub fn gen_operator(spec: &GenSpec) -> Result<Matrix, GenError> {
    spec.validate()?;
    operator_with(&mut spec.rng(OPERATOR_STREAM), spec)
}

/// A family whose members split as `P_{R(K*)}X ⊕ P_{N(K)}Y`, so that
/// `K†K(W_i) ⊆ W_i`, made spanning with orthonormal bases of both pieces.
fn adapted_family(rng: &mut SeededRng, spec: &GenSpec, k: &Matrix) -> Result<WeightedSubspaceFamily, GenError> {
    let n = spec.dim;
    let complex = spec.scalar.is_complex();
    let row_space = numerics::pinv(k, RANK_TOL) * k;
    let kernel = Matrix::identity(n, n) - &row_space;
    let mut pairs = Vec::new();
    while pairs.len() < spec.n_members {
        let d = rng.int_in(1, spec.max_subspace_dim);
        let dx = rng.int_in(0, d);
        let mut vectors = Matrix::zeros(n, d);
        vectors
            .view_mut((0, 0), (n, dx))
            .copy_from(&(&row_space * rng.gaussian_matrix(n, dx, complex)));
        vectors
            .view_mut((0, dx), (n, d - dx))
            .copy_from(&(&kernel * rng.gaussian_matrix(n, d - dx, complex)));
        let w = Subspace::span(&vectors);
        if w.dim() > 0 {
            pairs.push((w, weight(rng)));
        }
    }
    for piece in [&row_space, &kernel] {
        let basis = numerics::range_basis(piece, RANK_TOL);
        for j in 0..basis.dim() {
            let column = basis.basis().columns(j, 1).into_owned();
            pairs.push((Subspace::new(column)?, weight(rng)));
        }
    }
    Ok(WeightedSubspaceFamily::from_pairs(n, pairs)?)
}

fn nilpotent_operator(rng: &mut SeededRng, n: usize, complex: bool) -> Matrix {
    let block = rng.int_in(2, n);
    similar(rng, &nilpotent_block(n, block), complex)
}

/// `(K₁, K₂, constants)` for the operator perturbation hypothesis
/// `‖(K₁* - K₂*)f‖ <= a‖K₁*f‖ + b‖K₂*f‖`.
///
/// * `scale`: `K₂ = t·K₁`; `a = 1 - t` for `t <= 1`, else `b = (t-1)/t`.
/// * `additive`: `K₂ = K₁ + K₁M`, so `K₁* - K₂* = -M*K₁*` and `a = ‖M‖ = ε`.
/// * `identity_target`: `K₁ = I + E`, `K₂ = I`, `b = ‖E‖ = ε`.
pub fn gen_operator_pair(spec: &GenSpec) -> Result<(Matrix, Matrix, PerturbationConstants), GenError> {
    spec.validate()?;
    operator_pair_with(&mut spec.rng(OPERATOR_STREAM), spec)
}

fn operator_pair_with(
    rng: &mut SeededRng,
    spec: &GenSpec,
) -> Result<(Matrix, Matrix, PerturbationConstants), GenError> {
    let n = spec.dim;
    let complex = spec.scalar.is_complex();
    match spec.scenario {
        Scenario::Scale => {
            let t = spec.t.unwrap_or_else(|| {
                let u = rng.uniform_in(0.1, 0.9);
                if rng.uniform() < 0.5 {
                    u
                } else {
                    2.0 - u
                }
            });
            let rank = draw_rank(rng, spec);
            let k1 = rank_operator(rng, n, rank, complex);
            let k2 = k1.scale(t);
            let constants = if t <= 1.0 {
                PerturbationConstants::new(1.0 - t, 0.0, 0.0)
            } else {
                PerturbationConstants::new(0.0, (t - 1.0) / t, 0.0)
            };
            Ok((k1, k2, constants))
        }
        Scenario::Additive => {
            let eps = spec.epsilon.unwrap_or_else(|| rng.log_uniform(0.01, 0.3));
            let rank = draw_rank(rng, spec);
            let k1 = rank_operator(rng, n, rank, complex);
            let g = rng.gaussian_matrix(n, n, complex);
            let m = g.scale(eps / numerics::operator_norm(&g));
            let k2 = &k1 + &k1 * &m;
            Ok((k1, k2, PerturbationConstants::new(numerics::operator_norm(&m), 0.0, 0.0)))
        }
        Scenario::IdentityTarget => {
            let eps = spec.epsilon.unwrap_or_else(|| rng.uniform_in(0.01, 0.5));
            let g = rng.gaussian_matrix(n, n, complex);
            let e = g.scale(eps / numerics::operator_norm(&g));
            let k1 = Matrix::identity(n, n) + &e;
            Ok((k1, Matrix::identity(n, n), PerturbationConstants::new(0.0, numerics::operator_norm(&e), 0.0)))
        }
        other => Err(GenError::InvalidSpec {
            field: "scenario",
            reason: format!("`{}` is not an operator pair scenario", other.as_str()),
        }),
    }
}

/// Perturbed pair together with its certified constants.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedPair {
    pub original: WeightedSubspaceFamily,
    pub perturbed: WeightedSubspaceFamily,
    /// Constants for the projection hypothesis (any `Λ`; `c = 0`).
    pub constants: PerturbationConstants,
    /// Constant `R` of the quadratic form hypothesis for [`Self::k`], when
    /// it has a closed form.
    pub r: Option<f64>,
    pub k: Matrix,
}

/// `(Ww, Vv, constants)` for the `identical`, `weight_shift` and `rotation`
/// scenarios.
///
/// Weight shifts and rotations act on a coordinate-axis family (axes
/// repeated when there are more members than axes) seen through a random
/// unitary, so every quadratic form is diagonal up to that change of basis.
pub fn gen_perturbed_pair(spec: &GenSpec) -> Result<PerturbedPair, GenError> {
    spec.validate()?;
    perturbed_pair_with(&mut spec.rng(PERTURB_STREAM), spec)
}

fn axis_assignment(rng: &mut SeededRng, n: usize, n_members: usize) -> Vec<usize> {
    let mut axes: Vec<usize> = (0..n).collect();
    axes.extend((n..n_members.max(n)).map(|_| rng.int_in(0, n - 1)));
    axes
}

/// `S_W` diagonal entries of an axis family.
fn axis_sums(axes: &[usize], squares: &[f64], n: usize) -> Vec<f64> {
    let mut sums = vec![0.0; n];
    for (&j, &s) in axes.iter().zip(squares) {
        sums[j] += s;
    }
    sums
}

fn axis_family(
    q: &Matrix,
    axes: &[usize],
    weights: &[f64],
    overrides: &[(usize, Subspace)],
) -> Result<WeightedSubspaceFamily, GenError> {
    let n = q.nrows();
    let pairs = axes.iter().zip(weights).enumerate().map(|(i, (&j, &w))| {
        let local = overrides
            .iter()
            .find(|(m, _)| *m == i)
            .map(|(_, s)| s.clone())
            .unwrap_or_else(|| Subspace::axes(n, &[j]));
        (local.transformed(q), w)
    });
    Ok(WeightedSubspaceFamily::from_pairs(n, pairs)?)
}

fn perturbed_pair_with(rng: &mut SeededRng, spec: &GenSpec) -> Result<PerturbedPair, GenError> {
    let n = spec.dim;
    let complex = spec.scalar.is_complex();
    match spec.scenario {
        Scenario::Identical => {
            let family = family_with(rng, &GenSpec {
                scenario: Scenario::Random,
                spanning: true,
                ..spec.clone()
            })?;
            let rank = draw_rank(rng, spec);
            let k = rank_operator(rng, n, rank, complex);
            let a = kfusion::k_lower_bound(&KFusionInstance::new(family.clone(), k.clone())?)?;
            Ok(PerturbedPair {
                perturbed: family.clone(),
                original: family,
                constants: PerturbationConstants::default(),
                r: Some(0.01 * a),
                k,
            })
        }
        Scenario::WeightShift => weight_shift(rng, spec),
        Scenario::Rotation => rotation(rng, spec),
        other => Err(GenError::InvalidSpec {
            field: "scenario",
            reason: format!("`{}` is not a perturbed pair scenario", other.as_str()),
        }),
    }
}

/// Decrease weights `v_i² = w_i² - δ_i` on an axis family.
///
/// On axis `j` the block hypothesis reduces to
/// `Σ_{i→j}(w_i - v_i)² <= a²·Σ_{i→j} w_i²`, and the quadratic form
/// hypothesis to `Σ_{i→j} δ_i <= R·s²` for `K = s·U`.
fn weight_shift(rng: &mut SeededRng, spec: &GenSpec) -> Result<PerturbedPair, GenError> {
    let n = spec.dim;
    let complex = spec.scalar.is_complex();
    let q = rng.unitary(n, complex);
    let axes = axis_assignment(rng, n, spec.n_members);
    let weights: Vec<f64> = axes.iter().map(|_| weight(rng)).collect();
    let squares: Vec<f64> = weights.iter().map(|w| w * w).collect();
    let sums = axis_sums(&axes, &squares, n);
    let lower = sums.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = sums.iter().copied().fold(0.0, f64::max);

    let (deltas, k_scale) = match spec.delta {
        Some(delta) => {
            if delta >= squares[0] {
                return Err(GenError::InvalidSpec {
                    field: "delta",
                    reason: "must be below the first squared weight".into(),
                });
            }
            let mut d = vec![0.0; axes.len()];
            d[0] = delta;
            (d, 1.0)
        }
        None => {
            let mut fractions: Vec<f64> = axes
                .iter()
                .enumerate()
                .map(|(i, _)| if i == 0 || rng.uniform() < 0.5 { rng.uniform_in(0.05, 0.3) } else { 0.0 })
                .collect();
            let s = rng.log_uniform(0.5, 2.0);
            // Keep the constants admissible for every conclusion.
            for _ in 0..60 {
                let d: Vec<f64> = fractions.iter().zip(&squares).map(|(f, w2)| f * w2).collect();
                let (a, _) = shift_constants(&axes, &squares, &d, n);
                let worst = axis_sums(&axes, &d, n).into_iter().fold(0.0, f64::max);
                if a * upper.sqrt() <= 0.9 * lower.sqrt() && worst <= 0.9 * lower {
                    break;
                }
                fractions.iter_mut().for_each(|f| *f *= 0.5);
            }
            (fractions.iter().zip(&squares).map(|(f, w2)| f * w2).collect(), s)
        }
    };
    let (a, shift_sum) = shift_constants(&axes, &squares, &deltas, n);
    let shifted: Vec<f64> = squares.iter().zip(&deltas).map(|(w2, d)| (w2 - d).sqrt()).collect();
    let k = rng.unitary(n, complex).scale(k_scale);
    Ok(PerturbedPair {
        original: axis_family(&q, &axes, &weights, &[])?,
        perturbed: axis_family(&q, &axes, &shifted, &[])?,
        constants: PerturbationConstants::new(a, 0.0, 0.0),
        r: Some(shift_sum / (k_scale * k_scale)),
        k,
    })
}

/// `(a, max_j Σ_{i→j} δ_i)` for a weight shift.
fn shift_constants(axes: &[usize], squares: &[f64], deltas: &[f64], n: usize) -> (f64, f64) {
    let gaps: Vec<f64> = squares
        .iter()
        .zip(deltas)
        .map(|(w2, d)| (w2.sqrt() - (w2 - d).sqrt()).powi(2))
        .collect();
    let num = axis_sums(axes, &gaps, n);
    let den = axis_sums(axes, squares, n);
    let a2 = num.iter().zip(&den).map(|(x, y)| x / y).fold(0.0, f64::max);
    let worst = axis_sums(axes, deltas, n).into_iter().fold(0.0, f64::max);
    (a2.sqrt(), worst)
}

/// Largest `√(‖w(P_{e_p} - P_u)f‖² / f*diag(s_p, s_q)f)` over a grid of
/// unit vectors `f` in the plane, `u = cos θ·e_p + sin θ·e_q`.
pub fn rotation_plane_constant(weight: f64, theta: f64, s_p: f64, s_q: f64) -> f64 {
    let (sin, cos) = theta.sin_cos();
    let steps = (std::f64::consts::PI / ROTATION_GRID_STEP).ceil() as usize;
    let mut best = 0.0_f64;
    for step in 0..steps {
        let phi = step as f64 * ROTATION_GRID_STEP;
        let (y, x) = phi.sin_cos();
        // (P_{e_p} - P_u)(x, y) = (x, 0) - (cos·x + sin·y)(cos, sin).
        let along = cos * x + sin * y;
        let dx = x - along * cos;
        let dy = -along * sin;
        let ratio = weight * weight * (dx * dx + dy * dy) / (s_p * x * x + s_q * y * y);
        best = best.max(ratio);
    }
    best.sqrt()
}

/// Rotate one member per disjoint coordinate plane. The block hypothesis
/// decouples over the planes and the constant `a` is certified on a grid
/// over each plane.
fn rotation(rng: &mut SeededRng, spec: &GenSpec) -> Result<PerturbedPair, GenError> {
    let n = spec.dim;
    let complex = spec.scalar.is_complex();
    let q = rng.unitary(n, complex);
    let axes = axis_assignment(rng, n, spec.n_members);
    let weights: Vec<f64> = axes.iter().map(|_| weight(rng)).collect();
    let squares: Vec<f64> = weights.iter().map(|w| w * w).collect();
    let sums = axis_sums(&axes, &squares, n);
    let lower = sums.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = sums.iter().copied().fold(0.0, f64::max);

    let mut shuffled: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        shuffled.swap(i, rng.int_in(0, i));
    }
    let n_planes = rng.int_in(1, n / 2);
    let planes: Vec<(usize, usize)> = (0..n_planes).map(|j| (shuffled[2 * j], shuffled[2 * j + 1])).collect();
    let mut angles: Vec<f64> = planes
        .iter()
        .map(|_| spec.angle.unwrap_or_else(|| rng.uniform_in(0.005, 0.05)))
        .collect();

    let certify = |angles: &[f64]| {
        planes
            .iter()
            .zip(angles)
            .map(|(&(p, qq), &theta)| ROTATION_SAFETY * rotation_plane_constant(weights[p], theta, sums[p], sums[qq]))
            .fold(0.0, f64::max)
    };
    let mut a = certify(&angles);
    if spec.angle.is_none() {
        for _ in 0..60 {
            if a * upper.sqrt() <= 0.9 * lower.sqrt() {
                break;
            }
            angles.iter_mut().for_each(|t| *t *= 0.5);
            a = certify(&angles);
        }
    }
    // Member p (p < n) is the first member on axis p.
    let overrides: Vec<(usize, Subspace)> = planes
        .iter()
        .zip(&angles)
        .map(|(&(p, qq), &theta)| {
            let mut u = Matrix::zeros(n, 1);
            u[(p, 0)] = c(theta.cos());
            u[(qq, 0)] = c(theta.sin());
            (p, Subspace::span(&u))
        })
        .collect();
    let rank = draw_rank(rng, spec);
    let k = rank_operator(rng, n, rank, complex);
    Ok(PerturbedPair {
        original: axis_family(&q, &axes, &weights, &[])?,
        perturbed: axis_family(&q, &axes, &weights, &overrides)?,
        constants: PerturbationConstants::new(a, 0.0, 0.0),
        r: None,
        k,
    })
}

fn draw_erased(rng: &mut SeededRng, spec: &GenSpec, len: usize) -> Result<Vec<usize>, GenError> {
    if let Some(set) = &spec.erased_set {
        if set.iter().any(|&i| i >= len) || set.len() >= len {
            return Err(GenError::InvalidSpec {
                field: "erased_set",
                reason: format!("must be a strict subset of the {len} member indices"),
            });
        }
        let mut set = set.clone();
        set.sort_unstable();
        return Ok(set);
    }
    let size = rng.int_in(0, (len - 1) / 2);
    Ok(rng.subset(len, size))
}

/// Instance of the scenario in `spec`, or its negative control when
/// `spec.spoiler` is set.
pub fn gen_instance(spec: &GenSpec) -> Result<Instance, GenError> {
    spec.validate()?;
    let n = spec.dim;
    let complex = spec.scalar.is_complex();
    let mut frng = spec.rng(FAMILY_STREAM);
    let mut orng = spec.rng(OPERATOR_STREAM);
    match spec.scenario {
        Scenario::Axes | Scenario::Random | Scenario::Hyperplane | Scenario::Rank | Scenario::Invertible => {
            if spec.spoiler {
                return Err(GenError::NoSpoiler(spec.scenario.as_str()));
            }
            let mut inst = Instance::new(spec, family_with(&mut frng, spec)?);
            inst.k = Some(match spec.scenario {
                Scenario::Rank | Scenario::Invertible => operator_with(&mut orng, spec)?,
                _ => Matrix::identity(n, n),
            });
            Ok(inst)
        }
        Scenario::Idempotent => {
            let k = operator_with(&mut orng, spec)?;
            let family = adapted_family(&mut frng, spec, &k)?;
            let mut inst = Instance::new(spec, family);
            inst.k = Some(if spec.spoiler { k.scale(1.5) } else { k });
            Ok(inst)
        }
        Scenario::DrazinIndex => {
            let k = if spec.spoiler {
                nilpotent_operator(&mut orng, n, complex)
            } else {
                operator_with(&mut orng, spec)?
            };
            let mut inst = Instance::new(spec, family_with(&mut frng, &spanning(spec))?);
            inst.k = Some(k);
            Ok(inst)
        }
        Scenario::Erasure => erasure_instance(&mut frng, &mut orng, spec),
        Scenario::Scale | Scenario::Additive | Scenario::IdentityTarget => {
            let (k1, k2, constants) = operator_pair_with(&mut orng, spec)?;
            let mut inst = Instance::new(spec, family_with(&mut frng, &spanning(spec))?);
            inst.k1 = Some(k1);
            inst.k2 = Some(k2);
            inst.constants = Some(if spec.spoiler { PerturbationConstants::default() } else { constants });
            Ok(inst)
        }
        Scenario::Identical | Scenario::WeightShift | Scenario::Rotation => {
            let pair = perturbed_pair_with(&mut spec.rng(PERTURB_STREAM), spec)?;
            let mut inst = Instance::new(spec, pair.original);
            inst.perturbed = Some(pair.perturbed);
            inst.k = Some(pair.k);
            let mut constants = pair.constants;
            let mut r = pair.r;
            if spec.spoiler {
                match spec.scenario {
                    Scenario::Identical => {
                        constants.b = 1.5;
                        r = r.map(|r| r * 200.0);
                    }
                    Scenario::WeightShift => {
                        constants.a *= 0.5;
                        r = r.map(|r| r * 0.5);
                    }
                    _ => constants.a = 0.0,
                }
            }
            inst.constants = Some(constants);
            inst.r = r;
            Ok(inst)
        }
        Scenario::SynthesisScale | Scenario::SynthesisShift => synthesis_instance(&mut frng, spec),
    }
}

fn spanning(spec: &GenSpec) -> GenSpec {
    GenSpec {
        scenario: Scenario::Random,
        spanning: true,
        ..spec.clone()
    }
}

/// Erase members in random order while `C‖K†‖² <= A/2`. The negative
/// control appends a heavy one-dimensional member and erases it.
fn erasure_instance(frng: &mut SeededRng, orng: &mut SeededRng, spec: &GenSpec) -> Result<Instance, GenError> {
    let n = spec.dim;
    let complex = spec.scalar.is_complex();
    let family = family_with(frng, &spanning(spec))?;
    let rank = draw_rank(orng, spec);
    let k = rank_operator(orng, n, rank, complex);
    let k_pinv_norm = numerics::operator_norm(&numerics::pinv(&k, RANK_TOL));
    let penalty = k_pinv_norm * k_pinv_norm;

    if spec.spoiler {
        let u = random_subspace(frng, n, 1, complex);
        let top = frame::fusion_bounds(&family)?.upper;
        let mut w2 = top / penalty;
        for _ in 0..60 {
            let mut pairs: Vec<(Subspace, f64)> =
                family.members().iter().map(|m| (m.subspace.clone(), m.weight)).collect();
            pairs.push((u.clone(), w2.sqrt()));
            let heavy = WeightedSubspaceFamily::from_pairs(n, pairs)?;
            let a = kfusion::k_lower_bound(&KFusionInstance::new(heavy.clone(), k.clone())?)?;
            if w2 * penalty >= 2.0 * a {
                let mut inst = Instance::new(spec, heavy);
                inst.erased = vec![family.len()];
                inst.k = Some(k);
                return Ok(inst);
            }
            w2 *= 4.0;
        }
        return Err(GenError::Verification("no violating erasure found".into()));
    }

    let erased = match &spec.erased_set {
        Some(_) => draw_erased(frng, spec, family.len())?,
        None => {
            let a = kfusion::k_lower_bound(&KFusionInstance::new(family.clone(), k.clone())?)?;
            let mut order: Vec<usize> = (0..family.len()).collect();
            for i in (1..order.len()).rev() {
                order.swap(i, frng.int_in(0, i));
            }
            let mut erased = Vec::new();
            let mut total = 0.0;
            for i in order {
                let w2 = family.members()[i].weight.powi(2);
                if erased.len() + 1 < family.len() && (total + w2) * penalty <= 0.5 * a {
                    total += w2;
                    erased.push(i);
                }
            }
            erased.sort_unstable();
            erased
        }
    };
    let mut inst = Instance::new(spec, family);
    inst.erased = erased;
    inst.k = Some(k);
    Ok(inst)
}

/// `K = (1+ε)·S + shift·P_{R(S)}` with `S` the reduced family's operator.
/// Then `K* - S = ε/(1+ε)·K* + shift/(1+ε)·P_{R(S)}`.
fn synthesis_instance(rng: &mut SeededRng, spec: &GenSpec) -> Result<Instance, GenError> {
    let n = spec.dim;
    let family = family_with(rng, &GenSpec {
        scenario: Scenario::Random,
        ..spec.clone()
    })?;
    let erased = draw_erased(rng, spec, family.len())?;
    let s = frame::fusion_operator(&family.without(&erased));
    let top = numerics::hermitian_eigenvalues(&s).last().copied().unwrap_or(0.0);
    let mut eps = spec
        .epsilon
        .unwrap_or_else(|| if rng.uniform() < 0.25 { 0.0 } else { rng.uniform_in(0.01, 0.5) });
    if spec.spoiler && spec.scenario == Scenario::SynthesisScale {
        eps = eps.max(0.1);
    }
    let mut k = s.scale(1.0 + eps);
    let mut constants = PerturbationConstants::new(eps / (1.0 + eps), 0.0, 0.0);
    if spec.scenario == Scenario::SynthesisShift {
        let shift = spec.shift.unwrap_or_else(|| rng.uniform_in(0.01, 0.5) * top);
        let p = numerics::range_basis(&s, RANK_TOL).projector();
        k += p.scale(shift);
        constants.c = shift / (1.0 + eps);
    }
    if spec.spoiler {
        match spec.scenario {
            Scenario::SynthesisScale => constants.a = 0.0,
            _ => constants.c = 0.0,
        }
    }
    debug_assert_eq!(k.nrows(), n);
    let mut inst = Instance::new(spec, family);
    inst.erased = erased;
    inst.k = Some(k);
    inst.constants = Some(constants);
    Ok(inst)
}

fn missing(theorem: TheoremId, what: &str) -> CheckError {
    CheckError::InvalidInput {
        theorem,
        reason: format!("instance has no {what}"),
    }
}

/// Run the checker for `theorem` on an instance.
pub fn check_instance(inst: &Instance, theorem: TheoremId, opts: &CheckOptions) -> Result<TheoremReport, CheckError> {
    let k = || inst.k.clone().ok_or_else(|| missing(theorem, "operator K"));
    let constants = || inst.constants.ok_or_else(|| missing(theorem, "constants"));
    let perturbed = || inst.perturbed.as_ref().ok_or_else(|| missing(theorem, "perturbed family"));
    let family = &inst.family;
    match theorem {
        TheoremId::ImageUnderK => theorems::check_image_under_k(&KFusionInstance::new(family.clone(), k()?)?, opts),
        TheoremId::DrazinComposition => theorems::check_drazin(&KFusionInstance::new(family.clone(), k()?)?, opts),
        TheoremId::Erasure => {
            theorems::check_erasure(&KFusionInstance::new(family.clone(), k()?)?, &inst.erased, opts)
        }
        TheoremId::OperatorPerturbation => {
            let k1 = inst.k1.as_ref().ok_or_else(|| missing(theorem, "operator K1"))?;
            let k2 = inst.k2.as_ref().ok_or_else(|| missing(theorem, "operator K2"))?;
            theorems::check_operator_perturbation(family, k1, k2, constants()?, opts)
        }
        TheoremId::ProjectionBessel | TheoremId::ProjectionKFusion | TheoremId::ProjectionFusion => {
            let lambda = match theorem {
                TheoremId::ProjectionBessel => LambdaKind::Zero,
                TheoremId::ProjectionKFusion => LambdaKind::KStarNorm,
                _ => LambdaKind::PlainNorm,
            };
            theorems::check_projection_perturbation(family, perturbed()?, constants()?, lambda, inst.k.as_ref(), opts)
        }
        TheoremId::QuadraticPerturbation => {
            let r = inst.r.ok_or_else(|| missing(theorem, "constant R"))?;
            theorems::check_quadratic_perturbation(family, perturbed()?, &k()?, r, opts)
        }
        TheoremId::SynthesisPerturbation | TheoremId::SynthesisOnRange => theorems::check_synthesis_perturbation(
            family,
            &inst.erased,
            &k()?,
            constants()?,
            opts,
            theorem == TheoremId::SynthesisOnRange,
        ),
    }
}

/// Scenarios that exercise a theorem's hypotheses in the default suite.
pub fn scenarios_for(theorem: TheoremId) -> &'static [Scenario] {
    match theorem {
        TheoremId::ImageUnderK => &[Scenario::Idempotent],
        TheoremId::DrazinComposition => &[Scenario::DrazinIndex],
        TheoremId::Erasure => &[Scenario::Erasure],
        TheoremId::OperatorPerturbation => &[Scenario::Scale, Scenario::Additive, Scenario::IdentityTarget],
        TheoremId::ProjectionBessel | TheoremId::ProjectionKFusion | TheoremId::ProjectionFusion => {
            &[Scenario::Identical, Scenario::WeightShift, Scenario::Rotation]
        }
        TheoremId::QuadraticPerturbation => &[Scenario::Identical, Scenario::WeightShift],
        TheoremId::SynthesisPerturbation => &[Scenario::SynthesisScale],
        TheoremId::SynthesisOnRange => &[Scenario::SynthesisScale, Scenario::SynthesisShift],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64, dim: usize, scenario: Scenario) -> GenSpec {
        GenSpec {
            n_members: dim + 1,
            ..GenSpec::new(seed, dim, scenario)
        }
    }

    #[test]
    fn axes_family_is_tight() {
        let family = gen_family(&GenSpec::new(1, 3, Scenario::Axes)).unwrap();
        let b = frame::fusion_bounds(&family).unwrap();
        assert_eq!(family.len(), 3);
        assert!((b.lower - 1.0).abs() < 1e-14 && (b.upper - 1.0).abs() < 1e-14);
    }

    #[test]
    fn spanning_and_hyperplane_families() {
        for seed in 0..10 {
            let s = GenSpec {
                n_members: 2,
                max_subspace_dim: 1,
                ..GenSpec::new(seed, 5, Scenario::Random)
            };
            assert!(frame::fusion_bounds(&gen_family(&s).unwrap()).unwrap().lower > 0.0);
            let h = GenSpec {
                n_members: 8,
                max_subspace_dim: 4,
                ..GenSpec::new(seed, 5, Scenario::Hyperplane)
            };
            let fam = gen_family(&h).unwrap();
            let eig = numerics::hermitian_eigenvalues(&frame::fusion_operator(&fam));
            assert!(eig[0].abs() < 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for scenario in [Scenario::Random, Scenario::Rotation, Scenario::Erasure, Scenario::SynthesisShift] {
            let s = spec(99, 6, scenario).complex();
            let a = gen_instance(&s).unwrap();
            let b = gen_instance(&s).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn operators_have_their_properties() {
        let mut s = spec(3, 6, Scenario::Idempotent);
        s.orthogonal = Some(true);
        s.rank = Some(3);
        let k = gen_operator(&s).unwrap();
        assert!(numerics::operator_norm(&(&k - k.adjoint())) < 1e-12);
        assert!(numerics::operator_norm(&(&k * &k - &k)) < 1e-12);
        assert_eq!(numerics::range_basis(&k, RANK_TOL).dim(), 3);

        for index in 1..=3 {
            for seed in 0..5 {
                let mut s = spec(seed, 6, Scenario::DrazinIndex);
                s.drazin_index = Some(index);
                let k = gen_operator(&s).unwrap();
                let d = numerics::drazin(&k, DRAZIN_TOL).unwrap();
                assert_eq!(d.index, index);
            }
        }

        let mut s = spec(5, 7, Scenario::Rank);
        s.rank = Some(4);
        assert_eq!(numerics::range_basis(&gen_operator(&s).unwrap(), RANK_TOL).dim(), 4);
    }

    #[test]
    fn operator_pair_constants() {
        let mut s = spec(1, 4, Scenario::Scale);
        s.t = Some(1.0);
        let (k1, k2, c) = gen_operator_pair(&s).unwrap();
        assert_eq!(k1, k2);
        assert_eq!(c, PerturbationConstants::default());

        s.t = Some(0.5);
        let (_, _, c) = gen_operator_pair(&s).unwrap();
        assert_eq!(c, PerturbationConstants::new(0.5, 0.0, 0.0));

        let mut s = spec(2, 4, Scenario::Additive);
        s.epsilon = Some(0.01);
        let (_, _, c) = gen_operator_pair(&s).unwrap();
        assert!((c.a - 0.01).abs() < 1e-14);
    }

    #[test]
    fn perturbed_pair_constants() {
        let pair = gen_perturbed_pair(&spec(4, 5, Scenario::Identical)).unwrap();
        assert_eq!(pair.constants, PerturbationConstants::default());

        let mut s = GenSpec::new(5, 3, Scenario::WeightShift);
        s.delta = Some(0.1);
        let pair = gen_perturbed_pair(&s).unwrap();
        assert!((pair.r.unwrap() - 0.1).abs() < 1e-15);

        // Matched unit weights, one plane: the certified constant lies in
        // [sin θ, 1.01 sin θ].
        let theta = 0.05_f64;
        let a = ROTATION_SAFETY * rotation_plane_constant(1.0, theta, 1.0, 1.0);
        assert!(a >= theta.sin() && a <= 1.01 * theta.sin() * (1.0 + 1e-12));
    }

    #[test]
    fn rotation_grid_matches_generalized_eigenvalue() {
        // Oracle: the largest generalized eigenvalue of (D, diag(s_p, s_q)).
        let (w, theta, sp, sq): (f64, f64, f64, f64) = (1.3, 0.04, 2.0, 0.7);
        let (s, co) = theta.sin_cos();
        let x = numerics::real_matrix(2, 2, &[1.0 - co * co, -co * s, -co * s, -s * s]).scale(w);
        let d = &x * &x;
        let root = numerics::real_diag(&[1.0 / sp.sqrt(), 1.0 / sq.sqrt()]);
        let top = numerics::hermitian_eigenvalues(&(&root * d * &root))[1].sqrt();
        let grid = rotation_plane_constant(w, theta, sp, sq);
        assert!(grid <= top * (1.0 + 1e-12) && grid >= top * (1.0 - 1e-5), "{grid} {top}");
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(matches!(gen_family(&GenSpec::new(0, 0, Scenario::Axes)), Err(GenError::InvalidSpec { .. })));
        let mut s = GenSpec::new(0, 4, Scenario::Random);
        s.max_subspace_dim = 5;
        assert!(s.validate().is_err());
        assert!(matches!(gen_instance(&GenSpec::new(0, 3, Scenario::Axes).spoiled()), Err(GenError::NoSpoiler(_))));
    }

    fn opts(seed: u64) -> CheckOptions {
        CheckOptions::with_seed(seed)
    }

    #[test]
    fn generated_instances_pass_and_spoilers_fail() {
        for theorem in TheoremId::ALL {
            for &scenario in scenarios_for(theorem) {
                for seed in 0..6 {
                    let dim = 2 + (seed as usize * 3) % 7;
                    let mut s = spec(seed, dim, scenario);
                    if seed % 2 == 1 {
                        s = s.complex();
                    }
                    let inst = gen_instance(&s).unwrap();
                    let report = check_instance(&inst, theorem, &opts(seed))
                        .unwrap_or_else(|e| panic!("{theorem} {scenario:?} seed {seed}: {e}"));
                    assert!(report.passed, "{theorem} {scenario:?} seed {seed}: {report:?}");

                    let bad = gen_instance(&s.clone().spoiled()).unwrap();
                    let err = check_instance(&bad, theorem, &opts(seed)).unwrap_err();
                    assert!(err.is_hypothesis_failure(), "{theorem} {scenario:?} seed {seed}: {err}");
                }
            }
        }
    }
}
