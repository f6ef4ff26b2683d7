//! Executable bound checkers.
//!
//! Each checker verifies its hypotheses on a concrete instance, computes the
//! predicted bounds, computes the optimal bounds with the eigenvalue
//! machinery of [`crate::kfusion`], and reports whether the prediction
//! brackets the optimum:
//!
//! ```text
//! predicted.lower <= actual.lower * (1 + BRACKET_SLACK)
//! actual.upper    <= predicted.upper * (1 + BRACKET_SLACK)
//! ```
//!
//! Hypotheses quantified over all `f` are checked on a probe grid: every
//! eigenvector of every quadratic form on either side of the inequality plus
//! seeded random unit vectors. Where both sides are quadratic forms with
//! definite signs the test is an exact semidefinite one.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{self, FrameBounds, FrameError, WeightedSubspaceFamily};
use crate::kfusion::{self, KFusionError, KFusionInstance};
use crate::numerics::{self, Matrix, NumericsError, Subspace, Vector, DRAZIN_TOL, RANK_TOL};
use crate::rng::SeededRng;

/// Relative slack allowed when comparing predicted against optimal bounds.
pub const BRACKET_SLACK: f64 = 1e-8;

/// Default hypothesis tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Random unit vectors added to the eigenvector probes.
pub const GRID_SAMPLES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "thm3.1")]
    ImageUnderK,
    #[serde(rename = "lem3.2")]
    DrazinComposition,
    #[serde(rename = "thm3.4")]
    Erasure,
    #[serde(rename = "lem4.1")]
    OperatorPerturbation,
    #[serde(rename = "thm4.4.1")]
    ProjectionBessel,
    #[serde(rename = "thm4.4.2")]
    ProjectionKFusion,
    #[serde(rename = "thm4.4.3")]
    ProjectionFusion,
    #[serde(rename = "prop4.5")]
    QuadraticPerturbation,
    #[serde(rename = "thm4.6")]
    SynthesisPerturbation,
    #[serde(rename = "thm4.7")]
    SynthesisOnRange,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        TheoremId::ImageUnderK,
        TheoremId::DrazinComposition,
        TheoremId::Erasure,
        TheoremId::OperatorPerturbation,
        TheoremId::ProjectionBessel,
        TheoremId::ProjectionKFusion,
        TheoremId::ProjectionFusion,
        TheoremId::QuadraticPerturbation,
        TheoremId::SynthesisPerturbation,
        TheoremId::SynthesisOnRange,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::ImageUnderK => "thm3.1",
            TheoremId::DrazinComposition => "lem3.2",
            TheoremId::Erasure => "thm3.4",
            TheoremId::OperatorPerturbation => "lem4.1",
            TheoremId::ProjectionBessel => "thm4.4.1",
            TheoremId::ProjectionKFusion => "thm4.4.2",
            TheoremId::ProjectionFusion => "thm4.4.3",
            TheoremId::QuadraticPerturbation => "prop4.5",
            TheoremId::SynthesisPerturbation => "thm4.6",
            TheoremId::SynthesisOnRange => "thm4.7",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.as_str() == s)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Comparison functional on the right of the projection perturbation
/// hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaKind {
    /// `Λ(f) = ‖K*f‖`.
    KStarNorm,
    /// `Λ(f) = ‖f‖`.
    PlainNorm,
    /// `Λ ≡ 0`.
    Zero,
}

/// Perturbation constants `a, b, c` (and `R` for the quadratic form
/// hypothesis). Admissibility is checked per theorem.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerturbationConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PerturbationConstants {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            samples: GRID_SAMPLES,
            seed: 0,
        }
    }
}

impl CheckOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    #[serde(with = "crate::float_repr")]
    pub value: f64,
}

impl NamedValue {
    fn new(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
        }
    }
}

/// One predicted-versus-optimal comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartReport {
    pub label: String,
    pub predicted: FrameBounds,
    pub actual: FrameBounds,
    /// `(actual.lower - predicted.lower) / max(|actual.lower|, |predicted.lower|)`.
    #[serde(with = "crate::float_repr")]
    pub lower_margin: f64,
    /// `(predicted.upper - actual.upper) / max(|actual.upper|, |predicted.upper|)`.
    #[serde(with = "crate::float_repr")]
    pub upper_margin: f64,
    /// Set for conclusions that only assert existence of a positive lower
    /// bound.
    pub requires_positive_lower: bool,
    pub passed: bool,
}

impl PartReport {
    fn new(label: &str, predicted: FrameBounds, actual: FrameBounds) -> Self {
        let passed = brackets(&predicted, &actual);
        Self {
            label: label.to_owned(),
            predicted,
            actual,
            lower_margin: relative_margin(actual.lower, predicted.lower),
            upper_margin: relative_margin(predicted.upper, actual.upper),
            requires_positive_lower: false,
            passed,
        }
    }

    fn requiring_positive_lower(mut self) -> Self {
        self.requires_positive_lower = true;
        self.passed &= self.actual.lower > 0.0;
        self
    }
}

/// `predicted.lower <= actual.lower·(1+slack)` and
/// `actual.upper <= predicted.upper·(1+slack)`.
pub fn brackets(predicted: &FrameBounds, actual: &FrameBounds) -> bool {
    predicted.lower <= actual.lower * (1.0 + BRACKET_SLACK)
        && actual.upper <= predicted.upper * (1.0 + BRACKET_SLACK)
}

fn relative_margin(big: f64, small: f64) -> f64 {
    if big == small {
        return 0.0;
    }
    if big.is_infinite() || small.is_infinite() {
        return big - small;
    }
    (big - small) / big.abs().max(small.abs()).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem_id: TheoremId,
    pub seed: Option<u64>,
    pub hypotheses_ok: bool,
    pub residuals: Vec<NamedValue>,
    pub predicted: FrameBounds,
    pub actual: FrameBounds,
    pub parts: Vec<PartReport>,
    /// Worst lower and upper margins over all parts.
    #[serde(with = "crate::float_repr")]
    pub lower_margin: f64,
    #[serde(with = "crate::float_repr")]
    pub upper_margin: f64,
    /// Alternative readings of the predicted constants, kept for comparison.
    pub auxiliary: Vec<NamedValue>,
    pub passed: bool,
}

impl TheoremReport {
    fn new(theorem_id: TheoremId, seed: u64, residuals: Vec<NamedValue>, parts: Vec<PartReport>) -> Self {
        let first = parts.first().expect("at least one part");
        let lower_margin = parts.iter().map(|p| p.lower_margin).fold(f64::INFINITY, f64::min);
        let upper_margin = parts.iter().map(|p| p.upper_margin).fold(f64::INFINITY, f64::min);
        Self {
            theorem_id,
            seed: Some(seed),
            hypotheses_ok: true,
            residuals,
            predicted: first.predicted,
            actual: first.actual,
            lower_margin,
            upper_margin,
            passed: parts.iter().all(|p| p.passed),
            parts,
            auxiliary: Vec::new(),
        }
    }

    fn with_auxiliary(mut self, aux: Vec<NamedValue>) -> Self {
        self.auxiliary = aux;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("{theorem}: hypothesis failed: {clause} (residual {residual:e})")]
    HypothesisFailed {
        theorem: TheoremId,
        clause: String,
        residual: f64,
        witness: Option<Vector>,
    },
    #[error("{theorem}: constants not admissible: {clause}")]
    AdmissibilityFailed { theorem: TheoremId, clause: String },
    #[error("{theorem}: the Drazin inverse is zero")]
    ZeroDrazin { theorem: TheoremId },
    #[error("{theorem}: invalid input: {reason}")]
    InvalidInput { theorem: TheoremId, reason: String },
    #[error(transparent)]
    KFusion(#[from] KFusionError),
}

impl From<NumericsError> for CheckError {
    fn from(e: NumericsError) -> Self {
        CheckError::KFusion(KFusionError::Numerics(e))
    }
}

impl From<FrameError> for CheckError {
    fn from(e: FrameError) -> Self {
        CheckError::KFusion(KFusionError::Frame(e))
    }
}

impl CheckError {
    /// Whether the instance was rejected for violating a hypothesis or an
    /// admissibility condition, as opposed to malformed input.
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            CheckError::HypothesisFailed { .. }
                | CheckError::AdmissibilityFailed { .. }
                | CheckError::ZeroDrazin { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, CheckError>;

fn hypothesis(theorem: TheoremId, clause: impl Into<String>, residual: f64) -> CheckError {
    CheckError::HypothesisFailed {
        theorem,
        clause: clause.into(),
        residual,
        witness: None,
    }
}

fn admissibility(theorem: TheoremId, clause: impl Into<String>) -> CheckError {
    CheckError::AdmissibilityFailed {
        theorem,
        clause: clause.into(),
    }
}

fn invalid(theorem: TheoremId, reason: impl Into<String>) -> CheckError {
    CheckError::InvalidInput {
        theorem,
        reason: reason.into(),
    }
}

fn is_real(m: &Matrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn family_is_real(family: &WeightedSubspaceFamily) -> bool {
    family.members().iter().all(|m| is_real(m.subspace.basis()))
}

/// `f* M f` for Hermitian `M`.
fn form(m: &Matrix, f: &Vector) -> f64 {
    f.dotc(&(m * f)).re.max(0.0)
}

/// Eigenvectors of each Hermitian form plus seeded random unit vectors.
fn probe_grid(forms: &[&Matrix], opts: &CheckOptions, complex: bool) -> Result<Vec<Vector>> {
    let n = forms.first().map(|m| m.nrows()).unwrap_or(0);
    let mut probes = Vec::with_capacity(forms.len() * n + opts.samples);
    for m in forms {
        let eig = numerics::hermitian_eig(m)?;
        probes.extend((0..n).map(|j| eig.eigenvector(j)));
    }
    let mut rng = SeededRng::new(opts.seed ^ 0x9E37_79B9_7F4A_7C15);
    probes.extend((0..opts.samples).map(|_| rng.unit_vector(n, complex)));
    Ok(probes)
}

/// Largest `(lhs - rhs) / scale` over the probes, with its probe.
fn worst_violation(
    probes: &[Vector],
    scale: f64,
    lhs: impl Fn(&Vector) -> f64,
    rhs: impl Fn(&Vector) -> f64,
) -> (f64, Option<Vector>) {
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for f in probes {
        let gap = (lhs(f) - rhs(f)) / scale;
        if gap > worst {
            worst = gap;
            witness = Some(f.clone());
        }
    }
    (worst, witness)
}

fn grid_hypothesis(
    theorem: TheoremId,
    clause: &str,
    probes: &[Vector],
    scale: f64,
    tol: f64,
    lhs: impl Fn(&Vector) -> f64,
    rhs: impl Fn(&Vector) -> f64,
) -> Result<NamedValue> {
    let (worst, witness) = worst_violation(probes, scale, lhs, rhs);
    if worst > tol {
        return Err(CheckError::HypothesisFailed {
            theorem,
            clause: clause.to_owned(),
            residual: worst,
            witness,
        });
    }
    Ok(NamedValue::new(clause, worst.max(0.0)))
}

/// The optimal K-lower bound, failing the hypothesis when the family is not
/// a K-fusion frame.
fn require_k_fusion(theorem: TheoremId, inst: &KFusionInstance, what: &str) -> Result<FrameBounds> {
    let verdict = kfusion::decide(inst)?;
    if !verdict.is_k_fusion {
        return Err(CheckError::HypothesisFailed {
            theorem,
            clause: format!("{what} is a K-fusion frame"),
            residual: verdict.bounds.lower,
            witness: verdict.witness,
        });
    }
    Ok(verdict.bounds)
}

fn check_square(theorem: TheoremId, k: &Matrix, dim: usize) -> Result<()> {
    if k.nrows() != dim || k.ncols() != dim {
        return Err(invalid(theorem, format!("operator must be {dim}x{dim}")));
    }
    Ok(())
}

/// `x / y²`, with `∞` for a vanishing denominator.
fn over_squared(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        f64::INFINITY
    } else {
        x / (y * y)
    }
}

/// Image of a K-fusion frame under an idempotent `K`.
///
/// Hypotheses: `K² = K`, the family is a K-fusion frame, and
/// `K†·K(W_i) ⊆ W_i` for every member. Conclusion: `{(K·W_i, v_i)}` is a
/// K-fusion frame with bounds `A/‖K‖²` and `B·‖K†*‖²·‖K‖²`.
pub fn check_image_under_k(inst: &KFusionInstance, opts: &CheckOptions) -> Result<TheoremReport> {
    let id = TheoremId::ImageUnderK;
    let k = inst.k();
    let k_norm = numerics::operator_norm(k);
    let idempotent = numerics::operator_norm(&(k * k - k));
    if idempotent > opts.tol * k_norm.max(1.0) {
        return Err(hypothesis(id, "K is idempotent", idempotent));
    }
    let bounds = require_k_fusion(id, inst, "family")?;

    let k_pinv = numerics::pinv(k, RANK_TOL);
    let mut image = Vec::with_capacity(inst.family().len());
    let mut worst_inclusion = 0.0_f64;
    for (i, m) in inst.family().members().iter().enumerate() {
        // Directions that K annihilates up to rounding are dropped relative
        // to ‖K‖, not to the image's own scale.
        let kb = k * m.subspace.basis();
        let kb_norm = numerics::operator_norm(&kb);
        let kw = if kb_norm <= RANK_TOL * k_norm {
            Subspace::zero(k.nrows())
        } else {
            numerics::range_basis(&kb, RANK_TOL * k_norm / kb_norm)
        };
        if kw.dim() > 0 {
            let back = &k_pinv * kw.basis();
            let outside = &back - m.subspace.projector() * &back;
            let residual = numerics::operator_norm(&outside);
            if residual > opts.tol * numerics::operator_norm(&back).max(1.0) {
                return Err(hypothesis(id, format!("K† K(W_{i}) ⊆ W_{i}"), residual));
            }
            worst_inclusion = worst_inclusion.max(residual);
        }
        image.push((kw, m.weight));
    }
    let image = WeightedSubspaceFamily::from_pairs(inst.family().ambient_dim(), image)?;
    let image_inst = KFusionInstance::new(image.clone(), k.clone())?;

    let k_pinv_norm = numerics::operator_norm(&k_pinv);
    let predicted = FrameBounds::predicted(
        over_squared(bounds.lower, k_norm),
        bounds.upper * k_pinv_norm * k_pinv_norm * k_norm * k_norm,
    );
    let actual = FrameBounds::optimal(kfusion::k_lower_bound(&image_inst)?, frame::fusion_bounds(&image)?.upper);
    let residuals = vec![
        NamedValue::new("‖K² - K‖", idempotent),
        NamedValue::new("max_i ‖(I - P_{W_i}) K† P_{K W_i}‖", worst_inclusion),
    ];
    Ok(TheoremReport::new(
        id,
        opts.seed,
        residuals,
        vec![PartReport::new("image family", predicted, actual)],
    ))
}

/// K-fusion frames for `SKS`, `SK` and `KS` where `S` is the Drazin inverse
/// of `K`, with lower bounds `A/‖S‖⁴`, `A/‖S‖²`, `A/‖S‖²` and upper bound
/// `B` throughout.
pub fn check_drazin(inst: &KFusionInstance, opts: &CheckOptions) -> Result<TheoremReport> {
    let id = TheoremId::DrazinComposition;
    let k = inst.k();
    let drazin = numerics::drazin(k, DRAZIN_TOL)?;
    let s = &drazin.inverse;
    let s_norm = numerics::operator_norm(s);
    if s_norm <= opts.tol {
        return Err(CheckError::ZeroDrazin { theorem: id });
    }
    let identities = numerics::drazin_residuals(k, s, drazin.index);
    let bounds = require_k_fusion(id, inst, "family")?;
    let a = bounds.lower;
    let b = bounds.upper;

    let mut parts = Vec::with_capacity(3);
    for (label, op, predicted_lower) in [
        ("SKS", s * k * s, a / s_norm.powi(4)),
        ("SK", s * k, a / (s_norm * s_norm)),
        ("KS", k * s, a / (s_norm * s_norm)),
    ] {
        let composed = inst.with_operator(op)?;
        let actual = FrameBounds::optimal(kfusion::k_lower_bound(&composed)?, b);
        parts.push(PartReport::new(label, FrameBounds::predicted(predicted_lower, b), actual));
    }
    let residuals = vec![
        NamedValue::new("‖SKS - S‖", identities[0]),
        NamedValue::new("‖SK - KS‖", identities[1]),
        NamedValue::new("‖K^k S K - K^k‖", identities[2]),
        NamedValue::new("drazin index", drazin.index as f64),
    ];
    Ok(TheoremReport::new(id, opts.seed, residuals, parts))
}

/// Robustness under erasure of the members in `erased`.
///
/// With `C = Σ_{i∈J} v_i²` and `A - C‖K†‖² > 0`, the remaining members
/// satisfy the K-fusion inequality on `R(K)` with bounds `A - C‖K†‖²` and
/// `B`.
pub fn check_erasure(inst: &KFusionInstance, erased: &[usize], opts: &CheckOptions) -> Result<TheoremReport> {
    let id = TheoremId::Erasure;
    let family = inst.family();
    validate_erased(id, family, erased)?;
    let bounds = require_k_fusion(id, inst, "full family")?;
    let c: f64 = erased.iter().map(|&i| family.members()[i].weight.powi(2)).sum();
    let k_pinv_norm = numerics::operator_norm(&numerics::pinv(inst.k(), RANK_TOL));
    let penalty = c * k_pinv_norm * k_pinv_norm;
    let predicted_lower = if bounds.lower.is_infinite() {
        f64::INFINITY
    } else {
        bounds.lower - penalty
    };
    // Positive at the hypothesis tolerance, so C = A does not pass on rounding.
    if !(predicted_lower > opts.tol * bounds.lower) {
        return Err(hypothesis(id, "A - C‖K†‖² > 0", predicted_lower));
    }
    let reduced = KFusionInstance::new(family.without(erased), inst.k().clone())?;
    let actual = kfusion::bounds_on_range(&reduced)?;
    let residuals = vec![
        NamedValue::new("C", c),
        NamedValue::new("‖K†‖", k_pinv_norm),
        NamedValue::new("A", bounds.lower),
    ];
    Ok(TheoremReport::new(
        id,
        opts.seed,
        residuals,
        vec![PartReport::new(
            "reduced family on R(K)",
            FrameBounds::predicted(predicted_lower, bounds.upper),
            actual,
        )],
    ))
}

fn validate_erased(id: TheoremId, family: &WeightedSubspaceFamily, erased: &[usize]) -> Result<()> {
    let mut seen = erased.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != erased.len() || seen.iter().any(|&i| i >= family.len()) {
        return Err(invalid(id, "erased indices must be distinct member indices"));
    }
    if erased.len() >= family.len() {
        return Err(admissibility(id, "erased set is a strict subset of the members"));
    }
    Ok(())
}

/// Stability of the K-fusion property under `‖(K₁* - K₂*)f‖ ≤ a‖K₁*f‖ +
/// b‖K₂*f‖`, `b < 1`.
///
/// The family becomes a K₂-fusion frame with lower bound
/// `A((1-b)/(1+a))²`. When also `a < 1` the roles are interchanged and the
/// K₁ bound is predicted from the K₂ one. When `K₂ = I` the conclusion is a
/// plain fusion frame.
pub fn check_operator_perturbation(
    family: &WeightedSubspaceFamily,
    k1: &Matrix,
    k2: &Matrix,
    constants: PerturbationConstants,
    opts: &CheckOptions,
) -> Result<TheoremReport> {
    let id = TheoremId::OperatorPerturbation;
    let n = family.ambient_dim();
    check_square(id, k1, n)?;
    check_square(id, k2, n)?;
    let PerturbationConstants { a, b, .. } = constants;
    if !(a >= 0.0 && b >= 0.0) {
        return Err(admissibility(id, "a, b >= 0"));
    }
    if !(b < 1.0) {
        return Err(admissibility(id, "b < 1"));
    }

    let diff = k1 - k2;
    let diff_form = &diff * diff.adjoint();
    let k1_form = k1 * k1.adjoint();
    let k2_form = k2 * k2.adjoint();
    let complex = !(is_real(k1) && is_real(k2));
    let probes = probe_grid(&[&diff_form, &k1_form, &k2_form], opts, complex)?;
    let scale = numerics::operator_norm(k1).max(numerics::operator_norm(k2)).max(1.0);
    let (diff_star, k1_star, k2_star) = (diff.adjoint(), k1.adjoint(), k2.adjoint());
    let grid = grid_hypothesis(
        id,
        "‖(K₁* - K₂*)f‖ <= a‖K₁*f‖ + b‖K₂*f‖",
        &probes,
        scale,
        opts.tol,
        |f| (&diff_star * f).norm(),
        |f| a * (&k1_star * f).norm() + b * (&k2_star * f).norm(),
    )?;

    let inst1 = KFusionInstance::new(family.clone(), k1.clone())?;
    let bounds1 = require_k_fusion(id, &inst1, "family (for K₁)")?;
    let inst2 = KFusionInstance::new(family.clone(), k2.clone())?;
    let a2 = kfusion::k_lower_bound(&inst2)?;
    let upper = bounds1.upper;

    let scale_forward = ((1.0 - b) / (1.0 + a)).powi(2);
    let forward = FrameBounds::predicted(bounds1.lower * scale_forward, upper);
    let mut parts = vec![PartReport::new("K₂-fusion", forward, FrameBounds::optimal(a2, upper))];
    if a < 1.0 {
        let scale_back = ((1.0 - a) / (1.0 + b)).powi(2);
        parts.push(PartReport::new(
            "K₁-fusion from K₂ (roles interchanged)",
            FrameBounds::predicted(a2 * scale_back, upper),
            FrameBounds::optimal(bounds1.lower, upper),
        ));
    }
    let identity_residual = numerics::operator_norm(&(k2 - Matrix::identity(n, n)));
    if identity_residual <= opts.tol {
        let fusion = frame::fusion_bounds(family)?;
        parts.push(PartReport::new("fusion frame (K₂ = I)", forward, fusion));
    }
    Ok(TheoremReport::new(id, opts.seed, vec![grid], parts))
}

/// Which conclusion of the projection perturbation result applies.
fn projection_part(lambda: LambdaKind) -> TheoremId {
    match lambda {
        LambdaKind::Zero => TheoremId::ProjectionBessel,
        LambdaKind::KStarNorm => TheoremId::ProjectionKFusion,
        LambdaKind::PlainNorm => TheoremId::ProjectionFusion,
    }
}

fn check_matching(id: TheoremId, ww: &WeightedSubspaceFamily, vv: &WeightedSubspaceFamily) -> Result<()> {
    if ww.len() != vv.len() || ww.ambient_dim() != vv.ambient_dim() {
        return Err(invalid(id, "both families must share the index set and the ambient space"));
    }
    Ok(())
}

/// Perturbation of the weighted projections:
/// `(Σ‖(w_iP_{W_i} - v_iP_{V_i})f‖²)^½ <= a(Σw_i²‖P_{W_i}f‖²)^½ +
/// b(Σv_i²‖P_{V_i}f‖²)^½ + c·Λ(f)`.
///
/// `lambda` selects the conclusion: [`LambdaKind::Zero`] the Bessel bound
/// plus existence via range inclusion, [`LambdaKind::KStarNorm`] the K-fusion
/// bounds, [`LambdaKind::PlainNorm`] the fusion frame bounds.
pub fn check_projection_perturbation(
    ww: &WeightedSubspaceFamily,
    vv: &WeightedSubspaceFamily,
    constants: PerturbationConstants,
    lambda: LambdaKind,
    k: Option<&Matrix>,
    opts: &CheckOptions,
) -> Result<TheoremReport> {
    let id = projection_part(lambda);
    check_matching(id, ww, vv)?;
    let n = ww.ambient_dim();
    if let Some(k) = k {
        check_square(id, k, n)?;
    }
    let PerturbationConstants { a, b, c } = constants;
    if !(a >= 0.0 && b >= 0.0 && c >= 0.0) {
        return Err(admissibility(id, "a, b, c >= 0"));
    }
    if !(b < 1.0) {
        return Err(admissibility(id, "b < 1"));
    }

    let sw = frame::fusion_operator(ww);
    let sv = frame::fusion_operator(vv);
    let w_bounds = frame::fusion_bounds(ww)?;
    let b_w = w_bounds.upper;

    // Constants and the reference lower bound per conclusion.
    let (k_mat, reference_lower) = match lambda {
        LambdaKind::Zero => {
            if c != 0.0 {
                return Err(admissibility(id, "c = 0"));
            }
            let k = k.ok_or_else(|| invalid(id, "an operator K with R(K) ⊆ R(T_V) is required"))?;
            (k.clone(), 0.0)
        }
        LambdaKind::KStarNorm => {
            let k = k.ok_or_else(|| invalid(id, "an operator K is required"))?;
            if !(a < 1.0) {
                return Err(admissibility(id, "a < 1"));
            }
            let inst = KFusionInstance::new(ww.clone(), k.clone())?;
            let bounds = require_k_fusion(id, &inst, "unperturbed family")?;
            if !(c / (1.0 - a) < bounds.lower.sqrt()) {
                return Err(admissibility(id, "c/(1-a) < √A"));
            }
            (k.clone(), bounds.lower)
        }
        LambdaKind::PlainNorm => {
            if !frame::lower_is_positive(w_bounds.lower, w_bounds.upper) {
                return Err(hypothesis(id, "unperturbed family is a fusion frame", w_bounds.lower));
            }
            if !(a * b_w.sqrt() + c < w_bounds.lower.sqrt()) {
                return Err(admissibility(id, "a√B + c < √A"));
            }
            (Matrix::identity(n, n), w_bounds.lower)
        }
    };

    // Hypothesis on the probe grid.
    let diff_form = ww
        .members()
        .iter()
        .zip(vv.members())
        .fold(Matrix::zeros(n, n), |acc, (mw, mv)| {
            let x = mw.subspace.projector().scale(mw.weight) - mv.subspace.projector().scale(mv.weight);
            acc + &x * &x
        });
    let kk = &k_mat * k_mat.adjoint();
    let complex = !(family_is_real(ww) && family_is_real(vv) && is_real(&k_mat));
    let probes = probe_grid(&[&diff_form, &sw, &sv, &kk], opts, complex)?;
    let scale = b_w.max(frame::fusion_bounds(vv)?.upper).sqrt().max(1.0);
    let k_star = k_mat.adjoint();
    let differences: Vec<Matrix> = ww
        .members()
        .iter()
        .zip(vv.members())
        .map(|(mw, mv)| mw.subspace.projector().scale(mw.weight) - mv.subspace.projector().scale(mv.weight))
        .collect();
    let (tw_star, tv_star) = (ww.synthesis_matrix().adjoint(), vv.synthesis_matrix().adjoint());
    let lambda_of = |f: &Vector| match lambda {
        LambdaKind::KStarNorm => (&k_star * f).norm(),
        LambdaKind::PlainNorm => f.norm(),
        LambdaKind::Zero => 0.0,
    };
    let grid = grid_hypothesis(
        id,
        "(Σ‖(w_iP_{W_i} - v_iP_{V_i})f‖²)^½ <= a(Σw_i²‖P_{W_i}f‖²)^½ + b(Σv_i²‖P_{V_i}f‖²)^½ + cΛ(f)",
        &probes,
        scale,
        opts.tol,
        |f| differences.iter().map(|x| (x * f).norm_squared()).sum::<f64>().sqrt(),
        |f| a * (&tw_star * f).norm() + b * (&tv_star * f).norm() + c * lambda_of(f),
    )?;

    let v_bounds = frame::fusion_bounds(vv)?;
    let v_inst = KFusionInstance::new(vv.clone(), k_mat.clone())?;
    let mut residuals = vec![grid];
    let mut auxiliary = Vec::new();
    let part = match lambda {
        LambdaKind::Zero => {
            let t_v = vv.synthesis_matrix();
            let douglas = numerics::douglas_check(&k_mat, &t_v, opts.tol)?;
            if !douglas.range_included {
                return Err(hypothesis(id, "R(K) ⊆ R(T_V)", douglas.range_residual));
            }
            residuals.push(NamedValue::new("‖(I - T_V T_V†)K‖", douglas.range_residual));
            let ratio = ((1.0 + a) / (1.0 - b)).powi(2);
            auxiliary.push(NamedValue::new("upper bound with √B in place of B", b_w.sqrt() * ratio));
            let actual = FrameBounds::optimal(kfusion::k_lower_bound(&v_inst)?, v_bounds.upper);
            PartReport::new("perturbed family", FrameBounds::predicted(0.0, b_w * ratio), actual)
                .requiring_positive_lower()
        }
        LambdaKind::KStarNorm => {
            let k_norm = numerics::operator_norm(&k_mat);
            let lower = ((reference_lower.sqrt() * (1.0 - a) - c) / (1.0 + b)).powi(2);
            let upper = (((1.0 + a) * b_w.sqrt() + c * k_norm) / (1.0 - b)).powi(2);
            let actual = FrameBounds::optimal(kfusion::k_lower_bound(&v_inst)?, v_bounds.upper);
            PartReport::new("perturbed family", FrameBounds::predicted(lower, upper), actual)
        }
        LambdaKind::PlainNorm => {
            let lower = ((reference_lower.sqrt() - c - a * b_w.sqrt()) / (1.0 + b)).powi(2);
            let upper = (((1.0 + a) * b_w.sqrt() + c) / (1.0 - b)).powi(2);
            PartReport::new("perturbed family", FrameBounds::predicted(lower, upper), v_bounds)
        }
    };
    Ok(TheoremReport::new(id, opts.seed, residuals, vec![part]).with_auxiliary(auxiliary))
}

/// Perturbation of the weighted quadratic forms:
/// `Σ|⟨f, (w_i²P_{W_i} - v_i²P_{V_i})f⟩| <= R‖K*f‖²` with `0 < R < A`
/// gives bounds `A - R` and `B + R‖K‖`.
pub fn check_quadratic_perturbation(
    ww: &WeightedSubspaceFamily,
    vv: &WeightedSubspaceFamily,
    k: &Matrix,
    r: f64,
    opts: &CheckOptions,
) -> Result<TheoremReport> {
    let id = TheoremId::QuadraticPerturbation;
    check_matching(id, ww, vv)?;
    let n = ww.ambient_dim();
    check_square(id, k, n)?;
    let w_inst = KFusionInstance::new(ww.clone(), k.clone())?;
    let w_bounds = require_k_fusion(id, &w_inst, "unperturbed family")?;
    if !(r > 0.0 && r < w_bounds.lower) {
        return Err(hypothesis(id, "0 < R < A", r - w_bounds.lower));
    }

    let diffs: Vec<Matrix> = ww
        .members()
        .iter()
        .zip(vv.members())
        .map(|(mw, mv)| {
            mw.subspace.projector().scale(mw.weight.powi(2)) - mv.subspace.projector().scale(mv.weight.powi(2))
        })
        .collect();
    let kk = k * k.adjoint();
    let rk = kk.scale(r);
    let scale = frame::fusion_bounds(ww)?
        .upper
        .max(frame::fusion_bounds(vv)?.upper)
        .max(1.0);
    let clause = "Σ|⟨f, (w_i²P_{W_i} - v_i²P_{V_i})f⟩| <= R‖K*f‖²";

    // Each member difference with a definite sign turns the left side into a
    // single quadratic form.
    let mut signed = Matrix::zeros(n, n);
    let mut all_definite = true;
    for d in &diffs {
        let values = numerics::hermitian_eigenvalues(d);
        let top = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let floor = 1e-12 * top.max(1.0);
        if values.iter().all(|&v| v >= -floor) {
            signed += d;
        } else if values.iter().all(|&v| v <= floor) {
            signed -= d;
        } else {
            all_definite = false;
        }
    }
    let mut residuals = Vec::new();
    if all_definite {
        let min = numerics::hermitian_eig(&(&rk - &signed))?.min();
        if -min / scale > opts.tol {
            let eig = numerics::hermitian_eig(&(&rk - &signed))?;
            return Err(CheckError::HypothesisFailed {
                theorem: id,
                clause: format!("{clause} (exact semidefinite test)"),
                residual: -min / scale,
                witness: Some(eig.eigenvector(0)),
            });
        }
        residuals.push(NamedValue::new("λ_min(R·KK* - Σ±(w_i²P_{W_i} - v_i²P_{V_i}))", min));
    }
    let mut forms: Vec<&Matrix> = diffs.iter().collect();
    forms.push(&kk);
    if all_definite {
        forms.push(&signed);
    }
    let complex = !(family_is_real(ww) && family_is_real(vv) && is_real(k));
    let probes = probe_grid(&forms, opts, complex)?;
    residuals.push(grid_hypothesis(
        id,
        clause,
        &probes,
        scale,
        opts.tol,
        |f| diffs.iter().map(|d| f.dotc(&(d * f)).re.abs()).sum(),
        |f| r * form(&kk, f),
    )?);

    let k_norm = numerics::operator_norm(k);
    let predicted = FrameBounds::predicted(w_bounds.lower - r, w_bounds.upper + r * k_norm);
    let v_inst = KFusionInstance::new(vv.clone(), k.clone())?;
    let actual = FrameBounds::optimal(kfusion::k_lower_bound(&v_inst)?, frame::fusion_bounds(vv)?.upper);
    Ok(TheoremReport::new(
        id,
        opts.seed,
        residuals,
        vec![PartReport::new("perturbed family", predicted, actual)],
    )
    .with_auxiliary(vec![NamedValue::new(
        "upper bound with R‖K‖² in place of R‖K‖",
        w_bounds.upper + r * k_norm * k_norm,
    )]))
}

/// Synthesis perturbation of the members outside `erased`:
/// `‖(K* - T_W T_W*)f‖ <= a‖K*f‖ + b‖T_W*f‖ (+ c‖f‖)`.
///
/// Without the closed-range variant (`c = 0`, `a < 1`) the reduced family is
/// a K-fusion frame with lower bound `((1-a)/(b+‖T_W‖))²`. With it
/// (`a + c‖K†‖ < 1`) the inequality holds on `R(K)` with lower bound
/// `((1-a-c‖K†‖)/(b+‖T_W‖))²`. The upper bound is the full family's `B`.
pub fn check_synthesis_perturbation(
    ww: &WeightedSubspaceFamily,
    erased: &[usize],
    k: &Matrix,
    constants: PerturbationConstants,
    opts: &CheckOptions,
    closed_range_variant: bool,
) -> Result<TheoremReport> {
    let id = if closed_range_variant {
        TheoremId::SynthesisOnRange
    } else {
        TheoremId::SynthesisPerturbation
    };
    let n = ww.ambient_dim();
    check_square(id, k, n)?;
    validate_erased(id, ww, erased)?;
    let PerturbationConstants { a, b, c } = constants;
    if !(a >= 0.0 && b >= 0.0 && c >= 0.0) {
        return Err(admissibility(id, "a, b, c >= 0"));
    }
    let k_pinv_norm = numerics::operator_norm(&numerics::pinv(k, RANK_TOL));
    let effective = if closed_range_variant {
        if !(a + c * k_pinv_norm < 1.0) {
            return Err(admissibility(id, "a + c‖K†‖ < 1"));
        }
        1.0 - a - c * k_pinv_norm
    } else {
        if c != 0.0 {
            return Err(admissibility(id, "c = 0"));
        }
        if !(a < 1.0) {
            return Err(admissibility(id, "a < 1"));
        }
        1.0 - a
    };

    let reduced = ww.without(erased);
    let t = reduced.synthesis_matrix();
    let s_red = &t * t.adjoint();
    let t_norm = numerics::hermitian_eigenvalues(&s_red).last().copied().unwrap_or(0.0).max(0.0).sqrt();
    let b_full = frame::fusion_bounds(ww)?.upper;

    let gap = k.adjoint() - &s_red;
    let gap_form = gap.adjoint() * &gap;
    let kk = k * k.adjoint();
    let complex = !(family_is_real(ww) && is_real(k));
    let probes = probe_grid(&[&gap_form, &kk, &s_red], opts, complex)?;
    let scale = numerics::operator_norm(k).max(t_norm * t_norm).max(1.0);
    let (k_star, t_star) = (k.adjoint(), t.adjoint());
    let grid = grid_hypothesis(
        id,
        "‖(K* - T_W T_W*)f‖ <= a‖K*f‖ + b‖T_W*f‖ + c‖f‖",
        &probes,
        scale,
        opts.tol,
        |f| (&gap * f).norm(),
        |f| a * (&k_star * f).norm() + b * (&t_star * f).norm() + c * f.norm(),
    )?;

    let ratio = if b + t_norm == 0.0 {
        f64::INFINITY
    } else {
        effective / (b + t_norm)
    };
    let predicted = FrameBounds::predicted(ratio * ratio, b_full);
    let inst = KFusionInstance::new(reduced.clone(), k.clone())?;
    let (label, actual) = if closed_range_variant {
        ("reduced family on R(K)", kfusion::bounds_on_range(&inst)?)
    } else {
        (
            "reduced family",
            FrameBounds::optimal(kfusion::k_lower_bound(&inst)?, frame::fusion_bounds(&reduced)?.upper),
        )
    };
    let auxiliary = if closed_range_variant {
        vec![NamedValue::new("lower bound without squaring", ratio)]
    } else {
        Vec::new()
    };
    Ok(TheoremReport::new(
        id,
        opts.seed,
        vec![grid, NamedValue::new("‖T_W‖", t_norm), NamedValue::new("‖K†‖", k_pinv_norm)],
        vec![PartReport::new(label, predicted, actual)],
    )
    .with_auxiliary(auxiliary))
}
