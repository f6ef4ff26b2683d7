//! K-fusion frames.
//!
//! A family `{(W_i, v_i)}` is a K-fusion frame when
//! `A‖K*f‖² ≤ Σ v_i²‖P_{W_i}f‖² ≤ B‖f‖²` for all `f`. The optimal `A` is
//! the largest scale with `A·KK* ⪯ S_W`, taken over the whole space. The
//! zero operator makes the lower inequality vacuous and is reported with an
//! infinite lower bound.

use thiserror::Error;

use crate::frame::{self, FrameBounds, FrameError, WeightedSubspaceFamily};
use crate::numerics::{self, Matrix, NumericsError, Subspace, Vector, RANK_TOL};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KFusionError {
    #[error("operator is {rows}x{cols}, family lives in dimension {dim}")]
    DimensionMismatch { rows: usize, cols: usize, dim: usize },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, KFusionError>;

#[derive(Debug, Clone, PartialEq)]
pub struct KFusionInstance {
    family: WeightedSubspaceFamily,
    k: Matrix,
}

impl KFusionInstance {
    pub fn new(family: WeightedSubspaceFamily, k: Matrix) -> Result<Self> {
        let dim = family.ambient_dim();
        if k.nrows() != dim || k.ncols() != dim {
            return Err(KFusionError::DimensionMismatch {
                rows: k.nrows(),
                cols: k.ncols(),
                dim,
            });
        }
        if !numerics::is_finite(&k) {
            return Err(NumericsError::NonFinite.into());
        }
        Ok(Self { family, k })
    }

    pub fn family(&self) -> &WeightedSubspaceFamily {
        &self.family
    }

    pub fn k(&self) -> &Matrix {
        &self.k
    }

    /// Same family, different operator.
    pub fn with_operator(&self, k: Matrix) -> Result<Self> {
        Self::new(self.family.clone(), k)
    }
}

/// Optimal `A` in `A‖K*f‖² ≤ Σ v_i²‖P_{W_i}f‖²`.
///
/// `+∞` for `K = 0`; exactly `0` when `R(K) ⊄ R(S_W)`.
pub fn k_lower_bound(inst: &KFusionInstance) -> Result<f64> {
    if numerics::is_zero(&inst.k) {
        return Ok(f64::INFINITY);
    }
    let s = frame::fusion_operator(&inst.family);
    let kk = &inst.k * inst.k.adjoint();
    Ok(numerics::max_psd_scale(&s, &kk)?)
}

/// Optimal bounds of the K-fusion inequality restricted to `f ∈ R(K)`.
///
/// Both quadratic forms are compressed with an orthonormal basis of `R(K)`;
/// the upper bound is the largest eigenvalue of the compressed `S_W`.
pub fn bounds_on_range(inst: &KFusionInstance) -> Result<FrameBounds> {
    let range = numerics::range_basis(&inst.k, RANK_TOL);
    if range.dim() == 0 {
        return Ok(FrameBounds::optimal(f64::INFINITY, 0.0));
    }
    let q = range.basis();
    let s = q.adjoint() * frame::fusion_operator(&inst.family) * q;
    let kk = q.adjoint() * &inst.k * inst.k.adjoint() * q;
    let lower = numerics::max_psd_scale(&s, &kk)?;
    let upper = numerics::hermitian_eigenvalues(&s).last().copied().unwrap_or(0.0);
    Ok(FrameBounds::optimal(lower, upper))
}

/// Worst margins of both K-fusion inequalities over a sample of unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub n_evaluated: usize,
    /// `min (Σ v_i²‖P_{W_i}f‖² - A‖K*f‖²) / max(1, ‖S_W‖)`.
    pub worst_lower_margin: f64,
    /// `min (B‖f‖² - Σ v_i²‖P_{W_i}f‖²) / max(1, ‖S_W‖)`.
    pub worst_upper_margin: f64,
    pub lower_witness: Option<Vector>,
    pub upper_witness: Option<Vector>,
}

impl SampleReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.worst_lower_margin >= -tol && self.worst_upper_margin >= -tol
    }
}

/// Evaluates the claimed bounds `(a, b)` on `n_samples` seeded random unit
/// vectors plus every eigenvector of `S_W`, of `KK*` and of the pencil
/// `S_W - a·KK*`.
pub fn verify_k_fusion(inst: &KFusionInstance, a: f64, b: f64, n_samples: usize, seed: u64) -> Result<SampleReport> {
    let n = inst.family.ambient_dim();
    let s = frame::fusion_operator(&inst.family);
    let kk = &inst.k * inst.k.adjoint();
    let s_eig = numerics::hermitian_eig(&s)?;
    let k_eig = numerics::hermitian_eig(&kk)?;
    let scale = s_eig.max().max(1.0);

    let mut probes: Vec<Vector> = Vec::with_capacity(3 * n + n_samples);
    probes.extend((0..n).map(|j| s_eig.eigenvector(j)));
    probes.extend((0..n).map(|j| k_eig.eigenvector(j)));
    if a.is_finite() {
        let pencil = numerics::hermitian_eig(&(&s - kk.scale(a)))?;
        probes.extend((0..n).map(|j| pencil.eigenvector(j)));
    }
    let complex = !inst.k.iter().all(|z| z.im == 0.0)
        || inst
            .family
            .members()
            .iter()
            .any(|m| m.subspace.basis().iter().any(|z| z.im != 0.0));
    let mut rng = SeededRng::new(seed);
    probes.extend((0..n_samples).map(|_| rng.unit_vector(n, complex)));

    let mut report = SampleReport {
        n_evaluated: probes.len(),
        worst_lower_margin: f64::INFINITY,
        worst_upper_margin: f64::INFINITY,
        lower_witness: None,
        upper_witness: None,
    };
    for f in probes {
        let norm2 = f.norm_squared();
        let middle = inst.family.quadratic_form(&f);
        let k_term = (inst.k.adjoint() * &f).norm_squared();
        let left = if k_term == 0.0 { 0.0 } else { a * k_term };
        let lower = (middle - left) / scale;
        let upper = (b * norm2 - middle) / scale;
        if lower < report.worst_lower_margin {
            report.worst_lower_margin = lower;
            report.lower_witness = Some(f.clone());
        }
        if upper < report.worst_upper_margin {
            report.worst_upper_margin = upper;
            report.upper_witness = Some(f);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KFusionVerdict {
    pub is_k_fusion: bool,
    pub bounds: FrameBounds,
    /// When not a K-fusion frame: `f` with
    /// `(bounds.lower + witness_margin)·‖K*f‖² > Σ v_i²‖P_{W_i}f‖²`.
    pub witness: Option<Vector>,
    pub witness_margin: Option<f64>,
}

/// Lower bounds at or below this are treated as zero.
fn positivity_threshold(upper: f64, k_norm: f64) -> f64 {
    RANK_TOL * upper.max(f64::MIN_POSITIVE) / (k_norm * k_norm)
}

pub fn decide(inst: &KFusionInstance) -> Result<KFusionVerdict> {
    let upper = frame::fusion_bounds(&inst.family)?.upper;
    let lower = k_lower_bound(inst)?;
    let bounds = FrameBounds::optimal(lower, upper);
    if lower.is_infinite() {
        return Ok(KFusionVerdict {
            is_k_fusion: true,
            bounds,
            witness: None,
            witness_margin: None,
        });
    }
    let k_norm = numerics::operator_norm(&inst.k);
    if lower > positivity_threshold(upper, k_norm) {
        return Ok(KFusionVerdict {
            is_k_fusion: true,
            bounds,
            witness: None,
            witness_margin: None,
        });
    }
    let margin = 1e-6 * upper.max(1.0) / (k_norm * k_norm);
    let s = frame::fusion_operator(&inst.family);
    let kk = &inst.k * inst.k.adjoint();
    let pencil = s - kk.scale(lower + margin);
    let eig = numerics::hermitian_eig(&pencil)?;
    Ok(KFusionVerdict {
        is_k_fusion: false,
        bounds,
        witness: Some(eig.eigenvector(0)),
        witness_margin: Some(margin),
    })
}

/// `R(K) ⊆ R(T_W)` via the Douglas range test against the synthesis matrix.
pub fn douglas_membership(inst: &KFusionInstance, tol: f64) -> Result<bool> {
    let t = inst.family.synthesis_matrix();
    if t.ncols() == 0 {
        return Ok(numerics::is_zero(&inst.k));
    }
    Ok(numerics::douglas_check(&inst.k, &t, tol)?.range_included)
}

/// Orthonormal basis of `R(K)`.
pub fn operator_range(k: &Matrix) -> Subspace {
    numerics::range_basis(k, RANK_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{real_diag, real_matrix};

    fn axes3() -> WeightedSubspaceFamily {
        WeightedSubspaceFamily::axes(&[1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn lower_bound_examples() {
        let inst = KFusionInstance::new(axes3(), Matrix::identity(3, 3)).unwrap();
        assert!((k_lower_bound(&inst).unwrap() - 1.0).abs() < 1e-12);

        let inst = KFusionInstance::new(axes3(), real_diag(&[2.0, 0.0, 0.0])).unwrap();
        assert!((k_lower_bound(&inst).unwrap() - 0.25).abs() < 1e-12);

        let plane =
            WeightedSubspaceFamily::from_pairs(3, [(Subspace::axes(3, &[0, 1]), 1.0)]).unwrap();
        let inst = KFusionInstance::new(plane, real_diag(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(k_lower_bound(&inst).unwrap(), 0.0);

        let inst = KFusionInstance::new(axes3(), Matrix::zeros(3, 3)).unwrap();
        assert_eq!(k_lower_bound(&inst).unwrap(), f64::INFINITY);
    }

    #[test]
    fn instance_rejects_mismatched_operator() {
        assert!(matches!(
            KFusionInstance::new(axes3(), Matrix::identity(2, 2)),
            Err(KFusionError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sampling_accepts_optimal_and_rejects_inflated() {
        let family = WeightedSubspaceFamily::axes(&[1.0, 2.0, 0.5]).unwrap();
        let k = real_matrix(3, 3, &[1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.3, 0.0, 0.2]);
        let inst = KFusionInstance::new(family.clone(), k).unwrap();
        let a = k_lower_bound(&inst).unwrap();
        let b = frame::fusion_bounds(&family).unwrap().upper;
        let report = verify_k_fusion(&inst, a, b, 200, 1).unwrap();
        assert!(report.holds(1e-9), "{report:?}");

        let inflated = verify_k_fusion(&inst, a * 1.01, b, 200, 1).unwrap();
        assert!(inflated.worst_lower_margin < 0.0);
        let f = inflated.lower_witness.unwrap();
        let left = a * 1.01 * (inst.k().adjoint() * &f).norm_squared();
        assert!(left > family.quadratic_form(&f));
    }

    #[test]
    fn upper_bound_at_top_eigenvalue_holds() {
        let family = WeightedSubspaceFamily::axes(&[1.0, 3.0]).unwrap();
        let inst = KFusionInstance::new(family, Matrix::identity(2, 2)).unwrap();
        let report = verify_k_fusion(&inst, 0.0, 9.0, 100, 2).unwrap();
        assert!(report.worst_upper_margin >= -1e-9);
    }

    #[test]
    fn decide_examples() {
        let family = WeightedSubspaceFamily::axes(&[1.0, 2.0, 0.5]).unwrap();
        let inst = KFusionInstance::new(family, Matrix::identity(3, 3)).unwrap();
        let v = decide(&inst).unwrap();
        assert!(v.is_k_fusion);
        assert!((v.bounds.lower - 0.25).abs() < 1e-12);

        let plane = WeightedSubspaceFamily::from_pairs(
            3,
            [(Subspace::axes(3, &[0]), 1.0), (Subspace::axes(3, &[1]), 1.0)],
        )
        .unwrap();
        let inst = KFusionInstance::new(plane.clone(), Matrix::identity(3, 3)).unwrap();
        let v = decide(&inst).unwrap();
        assert!(!v.is_k_fusion);
        let w = v.witness.unwrap();
        assert!(w[2].norm() > 1.0 - 1e-9);
        let margin = v.witness_margin.unwrap();
        assert!((v.bounds.lower + margin) * (inst.k().adjoint() * &w).norm_squared() > plane.quadratic_form(&w));

        let k = real_matrix(3, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
        let inst = KFusionInstance::new(plane, k).unwrap();
        let v = decide(&inst).unwrap();
        assert!(v.is_k_fusion && v.bounds.lower > 0.0);
    }

    #[test]
    fn bounds_on_range_restrict_to_image() {
        // Family covers only e1; K projects onto e1, so on R(K) the family is tight.
        let family = WeightedSubspaceFamily::from_pairs(2, [(Subspace::axes(2, &[0]), 2.0)]).unwrap();
        let inst = KFusionInstance::new(family, real_diag(&[1.0, 0.0])).unwrap();
        let b = bounds_on_range(&inst).unwrap();
        assert!((b.lower - 4.0).abs() < 1e-12 && (b.upper - 4.0).abs() < 1e-12);
    }
}
