//! Vector frames and weighted subspace families (fusion frames).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, c, Matrix, NumericsError, Subspace, Vector, RANK_TOL};

/// Residual allowed when checking that a vector lies in a subspace.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("frame has no vectors")]
    Empty,
    #[error("frame vector {index} has non-finite entries")]
    NonFinite { index: usize },
    #[error("weight {weight} of member {index} is not strictly positive")]
    InvalidWeight { index: usize, weight: f64 },
    #[error("block {index} does not lie in its subspace (residual {residual:e})")]
    BlockOutsideSubspace { index: usize, residual: f64 },
    #[error("fusion frame operator is singular (lower bound {lower:e})")]
    NotAFusionFrame { lower: f64 },
    #[error("local frame vector {vector} of member {member} lies outside its subspace")]
    LocalVectorOutsideSubspace { member: usize, vector: usize },
    #[error("local frame of member {member} does not span its subspace")]
    DeficientLocalFrame { member: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, FrameError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Optimal,
    Predicted,
}

/// Lower and upper frame-type bounds.
///
/// An infinite lower bound is the sentinel for a vacuous lower inequality
/// (the zero operator in the K-fusion setting).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    #[serde(with = "crate::float_repr")]
    pub lower: f64,
    #[serde(with = "crate::float_repr")]
    pub upper: f64,
    pub kind: BoundKind,
}

impl FrameBounds {
    pub fn optimal(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            kind: BoundKind::Optimal,
        }
    }

    pub fn predicted(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            kind: BoundKind::Predicted,
        }
    }
}

/// `λ_min > RANK_TOL · λ_max`, the numerical reading of "lower bound > 0".
pub fn lower_is_positive(lower: f64, upper: f64) -> bool {
    lower > RANK_TOL * upper && lower > 0.0
}

/// A finite collection of vectors `{f_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFrame {
    ambient_dim: usize,
    vectors: Vec<Vector>,
}

impl VectorFrame {
    pub fn new(ambient_dim: usize, vectors: Vec<Vector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(FrameError::Empty);
        }
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != ambient_dim {
                return Err(FrameError::DimensionMismatch {
                    expected: ambient_dim,
                    found: v.len(),
                });
            }
            if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(FrameError::NonFinite { index });
            }
        }
        Ok(Self {
            ambient_dim,
            vectors,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    /// Synthesis matrix with the frame vectors as columns.
    pub fn synthesis_matrix(&self) -> Matrix {
        Matrix::from_columns(&self.vectors)
    }
}

/// `S = Σ f_i f_i*`.
pub fn frame_operator(frame: &VectorFrame) -> Matrix {
    let n = frame.ambient_dim;
    frame
        .vectors
        .iter()
        .fold(Matrix::zeros(n, n), |acc, f| acc + f * f.adjoint())
}

/// Optimal frame bounds: the extreme eigenvalues of the frame operator.
pub fn frame_bounds(frame: &VectorFrame) -> Result<FrameBounds> {
    let eig = numerics::hermitian_eig(&frame_operator(frame))?;
    Ok(FrameBounds::optimal(eig.min().max(0.0), eig.max()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub subspace: Subspace,
    pub weight: f64,
}

/// A weighted collection of subspaces `{(W_i, v_i)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSubspaceFamily {
    ambient_dim: usize,
    members: Vec<FamilyMember>,
}

impl WeightedSubspaceFamily {
    pub fn new(ambient_dim: usize, members: Vec<FamilyMember>) -> Result<Self> {
        for (index, m) in members.iter().enumerate() {
            if !(m.weight > 0.0 && m.weight.is_finite()) {
                return Err(FrameError::InvalidWeight {
                    index,
                    weight: m.weight,
                });
            }
            if m.subspace.ambient_dim() != ambient_dim {
                return Err(FrameError::DimensionMismatch {
                    expected: ambient_dim,
                    found: m.subspace.ambient_dim(),
                });
            }
        }
        Ok(Self {
            ambient_dim,
            members,
        })
    }

    pub fn from_pairs(ambient_dim: usize, pairs: impl IntoIterator<Item = (Subspace, f64)>) -> Result<Self> {
        let members = pairs
            .into_iter()
            .map(|(subspace, weight)| FamilyMember { subspace, weight })
            .collect();
        Self::new(ambient_dim, members)
    }

    /// The coordinate axes of `C^n`, each with the given weight.
    pub fn axes(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        Self::from_pairs(
            n,
            weights
                .iter()
                .enumerate()
                .map(|(i, &w)| (Subspace::axes(n, &[i]), w)),
        )
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.members.iter().map(|m| m.weight)
    }

    /// The family with the members at `erased` removed.
    pub fn without(&self, erased: &[usize]) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            members: self
                .members
                .iter()
                .enumerate()
                .filter(|(i, _)| !erased.contains(i))
                .map(|(_, m)| m.clone())
                .collect(),
        }
    }

    /// `T_W = [v_1·basis(W_1) | v_2·basis(W_2) | …]`, so that `T_W T_W* = S_W`.
    pub fn synthesis_matrix(&self) -> Matrix {
        let cols: usize = self.members.iter().map(|m| m.subspace.dim()).sum();
        let mut t = Matrix::zeros(self.ambient_dim, cols);
        let mut offset = 0;
        for m in &self.members {
            let k = m.subspace.dim();
            t.view_mut((0, offset), (self.ambient_dim, k))
                .copy_from(&m.subspace.basis().scale(m.weight));
            offset += k;
        }
        t
    }

    /// `Σ v_i² ‖P_{W_i} f‖²`.
    pub fn quadratic_form(&self, f: &Vector) -> f64 {
        self.members
            .iter()
            .map(|m| m.weight * m.weight * (m.subspace.basis().adjoint() * f).norm_squared())
            .sum()
    }
}

/// `S_W = Σ v_i² P_{W_i}`.
pub fn fusion_operator(family: &WeightedSubspaceFamily) -> Matrix {
    let n = family.ambient_dim;
    family.members.iter().fold(Matrix::zeros(n, n), |acc, m| {
        acc + m.subspace.projector().scale(m.weight * m.weight)
    })
}

/// Optimal fusion frame bounds `(λ_min(S_W), λ_max(S_W))`.
pub fn fusion_bounds(family: &WeightedSubspaceFamily) -> Result<FrameBounds> {
    let values = numerics::hermitian_eigenvalues(&fusion_operator(family));
    let lower = values.first().copied().unwrap_or(0.0).max(0.0);
    let upper = values.last().copied().unwrap_or(0.0).max(0.0);
    Ok(FrameBounds::optimal(lower, upper))
}

pub fn is_fusion_frame(family: &WeightedSubspaceFamily) -> Result<bool> {
    let b = fusion_bounds(family)?;
    Ok(lower_is_positive(b.lower, b.upper))
}

/// An element of the direct sum of the member subspaces, one block per
/// member, each block in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    pub blocks: Vec<Vector>,
}

impl BlockVector {
    pub fn zeros(family: &WeightedSubspaceFamily) -> Self {
        Self {
            blocks: vec![Vector::zeros(family.ambient_dim); family.len()],
        }
    }

    pub fn inner(&self, other: &BlockVector) -> num_complex::Complex64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| b.dotc(a))
            .sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }
}

fn check_vector(family: &WeightedSubspaceFamily, f: &Vector) -> Result<()> {
    if f.len() != family.ambient_dim {
        return Err(FrameError::DimensionMismatch {
            expected: family.ambient_dim,
            found: f.len(),
        });
    }
    Ok(())
}

/// `T_W* f = {v_i P_{W_i} f}`.
pub fn fusion_analysis(family: &WeightedSubspaceFamily, f: &Vector) -> Result<BlockVector> {
    check_vector(family, f)?;
    Ok(BlockVector {
        blocks: family
            .members
            .iter()
            .map(|m| {
                let b = m.subspace.basis();
                (b * (b.adjoint() * f)).scale(m.weight)
            })
            .collect(),
    })
}

/// Verifies that `g` conforms to the family: one block per member, each in
/// its subspace.
pub fn check_blocks(family: &WeightedSubspaceFamily, g: &BlockVector) -> Result<()> {
    if g.blocks.len() != family.len() {
        return Err(FrameError::DimensionMismatch {
            expected: family.len(),
            found: g.blocks.len(),
        });
    }
    for (index, (m, block)) in family.members.iter().zip(&g.blocks).enumerate() {
        check_vector(family, block)?;
        let b = m.subspace.basis();
        let residual = (block - b * (b.adjoint() * block)).norm();
        if residual > MEMBERSHIP_TOL * block.norm().max(1.0) {
            return Err(FrameError::BlockOutsideSubspace { index, residual });
        }
    }
    Ok(())
}

/// `T_W g = Σ v_i g_i`.
pub fn fusion_synthesis(family: &WeightedSubspaceFamily, g: &BlockVector) -> Result<Vector> {
    check_blocks(family, g)?;
    Ok(family
        .members
        .iter()
        .zip(&g.blocks)
        .fold(Vector::zeros(family.ambient_dim), |acc, (m, block)| {
            acc + block.scale(m.weight)
        }))
}

/// Recovers `f` from its measurements `{v_i P_{W_i} f}` as
/// `Σ v_i S_W⁻¹ (v_i P_{W_i} f)`.
pub fn reconstruct(family: &WeightedSubspaceFamily, measurements: &BlockVector) -> Result<Vector> {
    let s = fusion_operator(family);
    let bounds = fusion_bounds(family)?;
    if !lower_is_positive(bounds.lower, bounds.upper) {
        return Err(FrameError::NotAFusionFrame {
            lower: bounds.lower,
        });
    }
    let combined = fusion_synthesis(family, measurements)?;
    let chol = s
        .cholesky()
        .ok_or(FrameError::NotAFusionFrame { lower: bounds.lower })?;
    Ok(chol.solve(&combined))
}

/// The global collection `{v_i f_ij}` built from a local frame for each
/// member subspace.
pub fn lift_local_frames(family: &WeightedSubspaceFamily, locals: &[VectorFrame]) -> Result<VectorFrame> {
    if locals.len() != family.len() {
        return Err(FrameError::DimensionMismatch {
            expected: family.len(),
            found: locals.len(),
        });
    }
    let mut lifted = Vec::new();
    for (member, (m, local)) in family.members.iter().zip(locals).enumerate() {
        if local.ambient_dim != family.ambient_dim {
            return Err(FrameError::DimensionMismatch {
                expected: family.ambient_dim,
                found: local.ambient_dim,
            });
        }
        for (vector, f) in local.vectors.iter().enumerate() {
            if !m.subspace.contains(f, MEMBERSHIP_TOL) {
                return Err(FrameError::LocalVectorOutsideSubspace { member, vector });
            }
        }
        // Local frame operator compressed to W_i must be invertible there.
        if m.subspace.dim() > 0 {
            let b = m.subspace.basis();
            let compressed = b.adjoint() * frame_operator(local) * b;
            let values = numerics::hermitian_eigenvalues(&compressed);
            let lower = values.first().copied().unwrap_or(0.0);
            let upper = values.last().copied().unwrap_or(0.0);
            if !lower_is_positive(lower, upper) {
                return Err(FrameError::DeficientLocalFrame { member });
            }
        }
        lifted.extend(local.vectors.iter().map(|f| f * c(m.weight)));
    }
    VectorFrame::new(family.ambient_dim, lifted)
}

/// The columns of each member's orthonormal basis, as local frames.
pub fn orthonormal_local_frames(family: &WeightedSubspaceFamily) -> Vec<VectorFrame> {
    family
        .members
        .iter()
        .map(|m| {
            let vectors: Vec<Vector> = if m.subspace.dim() == 0 {
                vec![Vector::zeros(family.ambient_dim)]
            } else {
                m.subspace.basis().column_iter().map(|col| col.into_owned()).collect()
            };
            VectorFrame {
                ambient_dim: family.ambient_dim,
                vectors,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{max_abs, real_diag, real_vector};

    fn e(n: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(n);
        v[i] = c(1.0);
        v
    }

    #[test]
    fn frame_operator_examples() {
        let basis = VectorFrame::new(3, (0..3).map(|i| e(3, i)).collect()).unwrap();
        assert_eq!(frame_operator(&basis), Matrix::identity(3, 3));
        let twice = VectorFrame::new(3, vec![e(3, 0), e(3, 0)]).unwrap();
        assert_eq!(frame_operator(&twice), real_diag(&[2.0, 0.0, 0.0]));
    }

    #[test]
    fn frame_bounds_examples() {
        let basis = VectorFrame::new(2, vec![e(2, 0), e(2, 1)]).unwrap();
        let b = frame_bounds(&basis).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));

        let mercedes = VectorFrame::new(2, vec![e(2, 0), e(2, 1), real_vector(&[1.0, 1.0])]).unwrap();
        let b = frame_bounds(&mercedes).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-14 && (b.upper - 3.0).abs() < 1e-14);

        let deficient = VectorFrame::new(2, vec![e(2, 0)]).unwrap();
        assert_eq!(frame_bounds(&deficient).unwrap().lower, 0.0);
    }

    #[test]
    fn vector_frame_rejects_empty_and_mismatched() {
        assert_eq!(VectorFrame::new(2, vec![]), Err(FrameError::Empty));
        assert!(matches!(
            VectorFrame::new(2, vec![e(3, 0)]),
            Err(FrameError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fusion_operator_examples() {
        let axes = WeightedSubspaceFamily::axes(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(fusion_operator(&axes), Matrix::identity(3, 3));

        let doubled = WeightedSubspaceFamily::from_pairs(
            2,
            [0, 1, 0, 1].map(|i| (Subspace::axes(2, &[i]), 1.0)),
        )
        .unwrap();
        assert_eq!(fusion_operator(&doubled), real_diag(&[2.0, 2.0]));
    }

    #[test]
    fn fusion_bounds_examples() {
        let b = fusion_bounds(&WeightedSubspaceFamily::axes(&[1.0, 1.0, 1.0]).unwrap()).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        let b = fusion_bounds(&WeightedSubspaceFamily::axes(&[1.0, 1.0, 3.0]).unwrap()).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-14 && (b.upper - 9.0).abs() < 1e-12);

        let partial =
            WeightedSubspaceFamily::from_pairs(3, [(Subspace::axes(3, &[0, 1]), 2.0)]).unwrap();
        assert_eq!(fusion_bounds(&partial).unwrap().lower, 0.0);
        assert!(!is_fusion_frame(&partial).unwrap());
    }

    #[test]
    fn weights_must_be_positive() {
        let err = WeightedSubspaceFamily::axes(&[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, FrameError::InvalidWeight { index: 1, .. }));
    }

    #[test]
    fn analysis_and_synthesis_on_axes() {
        let axes = WeightedSubspaceFamily::axes(&[1.0, 1.0]).unwrap();
        let g = fusion_analysis(&axes, &real_vector(&[1.0, 2.0])).unwrap();
        assert_eq!(g.blocks, vec![real_vector(&[1.0, 0.0]), real_vector(&[0.0, 2.0])]);

        let zero = fusion_analysis(&axes, &Vector::zeros(2)).unwrap();
        assert_eq!(zero, BlockVector::zeros(&axes));
        assert_eq!(fusion_synthesis(&axes, &zero).unwrap(), Vector::zeros(2));

        let whole = WeightedSubspaceFamily::from_pairs(3, [(Subspace::full(3), 1.0)]).unwrap();
        let f = real_vector(&[1.0, -2.0, 0.5]);
        let g = BlockVector { blocks: vec![f.clone()] };
        assert_eq!(fusion_synthesis(&whole, &g).unwrap(), f);
    }

    #[test]
    fn synthesis_rejects_blocks_outside_subspaces() {
        let axes = WeightedSubspaceFamily::axes(&[1.0, 1.0]).unwrap();
        let g = BlockVector {
            blocks: vec![real_vector(&[1.0, 1.0]), real_vector(&[0.0, 1.0])],
        };
        assert!(matches!(
            fusion_synthesis(&axes, &g),
            Err(FrameError::BlockOutsideSubspace { index: 0, .. })
        ));
        assert!(matches!(
            fusion_analysis(&axes, &Vector::zeros(3)),
            Err(FrameError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reconstruct_axes_and_zero() {
        let axes = WeightedSubspaceFamily::axes(&[0.5, 2.0, 1.0]).unwrap();
        let f = real_vector(&[3.0, -1.0, 0.25]);
        let back = reconstruct(&axes, &fusion_analysis(&axes, &f).unwrap()).unwrap();
        assert!((back - &f).norm() < 1e-14);
        let zero = reconstruct(&axes, &BlockVector::zeros(&axes)).unwrap();
        assert_eq!(zero, Vector::zeros(3));
    }

    #[test]
    fn reconstruct_requires_fusion_frame() {
        let partial = WeightedSubspaceFamily::from_pairs(2, [(Subspace::axes(2, &[0]), 1.0)]).unwrap();
        let g = BlockVector::zeros(&partial);
        assert!(matches!(
            reconstruct(&partial, &g),
            Err(FrameError::NotAFusionFrame { .. })
        ));
    }

    #[test]
    fn orthonormal_local_frames_reproduce_fusion_operator() {
        let s = 0.5f64.sqrt();
        let tilted = Subspace::new(numerics::real_matrix(3, 1, &[s, s, 0.0])).unwrap();
        let family = WeightedSubspaceFamily::from_pairs(
            3,
            [(tilted, 1.5), (Subspace::axes(3, &[1, 2]), 0.7), (Subspace::axes(3, &[0]), 1.0)],
        )
        .unwrap();
        let lifted = lift_local_frames(&family, &orthonormal_local_frames(&family)).unwrap();
        assert!(max_abs(&(frame_operator(&lifted) - fusion_operator(&family))) < 1e-14);
    }

    #[test]
    fn axes_with_unit_locals_give_standard_basis() {
        let axes = WeightedSubspaceFamily::axes(&[1.0, 1.0, 1.0]).unwrap();
        let locals: Vec<_> = (0..3).map(|i| VectorFrame::new(3, vec![e(3, i)]).unwrap()).collect();
        let lifted = lift_local_frames(&axes, &locals).unwrap();
        let b = frame_bounds(&lifted).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
    }

    #[test]
    fn lift_rejects_deficient_or_stray_locals() {
        let family =
            WeightedSubspaceFamily::from_pairs(3, [(Subspace::axes(3, &[0, 1]), 1.0)]).unwrap();
        let deficient = VectorFrame::new(3, vec![e(3, 0)]).unwrap();
        assert_eq!(
            lift_local_frames(&family, &[deficient]),
            Err(FrameError::DeficientLocalFrame { member: 0 })
        );
        let stray = VectorFrame::new(3, vec![e(3, 0), e(3, 1), e(3, 2)]).unwrap();
        assert_eq!(
            lift_local_frames(&family, &[stray]),
            Err(FrameError::LocalVectorOutsideSubspace { member: 0, vector: 2 })
        );
    }
}
