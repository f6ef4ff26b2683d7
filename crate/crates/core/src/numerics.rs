//! Dense complex linear-algebra substrate.
//!
//! Everything above this module talks in terms of [`Matrix`], [`Vector`] and
//! [`Subspace`]. Real inputs are the imaginary-part-zero special case.
//!
//! Numerical rank is decided by one convention throughout: a singular value
//! (or, for Hermitian PSD matrices, an eigenvalue) counts as zero when it is
//! at most [`RANK_TOL`] times the largest one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type Matrix = DMatrix<Complex64>;
pub type Vector = DVector<Complex64>;

/// Relative singular-value threshold defining numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// Relative residual above which a matrix is not considered Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative eigenvalue floor below which a matrix is not considered PSD.
pub const PSD_TOL: f64 = 1e-10;

/// Relative residual `‖(I - P)G‖ / ‖G‖` above which `range(G)` is treated as
/// leaving `range(Sw)` in [`max_psd_scale`].
pub const RANGE_TOL: f64 = 1e-8;

/// Agreement required between the closed-form and bisection routes of
/// [`max_psd_scale`].
pub const SCALE_AGREEMENT: f64 = 1e-8;

/// Default threshold for separating the invertible core in [`drazin`].
pub const DRAZIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (relative residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("basis columns are not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("core and nilpotent parts cannot be separated (gap ratio {gap:e})")]
    IllConditionedSplit { gap: f64 },
    #[error("closed form {closed_form:e} and bisection {bisection:e} disagree")]
    ScaleDisagreement { closed_form: f64, bisection: f64 },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Embeds a real matrix given in row-major order.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> Matrix {
    Matrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x)))
}

pub fn real_vector(data: &[f64]) -> Vector {
    Vector::from_iterator(data.len(), data.iter().map(|&x| c(x)))
}

pub fn real_diag(diag: &[f64]) -> Matrix {
    Matrix::from_diagonal(&real_vector(diag))
}

pub fn is_finite(m: &Matrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entry modulus.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_zero(m: &Matrix) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

fn ensure_square(m: &Matrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(NumericsError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Largest singular value, `√λ_max` of the smaller Gram matrix.
pub fn operator_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    gram.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .sqrt()
}

pub fn vector_norm(v: &Vector) -> f64 {
    v.norm()
}

/// Singular triplets `M = Σ σ_j u_j v_j*` with `σ_j > 0`, largest first.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    fn columns(m: &Matrix, keep: &[usize]) -> Matrix {
        Matrix::from_fn(m.nrows(), keep.len(), |i, j| m[(i, keep[j])])
    }

    /// Indices of the triplets with `σ > threshold`.
    fn above(&self, threshold: f64) -> Vec<usize> {
        (0..self.sigma.len()).filter(|&j| self.sigma[j] > threshold).collect()
    }
}

/// Singular value decomposition from the Hermitian eigendecomposition of
/// `[0 M; M* 0]`, whose eigenpairs are `±σ_j` with `(u_j; ±v_j)/√2` plus a
/// null space. Singular values come out with absolute accuracy about
/// `eps·‖M‖`, uniformly in the rank.
///
/// nalgebra's bidiagonal SVD is not used: it returns inaccurate factors for
/// many rank-deficient inputs.
pub fn svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    let size = rows + cols;
    let mut h = Matrix::zeros(size, size);
    h.view_mut((0, rows), (rows, cols)).copy_from(m);
    h.view_mut((rows, 0), (cols, rows)).copy_from(&m.adjoint());
    let eig = h.symmetric_eigen();
    // Eigenvalues at rounding level belong to the null space, whose
    // eigenvectors mix N(M*) and N(M) arbitrarily.
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let floor = 4.0 * size as f64 * f64::EPSILON * top;
    let mut order: Vec<usize> = (0..size).filter(|&j| eig.eigenvalues[j] > floor).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order.truncate(rows.min(cols));

    let mut u = Vec::new();
    let mut v = Vec::new();
    let mut sigma = Vec::new();
    for j in order {
        let vec = eig.eigenvectors.column(j);
        let x = vec.rows(0, rows).into_owned();
        let y = vec.rows(rows, cols).into_owned();
        let (nx, ny) = (x.norm(), y.norm());
        // Genuine pairs split evenly; lopsided ones are rounding noise from
        // the null space.
        if nx < 0.25 || ny < 0.25 {
            continue;
        }
        u.push(x.unscale(nx));
        v.push(y.unscale(ny));
        sigma.push(eig.eigenvalues[j]);
    }
    let stack = |cols: &[Vector], rows: usize| {
        let mut out = Matrix::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            out.set_column(j, col);
        }
        out
    };
    Svd {
        u: stack(&u, rows),
        v: stack(&v, cols),
        sigma,
    }
}

fn singular_values(m: &Matrix) -> Vec<f64> {
    svd(m).sigma
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenResult {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn eigenvector(&self, j: usize) -> Vector {
        self.eigenvectors.column(j).into_owned()
    }
}

fn hermitian_residual(m: &Matrix) -> f64 {
    let scale = m.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / scale
}

fn check_hermitian(m: &Matrix) -> Result<()> {
    ensure_square(m)?;
    let residual = hermitian_residual(m);
    if residual > HERMITIAN_TOL {
        return Err(NumericsError::NotHermitian { residual });
    }
    Ok(())
}

fn symmetrized(m: &Matrix) -> Matrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn hermitian_eig(m: &Matrix) -> Result<EigenResult> {
    check_hermitian(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(EigenResult {
            eigenvalues: Vec::new(),
            eigenvectors: Matrix::zeros(0, 0),
        });
    }
    let eig = symmetrized(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let eigenvectors = Matrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, ascending. Input must already be known Hermitian.
pub fn hermitian_eigenvalues(m: &Matrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut values: Vec<f64> = symmetrized(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// An orthonormal basis (as matrix columns) of a subspace of `C^ambient_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    pub const ORTHONORMAL_TOL: f64 = 1e-12;

    pub fn new(basis: Matrix) -> Result<Self> {
        if !is_finite(&basis) {
            return Err(NumericsError::NonFinite);
        }
        if basis.ncols() > basis.nrows() {
            return Err(NumericsError::NotOrthonormal { residual: f64::INFINITY });
        }
        let k = basis.ncols();
        let gram = basis.adjoint() * &basis;
        let residual = max_abs(&(gram - Matrix::identity(k, k)));
        if residual > Self::ORTHONORMAL_TOL {
            return Err(NumericsError::NotOrthonormal { residual });
        }
        Ok(Self { basis })
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            basis: Matrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            basis: Matrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// Span of the columns of `vectors`, orthonormalized.
    pub fn span(vectors: &Matrix) -> Self {
        range_basis(vectors, RANK_TOL)
    }

    /// Span of the coordinate axes with the given indices.
    pub fn axes(ambient_dim: usize, indices: &[usize]) -> Self {
        let mut basis = Matrix::zeros(ambient_dim, indices.len());
        for (j, &i) in indices.iter().enumerate() {
            basis[(i, j)] = c(1.0);
        }
        Self { basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn into_basis(self) -> Matrix {
        self.basis
    }

    pub fn projector(&self) -> Matrix {
        projector(self)
    }

    /// Image of the subspace under a unitary change of coordinates.
    pub fn transformed(&self, unitary: &Matrix) -> Self {
        Self::span(&(unitary * &self.basis))
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> bool {
        let residual = v - &self.basis * (self.basis.adjoint() * v);
        residual.norm() <= tol * v.norm().max(1.0)
    }
}

/// Orthogonal projection onto `w`.
pub fn projector(w: &Subspace) -> Matrix {
    w.basis() * w.basis().adjoint()
}

/// Orthonormal basis of the column space, dropping singular directions with
/// `σ <= rank_tol * σ_max`.
pub fn range_basis(m: &Matrix, rank_tol: f64) -> Subspace {
    let rows = m.nrows();
    if m.is_empty() || is_zero(m) {
        return Subspace::zero(rows);
    }
    let svd = svd(m);
    let sigma_max = svd.sigma.first().copied().unwrap_or(0.0);
    Subspace {
        basis: Svd::columns(&svd.u, &svd.above(rank_tol * sigma_max)),
    }
}

/// Orthonormal basis of the null space under an absolute singular-value
/// threshold.
fn null_basis_abs(m: &Matrix, threshold: f64) -> Matrix {
    let n = m.ncols();
    let svd = svd(m);
    let kept = Svd::columns(&svd.v, &svd.above(threshold));
    // Complement of the kept right singular vectors: eigenvalue-one
    // eigenvectors of the projector I - VV*.
    let eig = (Matrix::identity(n, n) - &kept * kept.adjoint()).symmetric_eigen();
    let keep: Vec<usize> = (0..n).filter(|&j| eig.eigenvalues[j] > 0.5).collect();
    Svd::columns(&eig.eigenvectors, &keep)
}

/// Moore–Penrose pseudoinverse by truncated SVD.
pub fn pinv(m: &Matrix, rank_tol: f64) -> Matrix {
    let (rows, cols) = m.shape();
    if m.is_empty() || is_zero(m) {
        return Matrix::zeros(cols, rows);
    }
    let svd = svd(m);
    let sigma_max = svd.sigma.first().copied().unwrap_or(0.0);
    let mut out = Matrix::zeros(cols, rows);
    for j in svd.above(rank_tol * sigma_max) {
        out += (svd.v.column(j) * svd.u.column(j).adjoint()).scale(1.0 / svd.sigma[j]);
    }
    out
}

/// The four Penrose residuals `TT†T - T`, `T†TT† - T†`, `(TT†)* - TT†`,
/// `(T†T)* - T†T` in operator norm.
pub fn penrose_residuals(t: &Matrix, t_pinv: &Matrix) -> [f64; 4] {
    let tt = t * t_pinv;
    let pt = t_pinv * t;
    [
        operator_norm(&(&tt * t - t)),
        operator_norm(&(&pt * t_pinv - t_pinv)),
        operator_norm(&(tt.adjoint() - &tt)),
        operator_norm(&(pt.adjoint() - &pt)),
    ]
}

/// Drazin inverse together with the index of the matrix.
#[derive(Debug, Clone)]
pub struct Drazin {
    pub inverse: Matrix,
    pub index: usize,
}

/// Numerical rank of `m` with singular values compared against an absolute
/// threshold. Also reports the smallest ratio `σ / threshold` among the
/// singular values above `threshold`, and the largest such ratio below it.
fn rank_abs(m: &Matrix, threshold: f64) -> (usize, f64, f64) {
    let mut rank = 0;
    let mut above = f64::INFINITY;
    let mut below = 0.0_f64;
    for s in singular_values(m) {
        let ratio = if threshold > 0.0 { s / threshold } else { f64::INFINITY };
        if s > threshold {
            rank += 1;
            above = above.min(ratio);
        } else {
            below = below.max(ratio);
        }
    }
    (rank, above, below)
}

/// Drazin inverse by core–nilpotent splitting.
///
/// The index `k` is the smallest `k >= 1` with `rank(M^k) = rank(M^{k+1})`,
/// ranks taken against the absolute threshold `tol * ‖M‖^j`. The core lives
/// on `R(M^k)` and the nilpotent part on `N(M^k)`; in the basis
/// `Q = [R(M^k) | N(M^k)]` the matrix is block diagonal and the inverse is
/// `Q · diag(C⁻¹, 0) · Q⁻¹`.
pub fn drazin(m: &Matrix, tol: f64) -> Result<Drazin> {
    ensure_square(m)?;
    let n = m.nrows();
    let norm = operator_norm(m);
    if n == 0 || norm == 0.0 {
        return Ok(Drazin {
            inverse: Matrix::zeros(n, n),
            index: 1,
        });
    }

    let mut powers = vec![Matrix::identity(n, n), m.clone()];
    let mut ranks = vec![n];
    let mut worst_gap = f64::INFINITY;
    let mut index = None;
    for j in 1..=n + 1 {
        let threshold = tol * norm.powi(j as i32);
        let (rank, above, below) = rank_abs(&powers[j], threshold);
        if above.is_finite() {
            worst_gap = worst_gap.min(above);
        }
        if below > 0.1 {
            worst_gap = worst_gap.min(1.0 / below);
        }
        ranks.push(rank);
        if j >= 2 && ranks[j] == ranks[j - 1] {
            index = Some(j - 1);
            break;
        }
        let next = &powers[j] * m;
        powers.push(next);
    }
    let index = index.unwrap_or(n);
    if worst_gap < 10.0 {
        return Err(NumericsError::IllConditionedSplit { gap: worst_gap });
    }

    let mk = &powers[index];
    let threshold = tol * norm.powi(index as i32);
    let rank = ranks[index];
    if rank == 0 {
        return Ok(Drazin {
            inverse: Matrix::zeros(n, n),
            index,
        });
    }
    let core = {
        let svd = svd(mk);
        Svd::columns(&svd.u, &svd.above(threshold))
    };
    let nil = null_basis_abs(mk, threshold);
    if core.ncols() + nil.ncols() != n {
        return Err(NumericsError::IllConditionedSplit { gap: 0.0 });
    }
    let mut q = Matrix::zeros(n, n);
    q.view_mut((0, 0), (n, rank)).copy_from(&core);
    q.view_mut((0, rank), (n, n - rank)).copy_from(&nil);
    let q_inv = q
        .clone()
        .try_inverse()
        .ok_or(NumericsError::IllConditionedSplit { gap: 0.0 })?;
    let block = &q_inv * m * &q;
    let c_block = block.view((0, 0), (rank, rank)).into_owned();

    let eigen_floor = c_block
        .clone()
        .schur()
        .eigenvalues()
        .map(|ev| ev.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min))
        .unwrap_or(0.0);
    let gap = eigen_floor / (tol * norm);
    if gap < 10.0 {
        return Err(NumericsError::IllConditionedSplit { gap });
    }
    let c_inv = c_block
        .try_inverse()
        .ok_or(NumericsError::IllConditionedSplit { gap: 0.0 })?;
    let mut inner = Matrix::zeros(n, n);
    inner.view_mut((0, 0), (rank, rank)).copy_from(&c_inv);
    Ok(Drazin {
        inverse: &q * inner * q_inv,
        index,
    })
}

/// Residuals of the three Drazin identities `STS = S`, `ST = TS`,
/// `T^k S T = T^k`, in operator norm.
pub fn drazin_residuals(t: &Matrix, s: &Matrix, k: usize) -> [f64; 3] {
    let tk = t.pow(k as u32);
    [
        operator_norm(&(s * t * s - s)),
        operator_norm(&(s * t - t * s)),
        operator_norm(&(&tk * s * t - &tk)),
    ]
}

#[derive(Debug, Clone)]
pub struct DouglasReport {
    pub range_included: bool,
    /// `‖(I - TT†)S‖`.
    pub range_residual: f64,
    /// Smallest `α` with `SS* ⪯ α TT*`, when the range is included.
    pub alpha: Option<f64>,
    /// `L = T†S` with `S = TL`, when the range is included.
    pub factor: Option<Matrix>,
    pub factor_residual: Option<f64>,
}

/// Range inclusion `R(S) ⊆ R(T)` with its majorization constant and factor.
pub fn douglas_check(s: &Matrix, t: &Matrix, tol: f64) -> Result<DouglasReport> {
    if s.nrows() != t.nrows() {
        return Err(NumericsError::DimensionMismatch {
            expected: t.nrows(),
            found: s.nrows(),
        });
    }
    let t_pinv = pinv(t, RANK_TOL);
    let scale = operator_norm(s).max(1.0);
    let factor = &t_pinv * s;
    let range_residual = operator_norm(&(s - t * &factor));
    if range_residual > tol * scale {
        return Ok(DouglasReport {
            range_included: false,
            range_residual,
            alpha: None,
            factor: None,
            factor_residual: None,
        });
    }
    let a_opt = max_psd_scale(&(t * t.adjoint()), &(s * s.adjoint()))?;
    let alpha = if a_opt.is_infinite() { 0.0 } else { 1.0 / a_opt };
    Ok(DouglasReport {
        range_included: true,
        range_residual,
        alpha: alpha.is_finite().then_some(alpha),
        factor: Some(factor),
        factor_residual: Some(range_residual),
    })
}

fn check_psd(m: &Matrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let values = hermitian_eigenvalues(m);
    let top = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if let Some(&min) = values.first() {
        if min < -PSD_TOL * top {
            return Err(NumericsError::NotPsd { min_eigenvalue: min });
        }
    }
    Ok(values)
}

/// Both pencils `(Sw, G)` compressed onto `range(Sw)`, or `None` when
/// `range(G)` leaves `range(Sw)`.
struct CompressedPencil {
    sw: Matrix,
    g: Matrix,
}

fn compress_pencil(sw: &Matrix, g: &Matrix) -> Result<Option<CompressedPencil>> {
    if sw.shape() != g.shape() {
        return Err(NumericsError::DimensionMismatch {
            expected: sw.nrows(),
            found: g.nrows(),
        });
    }
    let eig = hermitian_eig(sw)?;
    let top = eig.max();
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&j| eig.eigenvalues[j] > RANK_TOL * top)
        .collect();
    if keep.is_empty() {
        return Ok(None);
    }
    let n = sw.nrows();
    let q = Matrix::from_fn(n, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])]);
    let outside = g - &q * (q.adjoint() * g);
    if operator_norm(&outside) > RANGE_TOL * operator_norm(g) {
        return Ok(None);
    }
    Ok(Some(CompressedPencil {
        sw: q.adjoint() * sw * &q,
        g: q.adjoint() * g * &q,
    }))
}

fn closed_form_scale(pencil: &CompressedPencil) -> Result<f64> {
    let eig = hermitian_eig(&pencil.sw)?;
    let r = pencil.sw.nrows();
    let inv_sqrt = Matrix::from_fn(r, r, |i, j| {
        (0..r)
            .map(|l| {
                eig.eigenvectors[(i, l)]
                    * eig.eigenvectors[(j, l)].conj()
                    * eig.eigenvalues[l].powf(-0.5)
            })
            .sum()
    });
    let whitened = &inv_sqrt * &pencil.g * &inv_sqrt;
    let top = hermitian_eigenvalues(&whitened).last().copied().unwrap_or(0.0);
    Ok(if top > 0.0 { 1.0 / top } else { f64::INFINITY })
}

/// Bisection on `A` with the feasibility test `λ_min(Sw - A·G) >= -τ`.
fn bisect_scale(pencil: &CompressedPencil) -> f64 {
    let sw_vals = hermitian_eigenvalues(&pencil.sw);
    let g_eig = match hermitian_eig(&pencil.g) {
        Ok(e) => e,
        Err(_) => return f64::NAN,
    };
    let g_top = g_eig.max();
    if g_top <= 0.0 {
        return f64::INFINITY;
    }
    let sw_min = sw_vals.first().copied().unwrap_or(0.0);
    let sw_top = sw_vals.last().copied().unwrap_or(0.0);
    let slack = 8.0 * f64::EPSILON * pencil.sw.nrows() as f64 * sw_top;
    let feasible = |a: f64| {
        let shifted = &pencil.sw - pencil.g.scale(a);
        hermitian_eigenvalues(&shifted).first().copied().unwrap_or(0.0) >= -slack
    };

    // λ_min(Sw)/λ_max(G) is always feasible; the Rayleigh quotient along the
    // top eigenvector of G is never strictly feasible.
    let mut lo = sw_min / g_top;
    let v = g_eig.eigenvector(g_eig.eigenvalues.len() - 1);
    let mut hi = (v.adjoint() * &pencil.sw * &v)[(0, 0)].re / g_top;
    if hi <= lo {
        return hi;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest `A >= 0` with `Sw - A·G ⪰ 0`.
///
/// Returns `+∞` when `G = 0` and `0` when `range(G) ⊄ range(Sw)`. The closed
/// form `1/λ_max(Sw^{†/2} G Sw^{†/2})` on `range(Sw)` is cross-checked by
/// bisection; disagreement beyond [`SCALE_AGREEMENT`] is an error.
pub fn max_psd_scale(sw: &Matrix, g: &Matrix) -> Result<f64> {
    check_psd(sw)?;
    check_psd(g)?;
    if is_zero(g) {
        return Ok(f64::INFINITY);
    }
    let Some(pencil) = compress_pencil(sw, g)? else {
        return Ok(0.0);
    };
    let closed = closed_form_scale(&pencil)?;
    let bisected = bisect_scale(&pencil);
    if closed.is_infinite() && bisected.is_infinite() {
        return Ok(closed);
    }
    if !((closed - bisected).abs() <= SCALE_AGREEMENT * closed.abs()) {
        return Err(NumericsError::ScaleDisagreement {
            closed_form: closed,
            bisection: bisected,
        });
    }
    Ok(closed)
}

/// The bisection route of [`max_psd_scale`] on its own.
pub fn max_psd_scale_bisection(sw: &Matrix, g: &Matrix) -> Result<f64> {
    check_psd(sw)?;
    check_psd(g)?;
    if is_zero(g) {
        return Ok(f64::INFINITY);
    }
    Ok(match compress_pencil(sw, g)? {
        Some(pencil) => bisect_scale(&pencil),
        None => 0.0,
    })
}

/// Tests `P_W T* P_V = P_W T*` for `T : C^n -> C^m`, `W ⊆ C^n`, `V ⊆ C^m`.
pub fn projection_lemma_check(t: &Matrix, w: &Subspace, v: &Subspace, tol: f64) -> Result<bool> {
    if w.ambient_dim() != t.ncols() {
        return Err(NumericsError::DimensionMismatch {
            expected: t.ncols(),
            found: w.ambient_dim(),
        });
    }
    if v.ambient_dim() != t.nrows() {
        return Err(NumericsError::DimensionMismatch {
            expected: t.nrows(),
            found: v.ambient_dim(),
        });
    }
    let pw_t = projector(w) * t.adjoint();
    let residual = operator_norm(&(&pw_t * projector(v) - &pw_t));
    Ok(residual <= tol)
}

/// Direct subspace test `T·W ⊆ V`.
pub fn maps_into(t: &Matrix, w: &Subspace, v: &Subspace, tol: f64) -> bool {
    let image = t * w.basis();
    let outside = &image - projector(v) * &image;
    operator_norm(&outside) <= tol * operator_norm(&image).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        max_abs(&(a - b))
    }

    fn test_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        // Small LCG keeps these unit tests independent of the instances module.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        Matrix::from_fn(rows, cols, |_, _| Complex64::new(next(), next()))
    }

    fn reconstruction_error(m: &Matrix) -> f64 {
        let d = svd(m);
        let sigma = Matrix::from_diagonal(&Vector::from_iterator(d.sigma.len(), d.sigma.iter().map(|&x| c(x))));
        let r = d.sigma.len();
        let orth_u = max_abs(&(d.u.adjoint() * &d.u - Matrix::identity(r, r)));
        let orth_v = max_abs(&(d.v.adjoint() * &d.v - Matrix::identity(r, r)));
        (&d.u * sigma * d.v.adjoint() - m).norm() / m.norm().max(1e-300) + orth_u + orth_v
    }

    #[test]
    fn svd_of_rank_deficient_matrices() {
        // Projectors and low-rank products, including the 2x2 case.
        for n in 1..7 {
            for seed in 0..20 {
                let g = test_matrix(n, 1 + (seed as usize) % n, seed);
                let p = range_basis(&g, RANK_TOL).projector();
                let complement = Matrix::identity(n, n) - &p;
                let low = test_matrix(n, 1, seed + 100) * test_matrix(1, n + 1, seed + 200);
                for m in [p, complement, low] {
                    if !is_zero(&m) {
                        let e = reconstruction_error(&m); assert!(e < 1e-12, "n = {n}, seed = {seed}, err {e:e}");
                    }
                }
            }
        }
        let ker = real_matrix(2, 2, &[0.16738742108376780, -0.3733214062261814, -0.3733214062261815, 0.8326125789162317]);
        let d = svd(&ker);
        assert_eq!(d.sigma.len(), 1);
        assert!((d.sigma[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = hermitian_eig(&Matrix::identity(3, 3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        let e = hermitian_eig(&real_diag(&[3.0, 1.0, 2.0])).unwrap();
        for (got, want) in e.eigenvalues.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_reassembles_random_hermitian() {
        let a = test_matrix(8, 8, 3);
        let h = &a + a.adjoint();
        let e = hermitian_eig(&h).unwrap();
        let lambda = Matrix::from_diagonal(&real_vector(&e.eigenvalues));
        let rebuilt = &e.eigenvectors * lambda * e.eigenvectors.adjoint();
        assert!(operator_norm(&(rebuilt - &h)) <= 1e-10 * operator_norm(&h));
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_rejects_non_hermitian_and_non_square() {
        let m = real_matrix(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(hermitian_eig(&m), Err(NumericsError::NotHermitian { .. })));
        assert!(matches!(
            hermitian_eig(&Matrix::zeros(2, 3)),
            Err(NumericsError::NotSquare { .. })
        ));
    }

    #[test]
    fn pinv_diagonal_and_invertible() {
        let p = pinv(&real_diag(&[2.0, 0.0]), RANK_TOL);
        assert!(max_abs_diff(&p, &real_diag(&[0.5, 0.0])) < 1e-15);
        let m = real_matrix(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let inv = m.clone().try_inverse().unwrap();
        assert!(max_abs_diff(&pinv(&m, RANK_TOL), &inv) < 1e-10);
        assert_eq!(pinv(&Matrix::zeros(2, 3), RANK_TOL), Matrix::zeros(3, 2));
    }

    #[test]
    fn pinv_rank_two_penrose() {
        let m = test_matrix(4, 2, 5) * test_matrix(2, 4, 6);
        let p = pinv(&m, RANK_TOL);
        let scale = operator_norm(&m).max(1.0);
        for r in penrose_residuals(&m, &p) {
            assert!(r <= 1e-9 * scale, "residual {r}");
        }
    }

    #[test]
    fn drazin_invertible() {
        let m = real_matrix(2, 2, &[2.0, 1.0, 0.0, 3.0]);
        let d = drazin(&m, DRAZIN_TOL).unwrap();
        assert_eq!(d.index, 1);
        assert!(max_abs_diff(&d.inverse, &m.try_inverse().unwrap()) < 1e-10);
    }

    #[test]
    fn drazin_nilpotent_is_zero() {
        let n = real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let d = drazin(&n, DRAZIN_TOL).unwrap();
        assert_eq!(d.index, 2);
        assert!(max_abs(&d.inverse) < 1e-12);
    }

    #[test]
    fn drazin_conjugated_core_nilpotent() {
        let block = real_matrix(3, 3, &[2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let q = Matrix::identity(3, 3) + test_matrix(3, 3, 11).scale(0.3);
        let q_inv = q.clone().try_inverse().unwrap();
        let m = &q * block * &q_inv;
        let d = drazin(&m, DRAZIN_TOL).unwrap();
        assert_eq!(d.index, 2);
        let scale = operator_norm(&m).powi(2).max(1.0);
        for r in drazin_residuals(&m, &d.inverse, d.index) {
            assert!(r <= 1e-8 * scale, "residual {r}");
        }
        // Known answer: Q · diag(1/2, 0, 0) · Q⁻¹.
        let expected = &q * real_diag(&[0.5, 0.0, 0.0]) * &q_inv;
        assert!(max_abs_diff(&d.inverse, &expected) < 1e-9);
    }

    #[test]
    fn drazin_rejects_eigenvalue_on_tolerance_circle() {
        let m = real_diag(&[1.0, 3e-9]);
        assert!(matches!(
            drazin(&m, DRAZIN_TOL),
            Err(NumericsError::IllConditionedSplit { .. })
        ));
    }

    #[test]
    fn projector_examples() {
        let p = projector(&Subspace::axes(2, &[0]));
        assert_eq!(p, real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(projector(&Subspace::zero(3)), Matrix::zeros(3, 3));
        let s = 0.5f64.sqrt();
        let w = Subspace::new(real_matrix(2, 1, &[s, s])).unwrap();
        assert!(max_abs_diff(&projector(&w), &real_matrix(2, 2, &[0.5, 0.5, 0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn subspace_rejects_non_orthonormal() {
        assert!(matches!(
            Subspace::new(real_matrix(2, 1, &[1.0, 1.0])),
            Err(NumericsError::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn range_basis_examples() {
        assert_eq!(range_basis(&Matrix::identity(3, 3), RANK_TOL).dim(), 3);
        assert_eq!(range_basis(&Matrix::zeros(3, 3), RANK_TOL).dim(), 0);
        let u = real_vector(&[1.0, 2.0, -2.0]);
        let v = real_vector(&[0.5, 1.0, 1.0]);
        let r = range_basis(&(&u * v.adjoint()), RANK_TOL);
        assert_eq!(r.dim(), 1);
        let expected = (&u * u.adjoint()).scale(1.0 / u.norm_squared());
        assert!(max_abs_diff(&r.projector(), &expected) < 1e-14);
    }

    #[test]
    fn max_psd_scale_examples() {
        let i2 = Matrix::identity(2, 2);
        assert!((max_psd_scale(&i2, &i2).unwrap() - 1.0).abs() < 1e-12);
        assert!((max_psd_scale(&i2, &real_diag(&[4.0, 0.0])).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(max_psd_scale(&real_diag(&[1.0, 0.0]), &real_diag(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(max_psd_scale(&i2, &Matrix::zeros(2, 2)).unwrap(), f64::INFINITY);
        assert!(matches!(
            max_psd_scale(&real_diag(&[1.0, -1.0]), &i2),
            Err(NumericsError::NotPsd { .. })
        ));
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&Matrix::identity(4, 4)), 1.0);
        assert!((operator_norm(&real_diag(&[3.0, -4.0])) - 4.0).abs() < 1e-14);
        let m = test_matrix(5, 3, 9);
        let gram = m.adjoint() * &m;
        let top = hermitian_eigenvalues(&gram).last().copied().unwrap();
        assert!((operator_norm(&m) - top.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn douglas_examples() {
        let t = test_matrix(4, 3, 21);
        let same = douglas_check(&t, &t, 1e-9).unwrap();
        assert!(same.range_included);
        assert!(same.alpha.unwrap() <= 1.0 + 1e-9);

        let s = real_matrix(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let t = real_matrix(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let r = douglas_check(&s, &t, 1e-9).unwrap();
        assert!(!r.range_included);
        assert!(r.alpha.is_none() && r.factor.is_none());

        assert!(matches!(
            douglas_check(&Matrix::zeros(3, 2), &Matrix::zeros(2, 2), 1e-9),
            Err(NumericsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn projection_lemma_examples() {
        let t = test_matrix(4, 4, 31);
        let w = Subspace::span(&test_matrix(4, 2, 32));
        let tw = Subspace::span(&(&t * w.basis()));
        assert!(projection_lemma_check(&t, &w, &tw, 1e-9).unwrap());
        assert!(maps_into(&t, &w, &tw, 1e-9));

        let t = Matrix::identity(2, 2);
        let w = Subspace::axes(2, &[0]);
        let v = Subspace::axes(2, &[1]);
        assert!(!projection_lemma_check(&t, &w, &v, 1e-9).unwrap());
        assert!(!maps_into(&t, &w, &v, 1e-9));
    }
}
