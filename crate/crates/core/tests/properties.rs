use framekit::frame::{self, WeightedSubspaceFamily};
use framekit::kfusion::{self, KFusionInstance};
use framekit::numerics::{self, Matrix, Subspace, RANGE_TOL, RANK_TOL};
use num_complex::Complex64;
use proptest::prelude::*;

fn matrix_from(rows: usize, cols: usize, re: &[f64], im: Option<&[f64]>) -> Matrix {
    Matrix::from_fn(rows, cols, |i, j| {
        let k = i * cols + j;
        Complex64::new(re[k], im.map_or(0.0, |im| im[k]))
    })
}

/// Real or complex matrices with entries in `[-5, 5]` and the given shape
/// range.
fn matrices(dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Matrix> {
    (dims.clone(), dims, any::<bool>()).prop_flat_map(|(r, c, complex)| {
        (
            prop::collection::vec(-5.0..5.0f64, r * c),
            prop::collection::vec(-5.0..5.0f64, r * c),
        )
            .prop_map(move |(re, im)| matrix_from(r, c, &re, complex.then_some(&im[..])))
    })
}

fn square(dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Matrix> {
    dims.prop_flat_map(|n| {
        prop::collection::vec(-5.0..5.0f64, n * n).prop_map(move |re| matrix_from(n, n, &re, None))
    })
}

/// Low-rank products `A·B` with inner dimension below both sides.
fn low_rank(dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Matrix> {
    (dims.clone(), dims).prop_flat_map(|(r, c)| {
        let inner = 1..r.min(c);
        inner.prop_flat_map(move |k| {
            (
                prop::collection::vec(-3.0..3.0f64, r * k),
                prop::collection::vec(-3.0..3.0f64, k * c),
            )
                .prop_map(move |(a, b)| matrix_from(r, k, &a, None) * matrix_from(k, c, &b, None))
        })
    })
}

/// Families of `n_members` random subspaces of `R^n` with weights in
/// `[0.5, 2]`; spanning is not guaranteed.
fn families() -> impl Strategy<Value = WeightedSubspaceFamily> {
    (2usize..6, 1usize..7).prop_flat_map(|(n, members)| {
        prop::collection::vec(
            (1usize..=n, prop::collection::vec(-1.0..1.0f64, n * n), 0.5..2.0f64),
            members,
        )
        .prop_map(move |specs| {
            let pairs = specs.into_iter().map(|(d, entries, w)| {
                let cols = matrix_from(n, n, &entries, None).columns(0, d).into_owned();
                (Subspace::span(&cols), w)
            });
            WeightedSubspaceFamily::from_pairs(n, pairs).unwrap()
        })
    })
}

fn spanning_families() -> impl Strategy<Value = WeightedSubspaceFamily> {
    families().prop_map(|f| {
        let n = f.ambient_dim();
        let mut pairs: Vec<_> = f.members().iter().map(|m| (m.subspace.clone(), m.weight)).collect();
        pairs.push((Subspace::full(n), 0.7));
        WeightedSubspaceFamily::from_pairs(n, pairs).unwrap()
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn penrose_identities_hold(m in prop_oneof![matrices(1..=8), low_rank(2..=8)]) {
        let p = numerics::pinv(&m, RANK_TOL);
        let scale = numerics::operator_norm(&m).max(1.0);
        for r in numerics::penrose_residuals(&m, &p) {
            prop_assert!(r <= 1e-9 * scale, "residual {r}");
        }
        let range = numerics::projector(&numerics::range_basis(&m, RANK_TOL));
        prop_assert!(numerics::operator_norm(&(&m * &p - range)) <= 1e-9 * scale);
    }

    #[test]
    fn pinv_of_pinv_is_the_matrix(m in matrices(1..=6)) {
        let back = numerics::pinv(&numerics::pinv(&m, RANK_TOL), RANK_TOL);
        prop_assert!(numerics::operator_norm(&(back - &m)) <= 1e-8 * numerics::operator_norm(&m).max(1.0));
    }

    #[test]
    fn lower_bound_scales_inversely_with_k(family in families(), k in matrices(2..=5), c in 0.2..5.0f64) {
        let n = family.ambient_dim();
        let k = k.resize(n, n, Complex64::new(0.0, 0.0));
        prop_assume!(!numerics::is_zero(&k));
        let inst = KFusionInstance::new(family, k.clone()).unwrap();
        let base = kfusion::k_lower_bound(&inst).unwrap();
        let scaled = kfusion::k_lower_bound(&inst.with_operator(k.scale(c)).unwrap()).unwrap();
        if base == 0.0 {
            prop_assert_eq!(scaled, 0.0);
        } else {
            prop_assert!(rel_close(scaled, base / (c * c), 1e-8), "{scaled} vs {}", base / (c * c));
        }
    }

    #[test]
    fn identity_operator_gives_the_fusion_lower_bound(family in spanning_families()) {
        let n = family.ambient_dim();
        let fusion = frame::fusion_bounds(&family).unwrap();
        let inst = KFusionInstance::new(family, Matrix::identity(n, n)).unwrap();
        prop_assert!(rel_close(kfusion::k_lower_bound(&inst).unwrap(), fusion.lower, 1e-9));
    }

    #[test]
    fn fusion_frames_are_k_fusion_frames_for_every_k(family in spanning_families(), k in matrices(2..=5)) {
        let n = family.ambient_dim();
        let k = k.resize(n, n, Complex64::new(0.0, 0.0));
        let inst = KFusionInstance::new(family, k).unwrap();
        let verdict = kfusion::decide(&inst).unwrap();
        prop_assert!(verdict.is_k_fusion);
        prop_assert!(kfusion::douglas_membership(&inst, RANGE_TOL).unwrap());
    }

    #[test]
    fn weight_scaling_scales_bounds(family in spanning_families(), c in 0.3..3.0f64) {
        let n = family.ambient_dim();
        let scaled = WeightedSubspaceFamily::from_pairs(
            n,
            family.members().iter().map(|m| (m.subspace.clone(), m.weight * c)),
        )
        .unwrap();
        let (a, b) = (frame::fusion_bounds(&family).unwrap(), frame::fusion_bounds(&scaled).unwrap());
        prop_assert!(rel_close(b.lower, a.lower * c * c, 1e-9));
        prop_assert!(rel_close(b.upper, a.upper * c * c, 1e-9));
    }

    #[test]
    fn douglas_accepts_compositions(t in low_rank(2..=7), l in matrices(1..=7)) {
        let cols = l.ncols();
        let l = l.resize(t.ncols(), cols, Complex64::new(0.0, 0.0));
        let s = &t * l;
        let report = numerics::douglas_check(&s, &t, RANGE_TOL).unwrap();
        prop_assert!(report.range_included);
        let factor = report.factor.unwrap();
        prop_assert!(numerics::operator_norm(&(&t * factor - &s)) <= RANGE_TOL * numerics::operator_norm(&s).max(1.0));
        if let Some(alpha) = report.alpha {
            // S S* ⪯ α T T*.
            let gap = (&t * t.adjoint()).scale(alpha) - &s * s.adjoint();
            let min = numerics::hermitian_eigenvalues(&gap)[0];
            prop_assert!(min >= -1e-8 * numerics::operator_norm(&gap).max(1.0), "min eigenvalue {min}");
        }
    }

    #[test]
    fn max_psd_scale_is_the_boundary(family in spanning_families(), g in matrices(2..=5)) {
        let n = family.ambient_dim();
        let g = g.resize(n, n, Complex64::new(0.0, 0.0));
        let gg = &g * g.adjoint();
        prop_assume!(!numerics::is_zero(&gg));
        let s = frame::fusion_operator(&family);
        let a = numerics::max_psd_scale(&s, &gg).unwrap();
        let scale = numerics::operator_norm(&s);
        let at = numerics::hermitian_eigenvalues(&(&s - gg.scale(a)))[0];
        let beyond = numerics::hermitian_eigenvalues(&(&s - gg.scale(a * (1.0 + 1e-6))))[0];
        prop_assert!(at >= -1e-10 * scale, "at {at}");
        prop_assert!(beyond < 0.0, "beyond {beyond}");
    }

    #[test]
    fn drazin_of_invertible_is_inverse(m in square(2..=6)) {
        let inverse = m.clone().try_inverse();
        prop_assume!(inverse.is_some());
        let inverse = inverse.unwrap();
        prop_assume!(numerics::operator_norm(&inverse) * numerics::operator_norm(&m) < 1e6);
        let d = numerics::drazin(&m, numerics::DRAZIN_TOL).unwrap();
        prop_assert_eq!(d.index, 1);
        prop_assert!(numerics::operator_norm(&(d.inverse - &inverse)) <= 1e-8 * numerics::operator_norm(&inverse));
    }

    #[test]
    fn reconstruction_round_trips(family in spanning_families(), re in prop::collection::vec(-3.0..3.0f64, 6)) {
        let n = family.ambient_dim();
        let f = numerics::real_vector(&re[..n]);
        let measured = frame::fusion_analysis(&family, &f).unwrap();
        let back = frame::reconstruct(&family, &measured).unwrap();
        prop_assert!((back - &f).norm() <= 1e-10 * (1.0 + f.norm()));
    }
}
