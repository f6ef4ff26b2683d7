//! Generated constants checked against the hypotheses on probes drawn here,
//! independently of the checker's probe grid.

use framekit::frame::WeightedSubspaceFamily;
use framekit::instances::{self, GenSpec, Scenario};
use framekit::numerics::{Matrix, Vector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const PROBES: usize = 300;
const SLACK: f64 = 1e-10;

fn probes(n: usize, complex: bool, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
    let mut out: Vec<Vector> = (0..n)
        .map(|i| Vector::from_fn(n, |j, _| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)))
        .collect();
    out.extend((0..PROBES).map(|_| {
        let v = Vector::from_fn(n, |_, _| {
            let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
            Complex64::new(rng.random_range(-1.0..1.0), im)
        });
        let norm = v.norm();
        v.unscale(norm)
    }));
    out
}

/// `w·B B* f` for an orthonormal basis `B`.
fn weighted_projection(basis: &Matrix, weight: f64, f: &Vector) -> Vector {
    (basis * (basis.adjoint() * f)).scale(weight)
}

fn analysis_norm(family: &WeightedSubspaceFamily, f: &Vector) -> f64 {
    family
        .members()
        .iter()
        .map(|m| weighted_projection(m.subspace.basis(), m.weight, f).norm_squared())
        .sum::<f64>()
        .sqrt()
}

fn specs(scenario: Scenario) -> impl Iterator<Item = GenSpec> {
    (0..24u64).map(move |i| {
        let dim = 2 + (i as usize % 7);
        let spec = GenSpec {
            n_members: dim + (i as usize % 3),
            max_subspace_dim: 1 + (i as usize / 2) % dim,
            ..GenSpec::new(1000 + i, dim, scenario)
        };
        if i % 2 == 1 { spec.complex() } else { spec }
    })
}

#[test]
fn operator_pair_constants_hold() {
    for scenario in [Scenario::Scale, Scenario::Additive, Scenario::IdentityTarget] {
        for spec in specs(scenario) {
            let (k1, k2, c) = instances::gen_operator_pair(&spec).unwrap();
            let (k1s, k2s) = (k1.adjoint(), k2.adjoint());
            let diff = &k1s - &k2s;
            for f in probes(spec.dim, spec.scalar.is_complex(), spec.seed) {
                let lhs = (&diff * &f).norm();
                let rhs = c.a * (&k1s * &f).norm() + c.b * (&k2s * &f).norm();
                assert!(lhs <= rhs + SLACK, "{scenario:?} seed {}: {lhs} > {rhs}", spec.seed);
            }
        }
    }
}

#[test]
fn perturbed_pair_constants_hold() {
    for scenario in [Scenario::Identical, Scenario::WeightShift, Scenario::Rotation] {
        for spec in specs(scenario) {
            let pair = instances::gen_perturbed_pair(&spec).unwrap();
            let c = pair.constants;
            let kks = &pair.k * pair.k.adjoint();
            for f in probes(spec.dim, spec.scalar.is_complex(), spec.seed) {
                let mut diff_sq = 0.0;
                let mut quad = 0.0;
                for (mw, mv) in pair.original.members().iter().zip(pair.perturbed.members()) {
                    let pw = weighted_projection(mw.subspace.basis(), mw.weight, &f);
                    let pv = weighted_projection(mv.subspace.basis(), mv.weight, &f);
                    diff_sq += (&pw - &pv).norm_squared();
                    quad += (pw.norm_squared() - pv.norm_squared()).abs();
                }
                let lhs = diff_sq.sqrt();
                let rhs = c.a * analysis_norm(&pair.original, &f) + c.b * analysis_norm(&pair.perturbed, &f);
                assert!(lhs <= rhs + SLACK, "{scenario:?} seed {}: {lhs} > {rhs}", spec.seed);
                if let Some(r) = pair.r {
                    let bound = r * f.dotc(&(&kks * &f)).re;
                    assert!(quad <= bound + SLACK, "{scenario:?} seed {}: {quad} > {bound}", spec.seed);
                }
            }
        }
    }
}
