use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spinr_core::curvature::{random_curvature, SymTensor2};
use spinr_core::models::{flat_datum, qk_spinor, tautological_spin_n};
use spinr_core::spinlab::{phi_map, GeometricDatum};
use spinr_core::verify::{
    corollary32_rhs, herrera_ratio_check, lemma31_check, norm_formula, norm_formula_check, ricci_identity_symbol,
};
use spinr_core::{Error, Spinor};

fn taut(seed: u64) -> GeometricDatum {
    tautological_spin_n(4, random_curvature(4, seed).unwrap(), Some(seed)).unwrap()
}

#[test]
fn corollary_bound_is_quadratic_in_h() {
    for d in [taut(2), qk_spinor(1, -1).unwrap(), qk_spinor(2, 1).unwrap()] {
        let h = SymTensor2::random(d.n(), &mut ChaCha8Rng::seed_from_u64(9));
        let a = corollary32_rhs(&d, &h).unwrap();
        let b = corollary32_rhs(&d, &h.scaled(2.0)).unwrap();
        assert!((b - 4.0 * a).abs() <= 1e-12 * b.abs().max(1.0), "{a} {b}");
    }
}

#[test]
fn lemma_check_refuses_non_parallel_data() {
    // a random spinor with nonzero curvature and Θ = 0 violates the constraint
    let mut d = flat_datum(4, 2, 1).unwrap();
    d.curvature = random_curvature(4, 1).unwrap();
    let h = SymTensor2::identity(4);
    let t = ricci_identity_symbol(&d.curvature, &h, 0).unwrap();
    assert!(matches!(lemma31_check(&d, &h, &t, 1e-9), Err(Error::InconsistentDatum(_))));
}

#[test]
fn herrera_coefficient_is_odd_in_the_sign() {
    let minus = herrera_ratio_check(&qk_spinor(2, -1).unwrap(), 1e-8).unwrap();
    let plus = herrera_ratio_check(&qk_spinor(2, 1).unwrap(), 1e-8).unwrap();
    assert!(minus.pass && plus.pass, "{minus:?} {plus:?}");
    assert!((minus.values["lambda"] + plus.values["lambda"]).abs() < 1e-10);
    assert!(minus.values["lambda"] > 0.0);
}

#[test]
fn norm_formula_values() {
    // r(r-1)/(n/4 + 2r - 4)
    assert_eq!(norm_formula(12, 3), 6.0 / 5.0);
    assert_eq!(norm_formula(16, 3), 1.0);
    // measured |ψ′|² sits at half the formula for every quaternionic dimension built
    for (m, want) in [(1, 1.0), (2, 0.75), (3, 0.6)] {
        let r = norm_formula_check(&qk_spinor(m, -1).unwrap(), 1e-9).unwrap();
        assert!((r.values["measured"] - want).abs() < 1e-9, "m = {m}: {r:?}");
        assert!((r.values["ratio"] - 0.5).abs() < 1e-9);
        assert!(!r.pass);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn phi_is_an_isometry(seed in any::<u64>(), n in 2usize..7, r in 0usize..4) {
        // odd n only without auxiliary generators
        let r = if n % 2 == 1 { 0 } else { r };
        let d = flat_datum(n, r, seed).unwrap();
        let h = SymTensor2::random(n, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        let phi = phi_map(&d.rep, &d.psi, h.matrix()).unwrap();
        prop_assert!((phi.norm_sq() - h.norm_sq()).abs() <= 1e-12 * h.norm_sq());
    }

    #[test]
    fn lemma_residual_ignores_symmetric_part(seed in 0u64..1000, s1 in any::<u64>(), s2 in any::<u64>()) {
        let d = taut(seed % 7);
        let h = SymTensor2::random(4, &mut ChaCha8Rng::seed_from_u64(seed));
        let a = lemma31_check(&d, &h, &ricci_identity_symbol(&d.curvature, &h, s1).unwrap(), 1e-9).unwrap();
        let b = lemma31_check(&d, &h, &ricci_identity_symbol(&d.curvature, &h, s2).unwrap(), 1e-9).unwrap();
        prop_assert!(a.pass && b.pass);
        prop_assert!((a.residuals["relative"] - b.residuals["relative"]).abs() < 1e-12);
    }

    #[test]
    fn ricci_symbol_invariants(seed in any::<u64>(), n in 2usize..7) {
        let r = random_curvature(n, seed).unwrap();
        let h = SymTensor2::random(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let t = ricci_identity_symbol(&r, &h, seed).unwrap();
        prop_assert!(t.symmetry_residual() <= 1e-14);
        prop_assert!(t.ricci_identity_residual(&r, &h) <= 1e-14 * (1.0 + r.max_abs() * h.norm_sq().sqrt()));
        prop_assert_eq!(ricci_identity_symbol(&r, &h, seed).unwrap(), t);
    }

    #[test]
    fn unit_spinors_stay_unit(seed in any::<u64>(), dim in 1usize..64) {
        let s = Spinor::random_unit(dim, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!((s.norm_sq() - 1.0).abs() < 1e-14);
    }
}
