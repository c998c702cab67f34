use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spinr_core::curvature::{constant_curvature, random_curvature, SymTensor2};
use spinr_core::expr::ast::{Expr, Factor, Term};
use spinr_core::expr::{check_identity, evaluate, evaluate_with, parse, ContractionOrder, Environment};
use spinr_core::models::tautological_spin_n;
use spinr_core::spinlab::SpinorForm;
use spinr_core::verify::{lemma31_sides, ricci_identity_symbol};
use spinr_core::{build_twisted_rep, qk_model};

const LEMMA_LHS: &str = "T[k,l,i,j] e[k] e[l] e[i] psi";
const LEMMA_RHS: &str = "-T[k,k,i,j] e[i] psi - 2 h[a,p] R[a,i,j,p] e[i] psi + Ric[i,a] h[a,j] e[i] psi \
                         - 0.5 h[i,p] Theta[p,j,k,l] e[i] f[k] f[l] psi";

// the Bochner-type identity written out in index notation, evaluated by the
// contraction engine instead of the hand-assembled sides
#[test]
fn lemma_as_strings_matches_module() {
    let n = 4;
    for seed in 0..3 {
        let datum = tautological_spin_n(n, random_curvature(n, seed).unwrap(), Some(seed)).unwrap();
        let h = SymTensor2::random(n, &mut ChaCha8Rng::seed_from_u64(seed + 10));
        let t = ricci_identity_symbol(&datum.curvature, &h, seed).unwrap();
        let mut env = Environment::from_datum(&datum).unwrap();
        env.bind_h(&h).unwrap();
        env.bind_t(&t).unwrap();
        let (lhs, rhs) = (parse(LEMMA_LHS).unwrap(), parse(LEMMA_RHS).unwrap());
        let report = check_identity("lemma", &lhs, &rhs, &env, 1e-11).unwrap();
        assert!(report.pass, "{report:?}");

        let sides = lemma31_sides(&datum, &h, &t).unwrap();
        for (value, module) in [(evaluate(&lhs, &env).unwrap(), &sides.lhs), (evaluate(&rhs, &env).unwrap(), &sides.rhs)] {
            assert_eq!(value.indices, ["j"]);
            let mut worst = 0.0_f64;
            for j in 0..n {
                let got = value.entry(&[j]);
                let want = module.components[j].as_slice();
                for (a, b) in got.iter().zip(want) {
                    worst = worst.max((a - b).norm());
                }
            }
            assert!(worst < 1e-12 * (1.0 + SpinorForm::norm(module)), "{worst}");
        }
    }
}

#[test]
fn dropping_the_theta_term_breaks_the_lemma() {
    let n = 4;
    let datum = tautological_spin_n(n, random_curvature(n, 4).unwrap(), Some(4)).unwrap();
    let h = SymTensor2::random(n, &mut ChaCha8Rng::seed_from_u64(1));
    let mut env = Environment::from_datum(&datum).unwrap();
    env.bind_h(&h).unwrap();
    env.bind_t(&ricci_identity_symbol(&datum.curvature, &h, 2).unwrap()).unwrap();
    let rhs = parse("-T[k,k,i,j] e[i] psi - 2 h[a,p] R[a,i,j,p] e[i] psi + Ric[i,a] h[a,j] e[i] psi").unwrap();
    let report = check_identity("truncated", &parse(LEMMA_LHS).unwrap(), &rhs, &env, 1e-9).unwrap();
    assert!(!report.pass);
}

#[test]
fn ring_action_and_einstein_constant() {
    // constant curvature κ: (R̊h)_kj = h_ip R_ikjp = κ(tr h δ_kj − h_kj)
    let n = 5;
    let mut env = Environment::new(n);
    env.bind_curvature(&constant_curvature(n, 2.0).unwrap()).unwrap();
    env.bind_h(&SymTensor2::random(n, &mut ChaCha8Rng::seed_from_u64(3))).unwrap();
    let lhs = parse("h[i,p] R[i,k,j,p]").unwrap();
    let rhs = parse("2 h[i,i] delta[k,j] - 2 h[k,j]").unwrap();
    assert!(check_identity("ring", &lhs, &rhs, &env, 1e-13).unwrap().pass);

    let mut env = Environment::new(12);
    env.bind_curvature(&qk_model(3, -1).unwrap().curvature).unwrap();
    let r = check_identity("einstein", &parse("Ric[i,j]").unwrap(), &parse("-5 delta[i,j]").unwrap(), &env, 1e-13);
    assert!(r.unwrap().pass);
}

fn env5() -> Environment {
    let mut env = Environment::new(5);
    env.bind_rep(&build_twisted_rep(5, 0, 1).unwrap()).unwrap();
    env.bind_curvature(&random_curvature(5, 21).unwrap()).unwrap();
    env.bind_h(&SymTensor2::random(5, &mut ChaCha8Rng::seed_from_u64(4))).unwrap();
    env
}

fn tensor(name: &str, idx: &[&str]) -> Factor {
    Factor::Tensor { name: name.into(), indices: idx.iter().map(|s| s.to_string()).collect() }
}

// well-formed terms with free set {i, j}
fn term() -> impl Strategy<Value = Term> {
    let coeff = prop_oneof![Just(None), (0i32..5).prop_map(|c| Some(Factor::Number(f64::from(c) / 2.0)))];
    let body = prop_oneof![
        Just(vec![tensor("Ric", &["i", "j"])]),
        Just(vec![tensor("R", &["i", "k", "k", "j"])]),
        Just(vec![tensor("h", &["i", "a"]), tensor("Ric", &["a", "j"])]),
        Just(vec![tensor("R", &["i", "a", "b", "j"]), tensor("h", &["a", "b"])]),
        Just(vec![tensor("e", &["i"]), tensor("e", &["j"])]),
        Just(vec![tensor("h", &["a", "a"]), tensor("e", &["j"]), tensor("e", &["i"])]),
        Just(vec![tensor("R", &["a", "b", "i", "j"]), tensor("e", &["a"]), tensor("e", &["b"])]),
        Just(vec![tensor("delta", &["i", "j"]), Factor::Name("scal".into())]),
    ];
    (any::<bool>(), coeff, body).prop_map(|(negative, c, mut factors)| {
        if let Some(c) = c {
            factors.insert(0, c);
        }
        Term { negative, factors }
    })
}

fn expression() -> impl Strategy<Value = Expr> {
    prop::collection::vec(term(), 1..5).prop_flat_map(|terms| {
        let grouped = Expr { terms: terms.clone() };
        prop_oneof![
            Just(Expr { terms: terms.clone() }),
            Just(Expr {
                terms: vec![Term { negative: false, factors: vec![Factor::Group(Box::new(grouped.clone()))] }]
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn print_parse_roundtrip(e in expression()) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(back.to_string(), printed);
        prop_assert_eq!(back, e);
    }

    #[test]
    fn contraction_order_is_irrelevant(e in expression()) {
        let env = env5();
        let a = evaluate_with(&e, &env, ContractionOrder::Greedy).unwrap();
        let b = evaluate_with(&e, &env, ContractionOrder::LeftToRight).unwrap();
        let d = a.difference(&b).unwrap().max_norm();
        prop_assert!(d <= 1e-12 * (1.0 + a.max_norm()), "{}", d);
    }

    #[test]
    fn sum_is_linear(e in expression(), f in expression()) {
        // (e) + (f) evaluates to the sum of the parts
        let env = env5();
        let joined = parse(&format!("({e}) + ({f})")).unwrap();
        let whole = evaluate(&joined, &env).unwrap();
        let parts = evaluate(&e, &env).unwrap();
        let other = evaluate(&f, &env).unwrap();
        let resid = whole.difference(&parts).unwrap().difference(&other).unwrap().max_norm();
        prop_assert!(resid <= 1e-12 * (1.0 + whole.max_norm()));
        let zero = evaluate(&parse(&format!("({f}) - ({f})")).unwrap(), &env).unwrap();
        prop_assert_eq!(zero.max_norm(), 0.0);
    }
}
