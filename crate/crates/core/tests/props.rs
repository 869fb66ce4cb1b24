mod common;

use common::*;
use liftcount::arith::{binomial, extract_coefficient, int, multinomial, pow, ratio};
use liftcount::fo2::wfomc_fo2;
use liftcount::ground::wmc::{dpll, enumerate};
use liftcount::ground::{brute_wfomc, lineage_in, wfomc_direct, Circuit};
use liftcount::logic::normal::is_nnf;
use liftcount::logic::{nnf, parse, prenex, rectify, simplify, Formula, WeightedVocabulary};
use liftcount::Rational;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(a, b)| ratio(a, b))
}

fn weighted_signature(ws: &[(Rational, Rational)]) -> WeightedVocabulary {
    let mut v = WeightedVocabulary::new();
    for ((name, arity), (w, wbar)) in [("P", 0), ("U", 1), ("R", 2)].into_iter().zip(ws) {
        v.add(name, arity, w.clone(), wbar.clone()).unwrap();
    }
    v
}

fn compositions(n: u64, k: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if prefix.len() + 1 == k {
        prefix.push(n);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for a in 0..=n {
        prefix.push(a);
        compositions(n - a, k, prefix, out);
        prefix.pop();
    }
}

fn circuit(depth: u32) -> impl Strategy<Value = Circuit> {
    let leaf = prop_oneof![
        (0usize..8).prop_map(Circuit::Var),
        Just(Circuit::Const(true)),
        Just(Circuit::Const(false)),
    ];
    leaf.prop_recursive(depth, 40, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Circuit::not),
            prop::collection::vec(inner.clone(), 1..4).prop_map(Circuit::and),
            prop::collection::vec(inner.clone(), 1..4).prop_map(Circuit::or),
            (inner.clone(), inner).prop_map(|(a, b)| Circuit::iff(a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn render_then_parse(phi in formula_strategy()) {
        let text = phi.to_string();
        let back = parse(&text, &signature()).unwrap();
        prop_assert_eq!(back, phi);
    }

    #[test]
    fn binomial_symmetry_and_pascal(n in 0u64..60, k in 0u64..60) {
        prop_assume!(k <= n);
        prop_assert_eq!(binomial(n, k), binomial(n, n - k));
        if n > 0 && k > 0 {
            prop_assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
        }
    }

    #[test]
    fn multinomials_sum_to_power(n in 0u64..8, k in 1usize..5) {
        let mut all = Vec::new();
        compositions(n, k, &mut Vec::new(), &mut all);
        let total: BigUint = all.iter().map(|p| multinomial(n, p).unwrap()).sum();
        prop_assert_eq!(total, BigUint::from(k as u64).pow(n as u32));
    }

    #[test]
    fn interpolation_recovers_coefficients(coeffs in prop::collection::vec(-20i64..=20, 1..=31)) {
        let d = coeffs.len() - 1;
        let poly = |z: &Rational| {
            coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * z + int(*c))
        };
        for target in [0, d / 2, d] {
            prop_assert_eq!(extract_coefficient(poly, d, target), int(coeffs[target]));
        }
        prop_assert_eq!(extract_coefficient(poly, d + 2, d + 1), Rational::zero());
    }

    #[test]
    fn dpll_agrees_with_enumeration(
        c in circuit(4),
        ws in prop::collection::vec((rational(), rational()), 8),
    ) {
        prop_assert_eq!(dpll(&c, &ws), enumerate(&c, &ws));
    }

    #[test]
    fn wmc_of_negation_is_the_complement(
        c in circuit(4),
        ws in prop::collection::vec((rational(), rational()), 8),
    ) {
        let all = ws.iter().fold(Rational::one(), |acc, (w, wb)| acc * (w + wb));
        let neg = Circuit::not(c.clone());
        prop_assert_eq!(enumerate(&c, &ws) + enumerate(&neg, &ws), all);
    }

    #[test]
    fn normal_forms_preserve_counts(
        phi in formula_strategy(),
        ws in prop::collection::vec((rational(), rational()), 3),
        n in 0usize..=2,
    ) {
        let phi = close(phi);
        let v = weighted_signature(&ws);
        let config = oracle();
        let want = brute_wfomc(&phi, n, &v, &config).unwrap();
        let n_f = nnf(&phi);
        prop_assert!(is_nnf(&n_f));
        prop_assert_eq!(brute_wfomc(&n_f, n, &v, &config).unwrap(), want.clone());
        prop_assert_eq!(brute_wfomc(&simplify(&phi), n, &v, &config).unwrap(), want.clone());
        prop_assert_eq!(brute_wfomc(&rectify(&phi), n, &v, &config).unwrap(), want.clone());
        if n >= 1 {
            let p = prenex(&phi).to_formula();
            prop_assert!(p.is_sentence());
            prop_assert_eq!(brute_wfomc(&p, n, &v, &config).unwrap(), want);
        }
    }

    #[test]
    fn structure_enumeration_matches_lineage(
        phi in formula_strategy(),
        ws in prop::collection::vec((rational(), rational()), 3),
        n in 0usize..=2,
    ) {
        let phi = close(phi);
        let v = weighted_signature(&ws);
        let g = lineage_in(&phi, n, &v).unwrap();
        prop_assert!(g.vars().len() <= g.universe.len());
        prop_assert_eq!(
            wfomc_direct(&phi, n, &v, &oracle()).unwrap(),
            brute_wfomc(&phi, n, &v, &oracle()).unwrap()
        );
    }

    #[test]
    fn unary_sentences_factor(w in rational(), wbar in rational(), n in 0usize..=12) {
        // forall x. U(x) | V(x): each element independently avoids !U & !V
        let mut v = WeightedVocabulary::new();
        v.add("U", 1, w.clone(), wbar.clone()).unwrap();
        v.add("V", 1, wbar.clone(), w.clone()).unwrap();
        let phi = parse("forall x. U(x) | V(x)", &v).unwrap();
        let per = (&w + &wbar) * (&wbar + &w) - &wbar * &w;
        prop_assert_eq!(wfomc_fo2(&phi, n, &v).unwrap(), pow(&per, n as u64));
    }
}

#[test]
fn empty_and_full_sentences() {
    let v = weighted_signature(&[(int(2), int(1)), (int(3), ratio(1, 2)), (int(1), int(-1))]);
    for n in 0..=3 {
        let all = pow(&int(3), 1) * pow(&ratio(7, 2), n as u64) * pow(&int(0), (n * n) as u64);
        assert_eq!(brute_wfomc(&Formula::True, n, &v, &oracle()).unwrap(), all);
        assert_eq!(brute_wfomc(&Formula::False, n, &v, &oracle()).unwrap(), Rational::zero());
    }
}
