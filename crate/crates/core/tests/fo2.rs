mod common;

use common::*;
use liftcount::arith::{binomial, int, pow, ratio};
use liftcount::fo2::wfomc_fo2;
use liftcount::ground::brute_wfomc;
use liftcount::logic::{parse, WeightedVocabulary};
use liftcount::special::ClosedForm;
use liftcount::Rational;
use num_traits::Zero;
use rand::seq::SliceRandom;

fn c(n: u64, k: u64) -> Rational {
    Rational::from_integer(binomial(n, k).into())
}

fn vocab(rels: &[(&str, usize, Rational, Rational)]) -> WeightedVocabulary {
    let mut v = WeightedVocabulary::new();
    for (name, arity, w, wbar) in rels {
        v.add(*name, *arity, w.clone(), wbar.clone()).unwrap();
    }
    v
}

/// Inclusion-exclusion over the rows of `R` left empty.
fn forall_exists_oracle(n: u64, w: &Rational, wbar: &Rational) -> Rational {
    let mut s = Rational::zero();
    for k in 0..=n {
        let term = c(n, k) * pow(&pow(wbar, n), k) * pow(&(w + wbar), n * (n - k));
        if k % 2 == 0 {
            s += term;
        } else {
            s -= term;
        }
    }
    s
}

/// Conditions on the `y` with `!T(y)`; the rows of `x` are then independent.
fn clause_oracle(n: u64, v: &WeightedVocabulary) -> Rational {
    let g = |name: &str| {
        let r = v.get(name).unwrap();
        (r.w.clone(), r.wbar.clone())
    };
    let ((wr, wbr), (ws, wbs), (wt, wbt)) = (g("R"), g("S"), g("T"));
    let cs = &ws + &wbs;
    let mut total = Rational::zero();
    for m in 0..=n {
        let row = &wr * pow(&cs, n) + &wbr * pow(&ws, m) * pow(&cs, n - m);
        total += c(n, m) * pow(&wt, n - m) * pow(&wbt, m) * pow(&row, n);
    }
    total
}

#[test]
fn forall_exists_up_to_thirty() {
    for (w, wbar) in [(int(1), int(1)), (int(2), ratio(-1, 3)), (ratio(1, 2), int(3))] {
        let v = vocab(&[("R", 2, w.clone(), wbar.clone())]);
        let phi = parse("forall x. exists y. R(x,y)", &v).unwrap();
        for n in 0..=30u64 {
            let got = wfomc_fo2(&phi, n as usize, &v).unwrap();
            assert_eq!(got, forall_exists_oracle(n, &w, &wbar), "n = {n}");
            assert_eq!(got, ClosedForm::ForallExistsR.evaluate(n, &v), "n = {n}");
        }
    }
}

#[test]
fn exists_with_negative_weight() {
    let (w, wbar) = (int(3), int(-2));
    let v = vocab(&[("S", 1, w.clone(), wbar.clone())]);
    let phi = parse("exists x. S(x)", &v).unwrap();
    for n in 0..=30u64 {
        let want: Rational = (1..=n).map(|k| c(n, k) * pow(&w, k) * pow(&wbar, n - k)).sum();
        assert_eq!(wfomc_fo2(&phi, n as usize, &v).unwrap(), want, "n = {n}");
        assert_eq!(ClosedForm::ExistsS.evaluate(n, &v), want, "n = {n}");
    }
}

#[test]
fn clause_with_random_weights() {
    let mut rng = rng(15);
    let choices = weight_choices();
    let phi_text = "forall x,y. R(x) | S(x,y) | T(y)";
    for setting in 0..5 {
        let mut rels = Vec::new();
        for (name, arity) in [("R", 1), ("S", 2), ("T", 1)] {
            let w = choices.choose(&mut rng).unwrap().clone();
            let wbar = choices.choose(&mut rng).unwrap().clone();
            rels.push((name, arity, w, wbar));
        }
        let v = vocab(&rels);
        let phi = parse(phi_text, &v).unwrap();
        for n in 0..=15u64 {
            let got = wfomc_fo2(&phi, n as usize, &v).unwrap();
            assert_eq!(got, clause_oracle(n, &v), "setting {setting}, n = {n}");
            assert_eq!(got, ClosedForm::Table1Wfomc.evaluate(n, &v), "setting {setting}, n = {n}");
            if n <= 2 {
                assert_eq!(got, brute_wfomc(&phi, n as usize, &v, &oracle()).unwrap());
            }
        }
    }
    let unit = vocab(&[("R", 1, int(1), int(1)), ("S", 2, int(1), int(1)), ("T", 1, int(1), int(1))]);
    let phi = parse(phi_text, &unit).unwrap();
    for n in 0..=15u64 {
        assert_eq!(wfomc_fo2(&phi, n as usize, &unit).unwrap(), ClosedForm::Table1Fomc.evaluate(n, &unit));
    }
}

#[test]
fn binary_only_sentences() {
    let (w, wbar) = (int(2), ratio(1, 2));
    let v = vocab(&[("R", 2, w.clone(), wbar.clone())]);
    let symmetric = parse("forall x,y. R(x,y) -> R(y,x)", &v).unwrap();
    let diagonal = parse("forall x,y. R(x,y) -> x = y", &v).unwrap();
    let irreflexive = parse("forall x. !R(x,x)", &v).unwrap();
    let free = &w + &wbar;
    for n in 0..=12u64 {
        let pairs = n * n.saturating_sub(1) / 2;
        assert_eq!(
            wfomc_fo2(&symmetric, n as usize, &v).unwrap(),
            pow(&free, n) * pow(&(&w * &w + &wbar * &wbar), pairs)
        );
        assert_eq!(
            wfomc_fo2(&diagonal, n as usize, &v).unwrap(),
            pow(&free, n) * pow(&wbar, 2 * pairs)
        );
        assert_eq!(
            wfomc_fo2(&irreflexive, n as usize, &v).unwrap(),
            pow(&wbar, n) * pow(&free, 2 * pairs)
        );
    }
}

#[test]
fn random_sentences_at_larger_domains() {
    // cross-checks n = 4 where the ground oracle still fits
    let mut rng = rng(21);
    let mut checked = 0;
    for _ in 0..60 {
        let (phi, v) = random_fo2(&mut rng, false);
        if v.relations().iter().any(|r| r.symbol.arity == 2) && v.len() > 1 {
            continue;
        }
        assert_eq!(
            wfomc_fo2(&phi, 4, &v).unwrap(),
            brute_wfomc(&phi, 4, &v, &oracle()).unwrap(),
            "{phi}"
        );
        checked += 1;
    }
    assert!(checked >= 20, "{checked}");
}
