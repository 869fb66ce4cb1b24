mod common;

use common::*;
use liftcount::arith::{int, pow, ratio};
use liftcount::fo2::wfomc_fo2;
use liftcount::ground::{brute_wfomc, OracleConfig};
use liftcount::logic::{parse_inferring, WeightedVocabulary};
use liftcount::reductions::mln::{mln_direct, mln_probability, mln_reduce, MlnModel};
use liftcount::{Error, Rational};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

/// `Pr(exists x. Male(x))` in the spouse model by looping over worlds.
fn spouse_oracle(n: usize, w: &Rational) -> Rational {
    let pairs = n * n;
    let mut total = Rational::zero();
    let mut hit = Rational::zero();
    for spouse in 0u32..1 << pairs {
        for female in 0u32..1 << n {
            for male in 0u32..1 << n {
                let mut sat = 0u64;
                for x in 0..n {
                    for y in 0..n {
                        let body = spouse >> (x * n + y) & 1 == 1 && female >> x & 1 == 1;
                        if !body || male >> y & 1 == 1 {
                            sat += 1;
                        }
                    }
                }
                let weight = pow(w, sat);
                if male != 0 {
                    hit += &weight;
                }
                total += weight;
            }
        }
    }
    hit / total
}

#[test]
fn spouse_model() {
    let text = "3 :: Spouse(x,y) & Female(x) -> Male(y)";
    let (m, syms) = MlnModel::parse(text).unwrap();
    let v = WeightedVocabulary::unit(syms).unwrap();
    let query = parse_inferring("exists x. Male(x)").unwrap().0;
    let cfg = OracleConfig::with_cap(32);
    let out = mln_reduce(&m, &v).unwrap();
    assert_eq!(out.vocab.get(&out.introduced[0].symbol.name).unwrap().w, ratio(1, 2));
    for n in 1..=2 {
        let want = spouse_oracle(n, &int(3));
        assert_eq!(mln_direct(&m, &query, n, &v, &cfg).unwrap(), want);
        assert_eq!(mln_probability(&m, &query, &v, |f, v| brute_wfomc(f, n, v, &cfg)).unwrap(), want);
        assert_eq!(mln_probability(&m, &query, &v, |f, v| wfomc_fo2(f, n, v)).unwrap(), want);
    }
    let lifted = mln_probability(&m, &query, &v, |f, v| wfomc_fo2(f, 3, v)).unwrap();
    assert_eq!(lifted, mln_direct(&m, &query, 3, &v, &cfg).unwrap());
}

#[test]
fn soft_weight_one_half() {
    let (m, syms) = MlnModel::parse("1/2 :: R(x) -> S(x)").unwrap();
    let v = WeightedVocabulary::unit(syms).unwrap();
    let out = mln_reduce(&m, &v).unwrap();
    assert_eq!(out.vocab.get(&out.introduced[0].symbol.name).unwrap().w, int(-2));
    let query = parse_inferring("exists x. R(x)").unwrap().0;
    let cfg = OracleConfig::default();
    for n in 1..=3 {
        // per element the three satisfying worlds weigh 1/2 and R & !S
        // weighs 1; the two worlds without R weigh 1/2 each
        let p = Rational::one() - pow(&ratio(2, 5), n as u64);
        assert_eq!(mln_direct(&m, &query, n, &v, &cfg).unwrap(), p, "n = {n}");
        assert_eq!(mln_probability(&m, &query, &v, |f, v| wfomc_fo2(f, n, v)).unwrap(), p);
    }
}

#[test]
fn weight_one_is_rejected() {
    let (m, syms) = MlnModel::parse("1 :: R(x)").unwrap();
    let v = WeightedVocabulary::unit(syms).unwrap();
    assert!(matches!(mln_reduce(&m, &v), Err(Error::VacuousSoftConstraint(_))));
}

#[test]
fn random_models_agree() {
    let mut rng = rng(40);
    let bodies = [
        "R(x) -> S(x)",
        "R(x) & S(y) -> E(x,y)",
        "E(x,y) -> E(y,x)",
        "R(x) | E(x,x)",
        "!S(x) | R(x)",
        "E(x,y) & R(y)",
    ];
    let weights = [int(2), int(3), ratio(1, 3), ratio(5, 2), int(-1)];
    let cfg = OracleConfig::with_cap(24);
    for _ in 0..12 {
        let k = rng.gen_range(1..=3);
        let mut text = String::new();
        for _ in 0..k {
            let w = weights.choose(&mut rng).unwrap();
            let b = bodies.choose(&mut rng).unwrap();
            text.push_str(&format!("{w} :: {b}\n"));
        }
        if rng.gen_bool(0.3) {
            text.push_str("inf :: exists y. E(x,y) | R(x)\n");
        }
        let (m, syms) = MlnModel::parse(&text).unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        let query = parse_inferring("exists x. R(x) & S(x)").unwrap().0;
        for n in 1..=2 {
            let direct = match mln_direct(&m, &query, n, &v, &cfg) {
                Ok(p) => p,
                Err(Error::InconsistentMln) => continue,
                Err(e) => panic!("{e}"),
            };
            let lifted = mln_probability(&m, &query, &v, |f, v| wfomc_fo2(f, n, v)).unwrap();
            assert_eq!(lifted, direct, "{text} at n = {n}");
        }
    }
}
