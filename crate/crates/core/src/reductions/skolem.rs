//! Weighted Skolemization.
//!
//! `forall xs. exists y. phi(xs, y)` becomes
//! `forall xs. forall y. (!phi(xs, y) | A(xs))` with `A` weighted `(1, -1)`.
//! For a fixed `xs`, `A(xs) = true` contributes the total weight and
//! `A(xs) = false` subtracts the worlds where no `y` works.

use num_traits::One;

use super::fresh::FreshNames;
use super::{Role, TransformResult};
use crate::arith::{int, Rational};
use crate::error::{Error, Result};
use crate::logic::formula::{self as f, Formula, Quantifier};
use crate::logic::normal::{nnf, prenex, simplify, Prenex};
use crate::logic::WeightedVocabulary;

pub fn skolemize(phi: &Formula, vocab: &WeightedVocabulary) -> Result<TransformResult> {
    let mut names = FreshNames::new(vocab, [phi]);
    skolemize_with(phi, vocab, &mut names)
}

pub(crate) fn skolemize_with(
    phi: &Formula,
    vocab: &WeightedVocabulary,
    names: &mut FreshNames,
) -> Result<TransformResult> {
    let free = phi.free_vars();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free.into_iter().collect()));
    }
    let mut vocab = vocab.clone();
    vocab.extend_unit(&phi.relations())?;
    let mut introduced = Vec::new();
    let mut p = prenex(phi);
    while let Some(i) = p.prefix.iter().position(|(q, _)| *q == Quantifier::Exists) {
        let xs: Vec<String> = p.prefix[..i].iter().map(|(_, v)| v.clone()).collect();
        let y = p.prefix[i].1.clone();
        let rest = Prenex {
            prefix: p.prefix[i + 1..].to_vec(),
            matrix: p.matrix.clone(),
        };
        let a = names.declare(
            "A",
            xs.len(),
            Rational::one(),
            int(-1),
            Role::Skolem,
            &mut vocab,
            &mut introduced,
        )?;
        // !(Q rest. M) == dual(Q) rest. !M
        let mut prefix = p.prefix[..i].to_vec();
        prefix.push((Quantifier::Forall, y));
        prefix.extend(rest.prefix.iter().map(|(q, v)| (q.dual(), v.clone())));
        let matrix = simplify(&f::or(nnf(&f::not(rest.matrix)), f::atom(&a, xs)));
        p = Prenex { prefix, matrix };
    }
    Ok(TransformResult {
        formula: p.to_formula(),
        vocab,
        introduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{brute_wfomc, OracleConfig};
    use crate::logic::parse_inferring;

    fn setup(text: &str) -> (Formula, WeightedVocabulary) {
        let (f, syms) = parse_inferring(text).unwrap();
        (f, WeightedVocabulary::unit(syms).unwrap())
    }

    #[test]
    fn forall_exists() {
        let (phi, v) = setup("forall x. exists y. R(x,y)");
        let out = skolemize(&phi, &v).unwrap();
        assert_eq!(out.formula, parse_inferring("forall x,y. !R(x,y) | A1(x)").unwrap().0);
        let a = out.vocab.get("A1").unwrap();
        assert_eq!((a.w.clone(), a.wbar.clone()), (int(1), int(-1)));
        let cfg = OracleConfig::default();
        for n in 0..4 {
            assert_eq!(
                brute_wfomc(&phi, n, &v, &cfg).unwrap(),
                brute_wfomc(&out.formula, n, &out.vocab, &cfg).unwrap()
            );
        }
        assert_eq!(brute_wfomc(&out.formula, 2, &out.vocab, &cfg).unwrap(), int(9));
    }

    #[test]
    fn universal_input_unchanged() {
        let (phi, v) = setup("forall x. R(x)");
        let out = skolemize(&phi, &v).unwrap();
        assert_eq!(out.formula, phi);
        assert!(out.introduced.is_empty());
    }

    #[test]
    fn alternating_prefix() {
        let (phi, v) = setup("exists x. forall y. exists z. R(x,y) | S(y,z)");
        let out = skolemize(&phi, &v).unwrap();
        assert!(prenex(&out.formula).is_universal());
        let cfg = OracleConfig::with_cap(40);
        for n in 0..3 {
            assert_eq!(
                brute_wfomc(&phi, n, &v, &cfg).unwrap(),
                brute_wfomc(&out.formula, n, &out.vocab, &cfg).unwrap(),
                "n = {n}"
            );
        }
    }
}
