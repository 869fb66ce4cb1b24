//! Negation removal for universal sentences.
//!
//! Each negated subformula `!psi(xs)` is replaced by a fresh `A(xs)` and
//! `forall xs. (psi | A) & (A | B) & (psi | B)` is conjoined, with `A`
//! weighted `(1, 1)` and `B` weighted `(1, -1)`. When `psi` holds the pairs
//! with `A` true cancel; when it fails `A` and `B` are forced true.

use std::collections::BTreeMap;

use num_traits::One;

use super::fresh::FreshNames;
use super::{Role, TransformResult};
use crate::arith::{int, Rational};
use crate::error::{Error, Result};
use crate::logic::formula::{self as f, Formula};
use crate::logic::normal::{prenex, Prenex};
use crate::logic::WeightedVocabulary;

pub fn remove_negation(phi: &Formula, vocab: &WeightedVocabulary) -> Result<TransformResult> {
    let free = phi.free_vars();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free.into_iter().collect()));
    }
    let p = prenex(phi);
    if !p.is_universal() {
        return Err(Error::Invalid(
            "negation removal needs a universal prenex sentence; skolemize first".into(),
        ));
    }
    let mut vocab = vocab.clone();
    vocab.extend_unit(&phi.relations())?;
    let mut names = FreshNames::new(&vocab, [phi]);
    let mut introduced = Vec::new();
    // negated leaf -> replacement atom, in order of first occurrence
    let mut replaced: BTreeMap<Formula, Formula> = BTreeMap::new();
    let mut deltas_inside = Vec::new();
    let mut deltas_outside = Vec::new();
    let mut fail = None;
    let matrix = p.matrix.map_bottom_up(&mut |node| match node {
        Formula::Not(inner) => {
            if let Some(a) = replaced.get(&*inner) {
                return a.clone();
            }
            let xs = ordered_vars(&inner);
            let mut declare = |prefix: &str, wbar: Rational| {
                names.declare(
                    prefix,
                    xs.len(),
                    Rational::one(),
                    wbar,
                    if prefix == "A" { Role::NegationA } else { Role::NegationB },
                    &mut vocab,
                    &mut introduced,
                )
            };
            let (a, b) = match (declare("A", int(1)), declare("B", int(-1))) {
                (Ok(a), Ok(b)) => (f::atom(&a, xs.clone()), f::atom(&b, xs.clone())),
                (Err(e), _) | (_, Err(e)) => {
                    fail = Some(e);
                    return Formula::True;
                }
            };
            let delta = f::and_all([
                f::or((*inner).clone(), a.clone()),
                f::or(a.clone(), b.clone()),
                f::or((*inner).clone(), b),
            ]);
            if xs.is_empty() {
                deltas_outside.push(delta);
            } else {
                deltas_inside.push(delta);
            }
            replaced.insert(*inner, a.clone());
            a
        }
        other => other,
    });
    if let Some(e) = fail {
        return Err(e);
    }
    // every delta's variables are bound by the prefix, so its matrix can sit
    // under the same quantifiers; nullary ones stay outside so that they
    // still constrain their symbols on the empty domain
    let body = Prenex {
        prefix: p.prefix,
        matrix: f::and_all(std::iter::once(matrix).chain(deltas_inside)),
    };
    Ok(TransformResult {
        formula: f::and_all(std::iter::once(body.to_formula()).chain(deltas_outside)),
        vocab,
        introduced,
    })
}

fn ordered_vars(phi: &Formula) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    phi.visit(&mut |node| {
        let vars: Vec<&String> = match node {
            Formula::Atom { args, .. } => args.iter().collect(),
            Formula::Eq(a, b) => vec![a, b],
            _ => vec![],
        };
        for v in vars {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
    });
    out
}

pub fn is_positive(phi: &Formula) -> bool {
    let mut ok = true;
    phi.visit(&mut |node| {
        ok &= !matches!(node, Formula::Not(_) | Formula::Implies(..) | Formula::Iff(..))
    });
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{brute_wfomc, OracleConfig};
    use crate::logic::parse_inferring;

    #[test]
    fn clause_with_negated_atom() {
        let (phi, syms) = parse_inferring("forall x,y. R(x,y) | !S(x,y)").unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        let out = remove_negation(&phi, &v).unwrap();
        assert!(is_positive(&out.formula));
        let want = parse_inferring(
            "forall x,y. (R(x,y) | A1(x,y)) & ((S(x,y) | A1(x,y)) & (A1(x,y) | B1(x,y)) & (S(x,y) | B1(x,y)))",
        )
        .unwrap()
        .0;
        assert_eq!(out.formula, want);
        let cfg = OracleConfig::with_cap(32);
        assert_eq!(brute_wfomc(&phi, 2, &v, &cfg).unwrap(), int(81));
        assert_eq!(brute_wfomc(&out.formula, 2, &out.vocab, &cfg).unwrap(), int(81));
    }

    #[test]
    fn positive_input_unchanged() {
        let (phi, syms) = parse_inferring("forall x. R(x) | S(x)").unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        let out = remove_negation(&phi, &v).unwrap();
        assert_eq!(out.formula, phi);
        assert!(out.introduced.is_empty());
    }

    #[test]
    fn rejects_existentials() {
        let (phi, syms) = parse_inferring("exists x. !R(x)").unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        assert!(remove_negation(&phi, &v).is_err());
    }

    #[test]
    fn nullary_negation_on_empty_domain() {
        let (phi, syms) = parse_inferring("forall x. !P | R(x)").unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        let out = remove_negation(&phi, &v).unwrap();
        let cfg = OracleConfig::default();
        for n in 0..3 {
            assert_eq!(
                brute_wfomc(&phi, n, &v, &cfg).unwrap(),
                brute_wfomc(&out.formula, n, &out.vocab, &cfg).unwrap()
            );
        }
    }
}
