use num_traits::One;

use crate::arith::Rational;
use crate::error::Result;
use crate::logic::formula::Formula;
use crate::logic::normal::simplify;
use crate::logic::WeightedVocabulary;

/// Cofactors over every truth assignment of the sentence's nullary symbols.
#[derive(Clone, Debug)]
pub struct ShannonExpansion {
    /// `(cofactor, multiplier)`; the multiplier is the product of `w` or
    /// `wbar` of the expanded symbols.
    pub branches: Vec<(Formula, Rational)>,
    /// The input vocabulary without the expanded symbols. Cofactors are
    /// counted over this vocabulary.
    pub vocab: WeightedVocabulary,
    pub expanded: Vec<String>,
}

/// `WFOMC(phi) = sum over branches of multiplier * WFOMC(cofactor)`.
pub fn shannon_expand_nullary(phi: &Formula, vocab: &WeightedVocabulary) -> Result<ShannonExpansion> {
    let mut full = vocab.clone();
    full.extend_unit(&phi.relations())?;
    let expanded: Vec<String> = phi
        .relations()
        .into_iter()
        .filter(|(_, a)| *a == 0)
        .map(|(r, _)| r)
        .collect();
    let mut rest = WeightedVocabulary::new();
    for r in full.relations() {
        if !expanded.contains(&r.symbol.name) {
            rest.add(r.symbol.name.clone(), r.symbol.arity, r.w.clone(), r.wbar.clone())?;
        }
    }
    let mut branches = Vec::with_capacity(1 << expanded.len());
    for mask in 0u64..(1 << expanded.len()) {
        let value = |name: &str| {
            let i = expanded.iter().position(|e| e == name).unwrap();
            mask >> i & 1 == 1
        };
        let mut mult = Rational::one();
        for (i, name) in expanded.iter().enumerate() {
            let r = full.get(name).unwrap();
            mult *= if mask >> i & 1 == 1 { &r.w } else { &r.wbar };
        }
        let cofactor = phi.map_bottom_up(&mut |node| match node {
            Formula::Atom { rel, args } if args.is_empty() && expanded.contains(&rel) => {
                if value(&rel) {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            other => other,
        });
        branches.push((simplify(&cofactor), mult));
    }
    Ok(ShannonExpansion {
        branches,
        vocab: rest,
        expanded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use crate::ground::{brute_wfomc, OracleConfig};
    use crate::logic::parse_inferring;

    #[test]
    fn single_nullary() {
        let (phi, syms) = parse_inferring("R").unwrap();
        let mut v = WeightedVocabulary::unit(syms).unwrap();
        v.set_weights("R", int(2), int(5)).unwrap();
        let s = shannon_expand_nullary(&phi, &v).unwrap();
        assert_eq!(s.branches.len(), 2);
        assert_eq!(s.branches[0], (Formula::False, int(5)));
        assert_eq!(s.branches[1], (Formula::True, int(2)));
        let cfg = OracleConfig::default();
        let total: Rational = s
            .branches
            .iter()
            .map(|(f, m)| m * brute_wfomc(f, 1, &s.vocab, &cfg).unwrap())
            .sum();
        assert_eq!(total, int(2));
    }

    #[test]
    fn no_nullary() {
        let (phi, syms) = parse_inferring("forall x. U(x)").unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        let s = shannon_expand_nullary(&phi, &v).unwrap();
        assert_eq!(s.branches, vec![(phi, int(1))]);
    }

    #[test]
    fn expansion_preserves_count() {
        let (phi, syms) = parse_inferring("(P -> forall x. U(x)) & (Q | exists y. !U(y))").unwrap();
        let mut v = WeightedVocabulary::unit(syms).unwrap();
        v.set_weights("P", int(3), int(-2)).unwrap();
        v.set_weights("U", int(2), int(1)).unwrap();
        let s = shannon_expand_nullary(&phi, &v).unwrap();
        let cfg = OracleConfig::default();
        for n in 0..4 {
            let total: Rational = s
                .branches
                .iter()
                .map(|(f, m)| m * brute_wfomc(f, n, &s.vocab, &cfg).unwrap())
                .sum();
            assert_eq!(total, brute_wfomc(&phi, n, &v, &cfg).unwrap());
        }
    }
}
