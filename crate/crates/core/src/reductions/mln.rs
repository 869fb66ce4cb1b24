//! Markov Logic Networks: direct semantics and the reduction to WFOMC.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::fresh::FreshNames;
use super::{Role, TransformResult};
use crate::arith::{self, Rational};
use crate::error::{Error, Result};
use crate::ground::oracle::{check_structure_cap, for_each_structure};
use crate::ground::OracleConfig;
use crate::logic::formula::{self as f, Formula};
use crate::logic::{parse_inferring, CompiledSentence, RelationSymbol, Structure, TupleIndex, WeightedVocabulary};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MlnWeight {
    Hard,
    Soft(Rational),
}

impl fmt::Display for MlnWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MlnWeight::Hard => write!(f, "inf"),
            MlnWeight::Soft(w) => write!(f, "{w}"),
        }
    }
}

/// A constraint `(w, phi(xs))`; free variables are implicitly universal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlnConstraint {
    pub weight: MlnWeight,
    pub formula: Formula,
}

impl MlnConstraint {
    pub fn free_vars(&self) -> Vec<String> {
        self.formula.free_vars().into_iter().collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MlnModel {
    pub constraints: Vec<MlnConstraint>,
}

impl MlnModel {
    pub fn soft(mut self, w: Rational, formula: Formula) -> Self {
        self.constraints.push(MlnConstraint {
            weight: MlnWeight::Soft(w),
            formula,
        });
        self
    }

    pub fn hard(mut self, formula: Formula) -> Self {
        self.constraints.push(MlnConstraint {
            weight: MlnWeight::Hard,
            formula,
        });
        self
    }

    /// Parses one `<weight> :: <formula>` per line; `inf` marks a hard
    /// constraint and `#` starts a comment. Relation arities are inferred
    /// and must be consistent across lines.
    pub fn parse(text: &str) -> Result<(MlnModel, Vec<RelationSymbol>)> {
        let mut model = MlnModel::default();
        let mut arities: BTreeMap<String, usize> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: Error| match e {
                Error::Parse { column, message, .. } => Error::Parse {
                    line: lineno + 1,
                    column,
                    message,
                },
                other => other,
            };
            let (w, body) = line.split_once("::").ok_or_else(|| {
                Error::parse(lineno + 1, 1, "expected `<weight> :: <formula>`")
            })?;
            let weight = match w.trim() {
                "inf" => MlnWeight::Hard,
                other => MlnWeight::Soft(arith::parse_rational(other)?),
            };
            let (formula, symbols) = parse_inferring(body).map_err(at)?;
            for s in symbols {
                match arities.get(&s.name) {
                    Some(&a) if a != s.arity => {
                        return Err(Error::ArityMismatch {
                            name: s.name,
                            expected: a,
                            found: s.arity,
                        })
                    }
                    _ => {
                        arities.insert(s.name, s.arity);
                    }
                }
            }
            model.constraints.push(MlnConstraint { weight, formula });
        }
        let symbols = arities
            .into_iter()
            .map(|(name, arity)| RelationSymbol { name, arity })
            .collect();
        Ok((model, symbols))
    }

    pub fn relations(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for c in &self.constraints {
            out.extend(c.formula.relations());
        }
        out
    }
}

/// Replaces each soft `(w, phi(xs))` by the hard `forall xs. R(xs) | phi(xs)`
/// with fresh `R` weighted `(1/(w-1), 1)`; hard constraints become
/// `forall xs. phi(xs)`. Returns the conjunction `Gamma`.
pub fn mln_reduce(model: &MlnModel, vocab: &WeightedVocabulary) -> Result<TransformResult> {
    let mut vocab = vocab.clone();
    vocab.extend_unit(&model.relations())?;
    let mut names = FreshNames::new(&vocab, model.constraints.iter().map(|c| &c.formula));
    let mut introduced = Vec::new();
    let mut parts = Vec::new();
    for c in &model.constraints {
        let xs = c.free_vars();
        match &c.weight {
            MlnWeight::Hard => parts.push(f::forall_all(&xs, c.formula.clone())),
            MlnWeight::Soft(w) => {
                if w.is_one() {
                    return Err(Error::VacuousSoftConstraint(c.formula.to_string()));
                }
                let r = names.declare(
                    "M",
                    xs.len(),
                    (w - Rational::one()).recip(),
                    Rational::one(),
                    Role::SoftConstraint,
                    &mut vocab,
                    &mut introduced,
                )?;
                parts.push(f::forall_all(&xs, f::or(f::atom(&r, xs.clone()), c.formula.clone())));
            }
        }
    }
    Ok(TransformResult {
        formula: f::and_all(parts),
        vocab,
        introduced,
    })
}

/// `Pr(query) = WFOMC(query & Gamma) / WFOMC(Gamma)` through the reduction,
/// with `counter` computing WFOMC at the fixed domain size.
pub fn mln_probability(
    model: &MlnModel,
    query: &Formula,
    vocab: &WeightedVocabulary,
    mut counter: impl FnMut(&Formula, &WeightedVocabulary) -> Result<Rational>,
) -> Result<Rational> {
    let free = query.free_vars();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free.into_iter().collect()));
    }
    let mut base = vocab.clone();
    base.extend_unit(&query.relations())?;
    let reduced = mln_reduce(model, &base)?;
    let total = counter(&reduced.formula, &reduced.vocab)?;
    if total.is_zero() {
        return Err(Error::InconsistentMln);
    }
    let joint = counter(&f::and(query.clone(), reduced.formula.clone()), &reduced.vocab)?;
    Ok(joint / total)
}

struct GroundedModel {
    parts: Vec<(MlnWeight, CompiledSentence, usize)>,
    n: usize,
}

impl GroundedModel {
    fn new(model: &MlnModel, index: &TupleIndex) -> Result<Self> {
        let parts = model
            .constraints
            .iter()
            .map(|c| {
                let xs = c.free_vars();
                let compiled = CompiledSentence::with_free_vars(&c.formula, &xs, index)?;
                Ok((c.weight.clone(), compiled, xs.len()))
            })
            .collect::<Result<_>>()?;
        Ok(GroundedModel {
            parts,
            n: index.domain_size(),
        })
    }

    /// `W(D)`: zero if a hard constraint fails, else the product of `w`
    /// over satisfied groundings of soft constraints.
    fn weight(&self, bits: &[u64]) -> Rational {
        let mut acc = Rational::one();
        for (w, c, k) in &self.parts {
            let mut satisfied = 0u64;
            let mut values = vec![0usize; *k];
            let total = self.n.pow(*k as u32);
            for g in 0..total {
                let mut rest = g;
                for v in values.iter_mut().rev() {
                    *v = rest % self.n;
                    rest /= self.n;
                }
                if c.eval_at(bits, &values) {
                    satisfied += 1;
                } else if *w == MlnWeight::Hard {
                    return Rational::zero();
                }
            }
            if let MlnWeight::Soft(w) = w {
                acc *= arith::pow(w, satisfied);
            }
        }
        acc
    }
}

fn index_for(model: &MlnModel, extra: &Formula, vocab: &WeightedVocabulary, n: usize) -> Result<TupleIndex> {
    let mut base = vocab.clone();
    base.extend_unit(&model.relations())?;
    base.extend_unit(&extra.relations())?;
    TupleIndex::new(base.relations().iter().map(|r| r.symbol.clone()), n)
}

/// Weight of one world under the MLN semantics.
pub fn world_weight(model: &MlnModel, d: &Structure, vocab: &WeightedVocabulary) -> Result<Rational> {
    let index = index_for(model, &Formula::True, vocab, d.domain_size)?;
    let g = GroundedModel::new(model, &index)?;
    Ok(g.weight(&d.to_bits(&index)))
}

/// `Pr(query) = W(query) / W(true)` by enumerating every world over the
/// base vocabulary (relations of `vocab`, the model and the query, all
/// unweighted).
pub fn mln_direct(
    model: &MlnModel,
    query: &Formula,
    n: usize,
    vocab: &WeightedVocabulary,
    config: &OracleConfig,
) -> Result<Rational> {
    let index = index_for(model, query, vocab, n)?;
    check_structure_cap(&index, config)?;
    let g = GroundedModel::new(model, &index)?;
    let q = CompiledSentence::new(query, &index)?;
    let mut total = Rational::zero();
    let mut hit = Rational::zero();
    for_each_structure(&index, |bits| {
        let w = g.weight(bits);
        if w.is_zero() {
            return;
        }
        if q.eval(bits) {
            hit += &w;
        }
        total += w;
    });
    if total.is_zero() {
        return Err(Error::InconsistentMln);
    }
    Ok(hit / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ratio};
    use crate::ground::brute_wfomc;

    const SPOUSE: &str = "3 :: Spouse(x,y) & Female(x) -> Male(y)\n";

    #[test]
    fn spouse_reduction_weight() {
        let (m, syms) = MlnModel::parse(SPOUSE).unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        let out = mln_reduce(&m, &v).unwrap();
        let r = &out.introduced[0].symbol;
        assert_eq!(r.arity, 2);
        assert_eq!(out.vocab.get(&r.name).unwrap().w, ratio(1, 2));
    }

    #[test]
    fn direct_matches_reduction() {
        let (m, syms) = MlnModel::parse(SPOUSE).unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        let query = parse_inferring("exists x. Male(x)").unwrap().0;
        let cfg = OracleConfig::with_cap(32);
        for n in 1..=2 {
            let direct = mln_direct(&m, &query, n, &v, &cfg).unwrap();
            let reduced =
                mln_probability(&m, &query, &v, |f, v| brute_wfomc(f, n, v, &cfg)).unwrap();
            assert_eq!(direct, reduced);
        }
    }

    #[test]
    fn world_weight_counts_groundings() {
        let m = MlnModel::default().soft(int(3), parse_inferring("R(x,y)").unwrap().0);
        let d = Structure::new(2).with("R", &[1, 2]).with("R", &[2, 1]);
        let v = WeightedVocabulary::unit([RelationSymbol::new("R", 2)]).unwrap();
        assert_eq!(world_weight(&m, &d, &v).unwrap(), int(9));
    }

    #[test]
    fn hard_only_and_errors() {
        let (m, syms) = MlnModel::parse("inf :: R(x) | S(x)  # hard\n").unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        let cfg = OracleConfig::default();
        assert_eq!(mln_direct(&m, &Formula::True, 2, &v, &cfg).unwrap(), int(1));
        let (m, _) = MlnModel::parse("1 :: R(x)").unwrap();
        assert!(matches!(mln_reduce(&m, &v), Err(Error::VacuousSoftConstraint(_))));
        let (m, _) = MlnModel::parse("inf :: R(x) & !R(x)").unwrap();
        assert_eq!(mln_direct(&m, &Formula::True, 1, &v, &cfg), Err(Error::InconsistentMln));
        assert!(matches!(MlnModel::parse("2 :: R(x)\n3 :: R(x,y)"), Err(Error::ArityMismatch { .. })));
        match MlnModel::parse("# c\n\n2 :: R(x) &") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn soft_weight_below_one() {
        let (m, syms) = MlnModel::parse("1/2 :: R(x) -> S(x)").unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        let out = mln_reduce(&m, &v).unwrap();
        assert_eq!(out.vocab.get(&out.introduced[0].symbol.name).unwrap().w, int(-2));
    }
}
