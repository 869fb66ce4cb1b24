//! Scott-style reductions: one definitional symbol per subformula.

use std::collections::BTreeMap;

use num_traits::One;

use super::fresh::FreshNames;
use super::{Introduced, Role, TransformResult};
use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::logic::formula::{self as f, Formula, Quantifier};
use crate::logic::{RelationSymbol, WeightedVocabulary};

/// Replaces every subformula `psi(xs)` by a fresh `S(xs)` and returns
/// `S_phi & AND_psi forall xs. (S_psi(xs) <-> theta'_psi)`, where
/// `theta'_psi` is `psi`'s top connective applied to the symbols of its
/// children (atoms are their own definition). Each conjunct has quantifier
/// depth at most one more than its subformula's top level. Symbols are
/// weighted `(1, 1)`; models correspond one-to-one.
pub fn scott_reduce(phi: &Formula, vocab: &WeightedVocabulary) -> Result<TransformResult> {
    let free = phi.free_vars();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free.into_iter().collect()));
    }
    let mut st = Defs::new(phi, vocab)?;
    let top = st.define(phi)?;
    Ok(st.finish(top))
}

struct Defs {
    vocab: WeightedVocabulary,
    names: FreshNames,
    introduced: Vec<Introduced>,
    known: BTreeMap<Formula, Formula>,
    thetas: Vec<Formula>,
}

impl Defs {
    fn new(phi: &Formula, vocab: &WeightedVocabulary) -> Result<Self> {
        let mut vocab = vocab.clone();
        vocab.extend_unit(&phi.relations())?;
        let names = FreshNames::new(&vocab, [phi]);
        Ok(Defs {
            vocab,
            names,
            introduced: Vec::new(),
            known: BTreeMap::new(),
            thetas: Vec::new(),
        })
    }

    fn symbol(&mut self, free: &[String]) -> Result<Formula> {
        let name = self.names.declare(
            "S",
            free.len(),
            Rational::one(),
            Rational::one(),
            Role::Scott,
            &mut self.vocab,
            &mut self.introduced,
        )?;
        Ok(f::atom(&name, free.to_vec()))
    }

    /// Returns the atom `S_psi(xs)` standing for `psi`.
    fn define(&mut self, psi: &Formula) -> Result<Formula> {
        if let Some(s) = self.known.get(psi) {
            return Ok(s.clone());
        }
        let body = match psi {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => psi.clone(),
            Formula::Not(a) => f::not(self.define(a)?),
            Formula::And(a, b) => f::and(self.define(a)?, self.define(b)?),
            Formula::Or(a, b) => f::or(self.define(a)?, self.define(b)?),
            Formula::Implies(a, b) => f::implies(self.define(a)?, self.define(b)?),
            Formula::Iff(a, b) => f::iff(self.define(a)?, self.define(b)?),
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                f::quantify(psi.quantifier().unwrap().0, v, self.define(a)?)
            }
        };
        let free: Vec<String> = psi.free_vars().into_iter().collect();
        let s = self.symbol(&free)?;
        self.thetas.push(f::forall_all(&free, f::iff(s.clone(), body)));
        self.known.insert(psi.clone(), s.clone());
        Ok(s)
    }

    fn finish(self, top: Formula) -> TransformResult {
        TransformResult {
            formula: f::and_all(std::iter::once(top).chain(self.thetas)),
            vocab: self.vocab,
            introduced: self.introduced,
        }
    }
}

/// FO² normal form used by the lifted algorithm: a conjunction of sentences
/// `Q1 x. Q2 y. psi(x, y)` with quantifier-free `psi`.
///
/// Top-level conjuncts already of that shape are kept. Every other
/// quantified subformula `Q v. psi1(fs, v)` is replaced by a fresh `S(fs)`
/// with
///
/// ```text
/// forall:  forall fs. forall v. (!S | psi1)  &  forall fs. exists v. (!psi1 | S)
/// exists:  forall fs. forall v. (!psi1 | S)  &  forall fs. exists v. (!S | psi1)
/// ```
///
/// Pulling `v` over `S` is only sound on non-empty domains, so the result
/// is equivalent for `n >= 1`.
pub fn scott_normal_form(phi: &Formula, vocab: &WeightedVocabulary) -> Result<TransformResult> {
    let free = phi.free_vars();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free.into_iter().collect()));
    }
    let mut st = Defs::new(phi, vocab)?;
    let mut out = Vec::new();
    for conjunct in phi.conjuncts() {
        let mut prefix: Vec<(Quantifier, String)> = Vec::new();
        let mut body = conjunct;
        while let Some((q, v, inner)) = body.quantifier() {
            if prefix.iter().any(|(_, p)| p == v) {
                break;
            }
            prefix.push((q, v.to_string()));
            body = inner;
        }
        let body = st.flatten(body)?;
        out.push(
            prefix
                .iter()
                .rev()
                .fold(body, |acc, (q, v)| f::quantify(*q, v, acc)),
        );
    }
    out.append(&mut st.thetas);
    Ok(TransformResult {
        formula: f::and_all(out),
        vocab: st.vocab,
        introduced: st.introduced,
    })
}

impl Defs {
    /// Replaces quantified subformulas of `psi` by definitional atoms,
    /// innermost first.
    fn flatten(&mut self, psi: &Formula) -> Result<Formula> {
        Ok(match psi {
            Formula::Not(a) => f::not(self.flatten(a)?),
            Formula::And(a, b) => f::and(self.flatten(a)?, self.flatten(b)?),
            Formula::Or(a, b) => f::or(self.flatten(a)?, self.flatten(b)?),
            Formula::Implies(a, b) => f::implies(self.flatten(a)?, self.flatten(b)?),
            Formula::Iff(a, b) => f::iff(self.flatten(a)?, self.flatten(b)?),
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                let q = psi.quantifier().unwrap().0;
                let inner = self.flatten(a)?;
                let key = f::quantify(q, v, inner.clone());
                if let Some(s) = self.known.get(&key) {
                    return Ok(s.clone());
                }
                let fs: Vec<String> = key.free_vars().into_iter().collect();
                let s = self.symbol(&fs)?;
                let (all, some) = match q {
                    Quantifier::Forall => (
                        f::or(f::not(s.clone()), inner.clone()),
                        f::or(f::not(inner), s.clone()),
                    ),
                    Quantifier::Exists => (
                        f::or(f::not(inner.clone()), s.clone()),
                        f::or(f::not(s.clone()), inner),
                    ),
                };
                self.thetas.push(f::forall_all(&fs, f::quantify(Quantifier::Forall, v, all)));
                self.thetas.push(f::forall_all(&fs, f::quantify(Quantifier::Exists, v, some)));
                self.known.insert(key, s.clone());
                s
            }
            leaf => leaf.clone(),
        })
    }
}

pub fn introduced_symbols(result: &TransformResult) -> Vec<RelationSymbol> {
    result.introduced.iter().map(|i| i.symbol.clone()).collect()
}
