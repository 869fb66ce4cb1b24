//! Syntactic classification of sentences, used for routing.

use std::collections::BTreeSet;

use super::formula::{Formula, Quantifier};
use super::normal::{nnf, rectify};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaClass {
    /// Distinct variable names, counting reuse once.
    pub variables: usize,
    pub fo2: bool,
    pub cq: bool,
    pub cq_without_self_joins: bool,
    pub positive_clause: bool,
    pub qs4: bool,
    pub has_equality: bool,
}

pub fn analyze(sentence: &Formula) -> FormulaClass {
    let variables = sentence.variable_names().len();
    let cq = cq_atoms(sentence);
    FormulaClass {
        variables,
        fo2: variables <= 2,
        cq: cq.is_some(),
        cq_without_self_joins: cq.as_deref().is_some_and(|atoms| {
            let rels: BTreeSet<&str> = atoms.iter().map(|(r, _)| r.as_str()).collect();
            rels.len() == atoms.len()
        }),
        positive_clause: clause_atoms(sentence).is_some(),
        qs4: qs4_relation(sentence).is_some(),
        has_equality: sentence.has_equality(),
    }
}

pub type AtomList = Vec<(String, Vec<String>)>;

/// Atoms of a sentence built only from `exists`, `&` and positive atoms,
/// with bound variables renamed apart. `None` otherwise.
pub fn cq_atoms(sentence: &Formula) -> Option<AtomList> {
    shaped_atoms(sentence, Quantifier::Exists)
}

/// Atoms of a sentence built only from `forall`, `|` and positive atoms.
pub fn clause_atoms(sentence: &Formula) -> Option<AtomList> {
    shaped_atoms(sentence, Quantifier::Forall)
}

fn shaped_atoms(sentence: &Formula, q: Quantifier) -> Option<AtomList> {
    if !sentence.is_sentence() {
        return None;
    }
    fn collect(f: &Formula, q: Quantifier, out: &mut AtomList) -> bool {
        match f {
            Formula::Atom { rel, args } => {
                out.push((rel.clone(), args.clone()));
                true
            }
            Formula::And(a, b) if q == Quantifier::Exists => collect(a, q, out) && collect(b, q, out),
            Formula::Or(a, b) if q == Quantifier::Forall => collect(a, q, out) && collect(b, q, out),
            Formula::Exists(_, body) if q == Quantifier::Exists => collect(body, q, out),
            Formula::Forall(_, body) if q == Quantifier::Forall => collect(body, q, out),
            _ => false,
        }
    }
    let mut out = Vec::new();
    if collect(&rectify(sentence), q, &mut out) && !out.is_empty() {
        Some(out)
    } else {
        None
    }
}

/// If the sentence is, up to variable renaming and the order of literals,
/// `forall x1,x2,y1,y2. S(x1,y1) | !S(x2,y1) | S(x2,y2) | !S(x1,y2)`,
/// returns the name of `S`.
pub fn qs4_relation(sentence: &Formula) -> Option<String> {
    if !sentence.is_sentence() {
        return None;
    }
    let mut body = nnf(sentence);
    let mut bound = Vec::new();
    while let Formula::Forall(v, inner) = body {
        bound.push(v);
        body = *inner;
    }
    let distinct: BTreeSet<&String> = bound.iter().collect();
    if bound.len() != 4 || distinct.len() != 4 {
        return None;
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut rels = BTreeSet::new();
    for lit in body.disjuncts() {
        let (atom, target) = match lit {
            Formula::Not(a) => (&**a, &mut neg),
            a => (a, &mut pos),
        };
        match atom {
            Formula::Atom { rel, args } if args.len() == 2 => {
                rels.insert(rel.clone());
                target.push((args[0].clone(), args[1].clone()));
            }
            _ => return None,
        }
    }
    if rels.len() != 1 || pos.len() != 2 || neg.len() != 2 {
        return None;
    }
    for (first, second) in [(0, 1), (1, 0)] {
        let (a, b) = &pos[first];
        let (c, d) = &pos[second];
        let names: BTreeSet<&String> = [a, b, c, d].into_iter().collect();
        if names.len() != 4 || !names.iter().all(|v| distinct.contains(v)) {
            continue;
        }
        let want: BTreeSet<(String, String)> =
            [(c.clone(), b.clone()), (a.clone(), d.clone())].into();
        let got: BTreeSet<(String, String)> = neg.iter().cloned().collect();
        if want == got {
            return rels.into_iter().next();
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_inferring;

    fn class(text: &str) -> FormulaClass {
        analyze(&parse_inferring(text).unwrap().0)
    }

    #[test]
    fn spec_examples() {
        let c = class("forall x. exists y. R(x,y)");
        assert_eq!((c.variables, c.fo2, c.cq), (2, true, false));
        let c = class("exists x. exists y. R(x) & S(x,y)");
        assert!(c.cq && c.cq_without_self_joins);
        let c = class("forall x1,x2,y1,y2. S(x1,y1) | !S(x2,y1) | S(x2,y2) | !S(x1,y2)");
        assert!(c.qs4);
        assert_eq!(c.variables, 4);
    }

    #[test]
    fn qs4_variants() {
        assert!(class("forall a,b,c,d. !S(c,b) | S(c,d) | !S(a,d) | S(a,b)").qs4);
        assert!(!class("forall a,b,c,d. S(a,b) | S(c,d) | !S(a,b) | !S(c,d)").qs4);
        assert!(!class("forall a,b,c. S(a,b) | S(c,a) | !S(c,b) | !S(a,a)").qs4);
    }

    #[test]
    fn cq_and_clause_shapes() {
        assert!(!class("exists x. R(x) & R(x)").cq_without_self_joins);
        assert!(class("exists x. R(x) & R(x)").cq);
        assert!(!class("exists x. R(x) & !S(x)").cq);
        assert!(class("forall x,y. R(x) | S(x,y) | T(y)").positive_clause);
        assert!(!class("forall x. exists y. R(x) | S(x,y)").positive_clause);
        assert!(class("forall x. x = x").has_equality);
    }
}
