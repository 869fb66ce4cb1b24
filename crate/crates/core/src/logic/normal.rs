//! Normal forms: arrow elimination, NNF, constant folding, rectification
//! and prenex form.

use std::collections::{BTreeMap, BTreeSet};

use super::formula::{self as f, Formula, Quantifier};

/// Rewrites `->` and `<->` into `!`, `&`, `|`.
pub fn eliminate_arrows(phi: &Formula) -> Formula {
    phi.map_bottom_up(&mut |node| match node {
        Formula::Implies(a, b) => f::or(f::not(*a), *b),
        Formula::Iff(a, b) => f::and(
            f::or(f::not((*a).clone()), (*b).clone()),
            f::or(*a, f::not(*b)),
        ),
        other => other,
    })
}

/// Negation normal form: negations only on atoms and equalities; no
/// `->`/`<->`.
pub fn nnf(phi: &Formula) -> Formula {
    push(phi, false)
}

fn push(phi: &Formula, negate: bool) -> Formula {
    match phi {
        Formula::True => if negate { Formula::False } else { Formula::True },
        Formula::False => if negate { Formula::True } else { Formula::False },
        Formula::Atom { .. } | Formula::Eq(..) => {
            if negate {
                f::not(phi.clone())
            } else {
                phi.clone()
            }
        }
        Formula::Not(a) => push(a, !negate),
        Formula::And(a, b) if negate => f::or(push(a, true), push(b, true)),
        Formula::And(a, b) => f::and(push(a, false), push(b, false)),
        Formula::Or(a, b) if negate => f::and(push(a, true), push(b, true)),
        Formula::Or(a, b) => f::or(push(a, false), push(b, false)),
        Formula::Implies(a, b) if negate => f::and(push(a, false), push(b, true)),
        Formula::Implies(a, b) => f::or(push(a, true), push(b, false)),
        Formula::Iff(a, b) if negate => f::and(
            f::or(push(a, false), push(b, false)),
            f::or(push(a, true), push(b, true)),
        ),
        Formula::Iff(a, b) => f::and(
            f::or(push(a, true), push(b, false)),
            f::or(push(a, false), push(b, true)),
        ),
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let q = phi.quantifier().unwrap().0;
            let q = if negate { q.dual() } else { q };
            f::quantify(q, v, push(body, negate))
        }
    }
}

pub fn is_nnf(phi: &Formula) -> bool {
    let mut ok = true;
    phi.visit(&mut |node| match node {
        Formula::Implies(..) | Formula::Iff(..) => ok = false,
        Formula::Not(inner) => ok &= matches!(**inner, Formula::Atom { .. } | Formula::Eq(..)),
        _ => {}
    });
    ok
}

/// Constant folding. Quantifiers are kept even over constant bodies, since
/// `forall x. false` is true on the empty domain.
pub fn simplify(phi: &Formula) -> Formula {
    use Formula::*;
    phi.map_bottom_up(&mut |node| match node {
        Eq(a, b) if a == b => True,
        Not(a) => match *a {
            True => False,
            False => True,
            Not(inner) => *inner,
            other => f::not(other),
        },
        And(a, b) => match (*a, *b) {
            (False, _) | (_, False) => False,
            (True, x) | (x, True) => x,
            (x, y) => f::and(x, y),
        },
        Or(a, b) => match (*a, *b) {
            (True, _) | (_, True) => True,
            (False, x) | (x, False) => x,
            (x, y) => f::or(x, y),
        },
        Implies(a, b) => match (*a, *b) {
            (False, _) | (_, True) => True,
            (True, x) => x,
            (x, False) => f::not(x),
            (x, y) => f::implies(x, y),
        },
        Iff(a, b) => match (*a, *b) {
            (True, x) | (x, True) => x,
            (False, x) | (x, False) => f::not(x),
            (x, y) => f::iff(x, y),
        },
        other => other,
    })
}

/// A variable name based on `base` that is not in `taken`.
pub fn fresh_var(base: &str, taken: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|c| !taken.contains(c))
        .unwrap()
}

/// Renames bound variables apart: afterwards no two quantifiers bind the same
/// name and no bound name coincides with a free one.
pub fn rectify(phi: &Formula) -> Formula {
    let mut taken = phi.variable_names();
    let mut used = phi.free_vars();
    go(phi, &mut BTreeMap::new(), &mut used, &mut taken)
}

fn go(
    phi: &Formula,
    map: &mut BTreeMap<String, String>,
    used: &mut BTreeSet<String>,
    taken: &mut BTreeSet<String>,
) -> Formula {
    let sub = |v: &String, map: &BTreeMap<String, String>| map.get(v).cloned().unwrap_or_else(|| v.clone());
    match phi {
        Formula::True | Formula::False => phi.clone(),
        Formula::Atom { rel, args } => Formula::Atom {
            rel: rel.clone(),
            args: args.iter().map(|v| sub(v, map)).collect(),
        },
        Formula::Eq(a, b) => Formula::Eq(sub(a, map), sub(b, map)),
        Formula::Not(a) => f::not(go(a, map, used, taken)),
        Formula::And(a, b) => f::and(go(a, map, used, taken), go(b, map, used, taken)),
        Formula::Or(a, b) => f::or(go(a, map, used, taken), go(b, map, used, taken)),
        Formula::Implies(a, b) => f::implies(go(a, map, used, taken), go(b, map, used, taken)),
        Formula::Iff(a, b) => f::iff(go(a, map, used, taken), go(b, map, used, taken)),
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let name = if used.contains(v) {
                fresh_var(v, taken)
            } else {
                v.clone()
            };
            used.insert(name.clone());
            taken.insert(name.clone());
            let saved = map.insert(v.clone(), name.clone());
            let inner = go(body, map, used, taken);
            match saved {
                Some(old) => map.insert(v.clone(), old),
                None => map.remove(v),
            };
            f::quantify(phi.quantifier().unwrap().0, &name, inner)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prenex {
    pub prefix: Vec<(Quantifier, String)>,
    pub matrix: Formula,
}

impl Prenex {
    pub fn to_formula(&self) -> Formula {
        self.prefix
            .iter()
            .rev()
            .fold(self.matrix.clone(), |acc, (q, v)| f::quantify(*q, v, acc))
    }

    pub fn is_universal(&self) -> bool {
        self.prefix.iter().all(|(q, _)| *q == Quantifier::Forall)
    }
}

/// Prenex normal form with an NNF, rectified matrix.
///
/// Pulling quantifiers out of `&`/`|` is only an equivalence on non-empty
/// domains. On the empty domain a quantified sentence is decided by its
/// outermost quantifier, so prefixes are merged to keep that value: under
/// `&` an `exists` goes first if either side starts with one, under `|` a
/// `forall` does. Exactness at n = 0 additionally assumes no nullary atoms
/// sit beside quantifiers.
pub fn prenex(phi: &Formula) -> Prenex {
    let prepared = rectify(&simplify(&nnf(phi)));
    let (prefix, matrix) = pull(&prepared);
    Prenex { prefix, matrix }
}

type Prefix = Vec<(Quantifier, String)>;

fn pull(phi: &Formula) -> (Prefix, Formula) {
    match phi {
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let (mut p, m) = pull(body);
            p.insert(0, (phi.quantifier().unwrap().0, v.clone()));
            (p, m)
        }
        Formula::And(a, b) => {
            let ((pa, ma), (pb, mb)) = (pull(a), pull(b));
            (merge(pa, pb, Quantifier::Exists), f::and(ma, mb))
        }
        Formula::Or(a, b) => {
            let ((pa, ma), (pb, mb)) = (pull(a), pull(b));
            (merge(pa, pb, Quantifier::Forall), f::or(ma, mb))
        }
        other => (Vec::new(), other.clone()),
    }
}

/// Interleaves two prefixes, keeping each one's internal order. The first
/// quantifier is `lead` when either side offers it; after that existentials
/// are taken as early as possible, which keeps Skolem arities small.
fn merge(a: Prefix, b: Prefix, lead: Quantifier) -> Prefix {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() || j < b.len() {
        let want = if out.is_empty() { lead } else { Quantifier::Exists };
        let take_a = match (a.get(i), b.get(j)) {
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some((qa, _)), Some((qb, _))) => *qa == want || *qb != want,
            (None, None) => unreachable!(),
        };
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else {
            out.push(b[j].clone());
            j += 1;
        }
    }
    out
}
