use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// First-order formula over a relational vocabulary with equality.
///
/// Connectives are binary; `forall x, y. phi` is represented as nested
/// single-variable quantifiers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom { rel: String, args: Vec<String> },
    Eq(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }
}

pub fn atom<S: Into<String>>(rel: &str, args: impl IntoIterator<Item = S>) -> Formula {
    Formula::Atom {
        rel: rel.to_string(),
        args: args.into_iter().map(Into::into).collect(),
    }
}

pub fn eq(a: &str, b: &str) -> Formula {
    Formula::Eq(a.to_string(), b.to_string())
}

pub fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}

pub fn and(a: Formula, b: Formula) -> Formula {
    Formula::And(Box::new(a), Box::new(b))
}

pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Or(Box::new(a), Box::new(b))
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}

pub fn iff(a: Formula, b: Formula) -> Formula {
    Formula::Iff(Box::new(a), Box::new(b))
}

pub fn quantify(q: Quantifier, var: &str, body: Formula) -> Formula {
    match q {
        Quantifier::Forall => Formula::Forall(var.to_string(), Box::new(body)),
        Quantifier::Exists => Formula::Exists(var.to_string(), Box::new(body)),
    }
}

/// `forall v1. forall v2. ... body`
pub fn forall_all<S: AsRef<str>>(vars: &[S], body: Formula) -> Formula {
    vars.iter()
        .rev()
        .fold(body, |acc, v| quantify(Quantifier::Forall, v.as_ref(), acc))
}

pub fn exists_all<S: AsRef<str>>(vars: &[S], body: Formula) -> Formula {
    vars.iter()
        .rev()
        .fold(body, |acc, v| quantify(Quantifier::Exists, v.as_ref(), acc))
}

/// Left-nested conjunction; `true` when empty.
pub fn and_all(parts: impl IntoIterator<Item = Formula>) -> Formula {
    parts.into_iter().reduce(and).unwrap_or(Formula::True)
}

/// Left-nested disjunction; `false` when empty.
pub fn or_all(parts: impl IntoIterator<Item = Formula>) -> Formula {
    parts.into_iter().reduce(or).unwrap_or(Formula::False)
}

impl Formula {
    pub fn quantifier(&self) -> Option<(Quantifier, &str, &Formula)> {
        match self {
            Formula::Forall(v, b) => Some((Quantifier::Forall, v, b)),
            Formula::Exists(v, b) => Some((Quantifier::Exists, v, b)),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut add = |v: &String, bound: &Vec<String>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { args, .. } => args.iter().for_each(|v| add(v, bound)),
            Formula::Eq(a, b) => {
                add(a, bound);
                add(b, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn variable_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom { args, .. } => out.extend(args.iter().cloned()),
            Formula::Eq(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            Formula::Forall(v, _) | Formula::Exists(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Relation symbols with the arity they are used at. The first use wins
    /// if the formula is ill-typed.
    pub fn relations(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.visit(&mut |f| {
            if let Formula::Atom { rel, args } = f {
                out.entry(rel.clone()).or_insert(args.len());
            }
        });
        out
    }

    pub fn has_equality(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= matches!(f, Formula::Eq(..)));
        found
    }

    pub fn is_quantifier_free(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= f.quantifier().is_some());
        !found
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Forall(_, f) | Formula::Exists(_, f) => 1 + f.quantifier_depth(),
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Rebuilds the formula bottom-up, replacing each node by `f(node)` after
    /// its children have been mapped.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Formula) -> Formula) -> Formula {
        let rebuilt = match self {
            Formula::Not(a) => not(a.map_bottom_up(f)),
            Formula::And(a, b) => and(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::Or(a, b) => or(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::Implies(a, b) => implies(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::Iff(a, b) => iff(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(a.map_bottom_up(f))),
            Formula::Exists(v, a) => Formula::Exists(v.clone(), Box::new(a.map_bottom_up(f))),
            leaf => leaf.clone(),
        };
        f(rebuilt)
    }

    /// Renames free occurrences of variables according to `map`. Bound
    /// variables shadow the mapping; no capture check is made.
    pub fn rename_free(&self, map: &BTreeMap<String, String>) -> Formula {
        let sub = |v: &String, bound: &[String]| -> String {
            if bound.contains(v) {
                v.clone()
            } else {
                map.get(v).cloned().unwrap_or_else(|| v.clone())
            }
        };
        fn go(
            f: &Formula,
            bound: &mut Vec<String>,
            sub: &dyn Fn(&String, &[String]) -> String,
        ) -> Formula {
            match f {
                Formula::True | Formula::False => f.clone(),
                Formula::Atom { rel, args } => Formula::Atom {
                    rel: rel.clone(),
                    args: args.iter().map(|v| sub(v, bound)).collect(),
                },
                Formula::Eq(a, b) => Formula::Eq(sub(a, bound), sub(b, bound)),
                Formula::Not(a) => not(go(a, bound, sub)),
                Formula::And(a, b) => and(go(a, bound, sub), go(b, bound, sub)),
                Formula::Or(a, b) => or(go(a, bound, sub), go(b, bound, sub)),
                Formula::Implies(a, b) => implies(go(a, bound, sub), go(b, bound, sub)),
                Formula::Iff(a, b) => iff(go(a, bound, sub), go(b, bound, sub)),
                Formula::Forall(v, a) | Formula::Exists(v, a) => {
                    bound.push(v.clone());
                    let body = go(a, bound, sub);
                    bound.pop();
                    let q = f.quantifier().unwrap().0;
                    quantify(q, v, body)
                }
            }
        }
        go(self, &mut Vec::new(), &sub)
    }

    /// Top-level conjuncts, flattening nested `And`.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn disjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::Or(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Forall(..) | Formula::Exists(..) => 0,
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(inner) if !matches!(**inner, Formula::Eq(..)) => 5,
            _ => 6,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
            self.write_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom { rel, args } if args.is_empty() => write!(f, "{rel}"),
            Formula::Atom { rel, args } => write!(f, "{rel}({})", args.join(",")),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Not(inner) => match &**inner {
                Formula::Eq(a, b) => write!(f, "{a} != {b}"),
                other => {
                    write!(f, "!")?;
                    other.write_prec(f, 5)
                }
            },
            Formula::And(a, b) => binary(f, a, "&", b, 4, true),
            Formula::Or(a, b) => binary(f, a, "|", b, 3, true),
            Formula::Implies(a, b) => binary(f, a, "->", b, 2, false),
            Formula::Iff(a, b) => binary(f, a, "<->", b, 1, true),
            Formula::Forall(v, body) => {
                write!(f, "forall {v}. ")?;
                body.write_prec(f, 0)
            }
            Formula::Exists(v, body) => {
                write!(f, "exists {v}. ")?;
                body.write_prec(f, 0)
            }
        }
    }
}

fn binary(
    f: &mut fmt::Formatter<'_>,
    a: &Formula,
    op: &str,
    b: &Formula,
    prec: u8,
    left_assoc: bool,
) -> fmt::Result {
    // quantifiers extend to the right, so they are always parenthesized as
    // operands; their precedence 0 is below every binary level
    let (lmin, rmin) = if left_assoc { (prec, prec + 1) } else { (prec + 1, prec) };
    a.write_prec(f, lmin.max(1))?;
    write!(f, " {op} ")?;
    b.write_prec(f, rmin.max(1))
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}
