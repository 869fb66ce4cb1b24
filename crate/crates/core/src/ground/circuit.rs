use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::logic::{Formula, GroundAtom, RelationSymbol, TupleIndex, WeightedVocabulary};

/// Propositional circuit over ground tuples, identified by their position in
/// a [`TupleIndex`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Circuit {
    Const(bool),
    Var(usize),
    Not(Box<Circuit>),
    And(Vec<Circuit>),
    Or(Vec<Circuit>),
    Iff(Box<Circuit>, Box<Circuit>),
}

impl Circuit {
    pub fn not(c: Circuit) -> Circuit {
        match c {
            Circuit::Const(b) => Circuit::Const(!b),
            Circuit::Not(inner) => *inner,
            other => Circuit::Not(Box::new(other)),
        }
    }

    pub fn and(parts: impl IntoIterator<Item = Circuit>) -> Circuit {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Circuit::Const(true) => {}
                Circuit::Const(false) => return Circuit::Const(false),
                Circuit::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Circuit::Const(true),
            1 => out.pop().unwrap(),
            _ => Circuit::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Circuit>) -> Circuit {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Circuit::Const(false) => {}
                Circuit::Const(true) => return Circuit::Const(true),
                Circuit::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Circuit::Const(false),
            1 => out.pop().unwrap(),
            _ => Circuit::Or(out),
        }
    }

    pub fn iff(a: Circuit, b: Circuit) -> Circuit {
        match (a, b) {
            (Circuit::Const(true), x) | (x, Circuit::Const(true)) => x,
            (Circuit::Const(false), x) | (x, Circuit::Const(false)) => Circuit::not(x),
            (x, y) => Circuit::Iff(Box::new(x), Box::new(y)),
        }
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Circuit::Const(_) => {}
            Circuit::Var(v) => {
                out.insert(*v);
            }
            Circuit::Not(a) => a.collect_vars(out),
            Circuit::And(cs) | Circuit::Or(cs) => cs.iter().for_each(|c| c.collect_vars(out)),
            Circuit::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Circuit::Const(_) | Circuit::Var(_) => 1,
            Circuit::Not(a) => 1 + a.size(),
            Circuit::And(cs) | Circuit::Or(cs) => 1 + cs.iter().map(Circuit::size).sum::<usize>(),
            Circuit::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Evaluates under `value(var)`.
    pub fn eval(&self, value: &impl Fn(usize) -> bool) -> bool {
        match self {
            Circuit::Const(b) => *b,
            Circuit::Var(v) => value(*v),
            Circuit::Not(a) => !a.eval(value),
            Circuit::And(cs) => cs.iter().all(|c| c.eval(value)),
            Circuit::Or(cs) => cs.iter().any(|c| c.eval(value)),
            Circuit::Iff(a, b) => a.eval(value) == b.eval(value),
        }
    }

    /// Renames variables through `map`.
    pub fn relabel(&self, map: &impl Fn(usize) -> usize) -> Circuit {
        match self {
            Circuit::Const(b) => Circuit::Const(*b),
            Circuit::Var(v) => Circuit::Var(map(*v)),
            Circuit::Not(a) => Circuit::Not(Box::new(a.relabel(map))),
            Circuit::And(cs) => Circuit::And(cs.iter().map(|c| c.relabel(map)).collect()),
            Circuit::Or(cs) => Circuit::Or(cs.iter().map(|c| c.relabel(map)).collect()),
            Circuit::Iff(a, b) => Circuit::Iff(Box::new(a.relabel(map)), Box::new(b.relabel(map))),
        }
    }
}

/// The lineage of a sentence over `[n]`: a circuit plus the universe
/// `Tup(n)` of its vocabulary.
#[derive(Clone, Debug)]
pub struct GroundCircuit {
    pub root: Circuit,
    pub universe: TupleIndex,
}

impl GroundCircuit {
    pub fn vars(&self) -> BTreeSet<usize> {
        self.root.vars()
    }

    pub fn atom(&self, var: usize) -> GroundAtom {
        self.universe.atom(var)
    }
}

impl fmt::Display for GroundCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(c: &Circuit, u: &TupleIndex, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let list = |cs: &[Circuit], op: &str, f: &mut fmt::Formatter<'_>| -> fmt::Result {
                write!(f, "(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " {op} ")?;
                    }
                    go(c, u, f)?;
                }
                write!(f, ")")
            };
            match c {
                Circuit::Const(b) => write!(f, "{b}"),
                Circuit::Var(v) => write!(f, "{}", u.atom(*v)),
                Circuit::Not(a) => {
                    write!(f, "!")?;
                    go(a, u, f)
                }
                Circuit::And(cs) => list(cs, "&", f),
                Circuit::Or(cs) => list(cs, "|", f),
                Circuit::Iff(a, b) => {
                    write!(f, "(")?;
                    go(a, u, f)?;
                    write!(f, " <-> ")?;
                    go(b, u, f)?;
                    write!(f, ")")
                }
            }
        }
        go(&self.root, &self.universe, f)
    }
}

/// Lineage over the relations occurring in the sentence.
pub fn lineage(sentence: &Formula, n: usize) -> Result<GroundCircuit> {
    let symbols = sentence
        .relations()
        .into_iter()
        .map(|(name, arity)| RelationSymbol { name, arity });
    lineage_over(sentence, TupleIndex::new(symbols, n)?)
}

/// Lineage whose universe is `Tup(n)` of the whole vocabulary.
pub fn lineage_in(sentence: &Formula, n: usize, vocab: &WeightedVocabulary) -> Result<GroundCircuit> {
    let symbols = vocab.relations().iter().map(|r| r.symbol.clone());
    lineage_over(sentence, TupleIndex::new(symbols, n)?)
}

pub fn lineage_over(sentence: &Formula, universe: TupleIndex) -> Result<GroundCircuit> {
    let free = sentence.free_vars();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free.into_iter().collect()));
    }
    let n = universe.domain_size();
    let size = ground_size(sentence, n);
    if size > GROUND_LIMIT {
        return Err(Error::ResourceCap {
            what: "ground formula nodes",
            limit: GROUND_LIMIT,
            actual: size,
        });
    }
    let root = ground(sentence, &universe, &mut BTreeMap::new())?;
    Ok(GroundCircuit { root, universe })
}

/// Largest grounding built before giving up.
pub const GROUND_LIMIT: usize = 1 << 21;

/// Nodes in the unsimplified grounding over `n` elements (saturating).
fn ground_size(f: &Formula, n: usize) -> usize {
    match f {
        Formula::Forall(_, body) | Formula::Exists(_, body) => n.saturating_mul(ground_size(body, n)).saturating_add(1),
        _ => {
            let mut total = 1usize;
            for c in children(f) {
                total = total.saturating_add(ground_size(c, n));
            }
            total
        }
    }
}

fn children(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::Not(a) => vec![a],
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => vec![a, b],
        _ => vec![],
    }
}

fn ground(f: &Formula, u: &TupleIndex, env: &mut BTreeMap<String, usize>) -> Result<Circuit> {
    Ok(match f {
        Formula::True => Circuit::Const(true),
        Formula::False => Circuit::Const(false),
        Formula::Atom { rel, args } => {
            let r = u
                .position(rel)
                .ok_or_else(|| Error::UndeclaredSymbol(rel.clone()))?;
            let arity = u.symbols()[r].arity;
            if arity != args.len() {
                return Err(Error::ArityMismatch {
                    name: rel.clone(),
                    expected: arity,
                    found: args.len(),
                });
            }
            let consts: Vec<usize> = args.iter().map(|a| env[a]).collect();
            Circuit::Var(u.index(r, &consts))
        }
        Formula::Eq(a, b) => Circuit::Const(env[a] == env[b]),
        Formula::Not(a) => Circuit::not(ground(a, u, env)?),
        Formula::And(a, b) => Circuit::and([ground(a, u, env)?, ground(b, u, env)?]),
        Formula::Or(a, b) => Circuit::or([ground(a, u, env)?, ground(b, u, env)?]),
        Formula::Implies(a, b) => {
            Circuit::or([Circuit::not(ground(a, u, env)?), ground(b, u, env)?])
        }
        Formula::Iff(a, b) => Circuit::iff(ground(a, u, env)?, ground(b, u, env)?),
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let saved = env.get(v).copied();
            let mut parts = Vec::with_capacity(u.domain_size());
            let universal = matches!(f, Formula::Forall(..));
            for c in 0..u.domain_size() {
                env.insert(v.clone(), c);
                let g = ground(body, u, env)?;
                // short-circuit on an absorbing constant
                if g == Circuit::Const(!universal) {
                    parts = vec![g];
                    break;
                }
                parts.push(g);
            }
            match saved {
                Some(c) => env.insert(v.clone(), c),
                None => env.remove(v),
            };
            if universal {
                Circuit::and(parts)
            } else {
                Circuit::or(parts)
            }
        }
    })
}
