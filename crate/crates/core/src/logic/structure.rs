//! Finite structures over the domain `[n] = {1, ..., n}` and model checking.

use std::collections::BTreeSet;
use std::fmt;

use super::formula::Formula;
use super::vocab::RelationSymbol;
use crate::error::{Error, Result};

/// A ground tuple `R(a_1, ..., a_k)`; constants are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub rel: String,
    pub args: Vec<usize>,
}

impl GroundAtom {
    pub fn new(rel: impl Into<String>, args: impl Into<Vec<usize>>) -> Self {
        GroundAtom {
            rel: rel.into(),
            args: args.into(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return write!(f, "{}", self.rel);
        }
        let args: Vec<String> = self.args.iter().map(|a| a.to_string()).collect();
        write!(f, "{}({})", self.rel, args.join(","))
    }
}

/// Dense numbering of `Tup(n)`: relations in the given order, tuples of each
/// relation in lexicographic order of their (0-based) arguments.
#[derive(Clone, Debug)]
pub struct TupleIndex {
    n: usize,
    symbols: Vec<RelationSymbol>,
    offsets: Vec<usize>,
    total: usize,
}

impl TupleIndex {
    pub fn new(symbols: impl IntoIterator<Item = RelationSymbol>, n: usize) -> Result<Self> {
        let symbols: Vec<RelationSymbol> = symbols.into_iter().collect();
        let mut offsets = Vec::with_capacity(symbols.len());
        let mut total = 0usize;
        let overflow = || Error::ResourceCap {
            what: "ground tuple table",
            limit: usize::MAX,
            actual: usize::MAX,
        };
        for s in &symbols {
            offsets.push(total);
            let count = n.checked_pow(s.arity as u32).ok_or_else(overflow)?;
            total = total.checked_add(count).ok_or_else(overflow)?;
        }
        Ok(TupleIndex {
            n,
            symbols,
            offsets,
            total,
        })
    }

    pub fn domain_size(&self) -> usize {
        self.n
    }

    pub fn symbols(&self) -> &[RelationSymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn position(&self, rel: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == rel)
    }

    /// Index of relation number `rel` applied to 0-based `args`.
    pub fn index(&self, rel: usize, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.symbols[rel].arity);
        self.offsets[rel] + args.iter().fold(0, |acc, &a| acc * self.n + a)
    }

    pub fn index_of(&self, atom: &GroundAtom) -> Option<usize> {
        let rel = self.position(&atom.rel)?;
        if atom.args.len() != self.symbols[rel].arity
            || atom.args.iter().any(|&a| a == 0 || a > self.n)
        {
            return None;
        }
        let zero_based: Vec<usize> = atom.args.iter().map(|a| a - 1).collect();
        Some(self.index(rel, &zero_based))
    }

    /// Relation number of tuple `i`.
    pub fn relation_of(&self, i: usize) -> usize {
        match self.offsets.binary_search(&i) {
            Ok(mut r) => {
                // empty relations (n = 0 with arity > 0) share offsets
                while r + 1 < self.offsets.len() && self.offsets[r + 1] == i {
                    r += 1;
                }
                r
            }
            Err(r) => r - 1,
        }
    }

    pub fn atom(&self, i: usize) -> GroundAtom {
        let rel = self.relation_of(i);
        let arity = self.symbols[rel].arity;
        let mut rest = i - self.offsets[rel];
        let mut args = vec![0; arity];
        for slot in args.iter_mut().rev() {
            *slot = rest % self.n + 1;
            rest /= self.n;
        }
        GroundAtom::new(self.symbols[rel].name.clone(), args)
    }
}

/// A possible world: the set of true ground tuples over `[n]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Structure {
    pub domain_size: usize,
    pub tuples: BTreeSet<GroundAtom>,
}

impl Structure {
    pub fn new(domain_size: usize) -> Self {
        Structure {
            domain_size,
            tuples: BTreeSet::new(),
        }
    }

    pub fn insert(&mut self, atom: GroundAtom) -> Result<()> {
        if atom.args.iter().any(|&a| a == 0 || a > self.domain_size) {
            return Err(Error::Invalid(format!(
                "tuple {atom} has a constant outside [1..{}]",
                self.domain_size
            )));
        }
        self.tuples.insert(atom);
        Ok(())
    }

    pub fn with(mut self, rel: &str, args: &[usize]) -> Self {
        self.insert(GroundAtom::new(rel, args)).expect("tuple in range");
        self
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.tuples.contains(atom)
    }

    /// Decodes a bitset over `index` into a structure.
    pub fn from_bits(index: &TupleIndex, bits: &[u64]) -> Self {
        let mut s = Structure::new(index.domain_size());
        for i in 0..index.len() {
            if bit(bits, i) {
                s.tuples.insert(index.atom(i));
            }
        }
        s
    }

    /// Encodes into a bitset over `index`; tuples of relations missing from
    /// the index are ignored.
    pub fn to_bits(&self, index: &TupleIndex) -> Vec<u64> {
        let mut bits = vec![0u64; index.len().div_ceil(64).max(1)];
        for t in &self.tuples {
            if let Some(i) = index.index_of(t) {
                bits[i / 64] |= 1 << (i % 64);
            }
        }
        bits
    }
}

#[inline]
pub(crate) fn bit(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

#[derive(Clone, Debug)]
enum Node {
    Const(bool),
    Atom { offset: usize, slots: Vec<usize> },
    Eq(usize, usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Forall(usize, Box<Node>),
    Exists(usize, Box<Node>),
}

/// A sentence compiled against a [`TupleIndex`] for fast repeated
/// evaluation on bitset-encoded structures.
#[derive(Clone, Debug)]
pub struct CompiledSentence {
    root: Node,
    slots: usize,
    n: usize,
}

impl CompiledSentence {
    pub fn new(sentence: &Formula, index: &TupleIndex) -> Result<Self> {
        let free = sentence.free_vars();
        if !free.is_empty() {
            return Err(Error::FreeVariables(free.into_iter().collect()));
        }
        let mut scope = Vec::new();
        let mut slots = 0;
        let root = compile(sentence, index, &mut scope, &mut slots)?;
        Ok(CompiledSentence {
            root,
            slots,
            n: index.domain_size(),
        })
    }

    pub fn eval(&self, bits: &[u64]) -> bool {
        let mut env = vec![0usize; self.slots];
        eval(&self.root, bits, &mut env, self.n)
    }

    /// Compiles a formula whose free variables are among `free`; they are
    /// bound by position in [`CompiledSentence::eval_at`].
    pub fn with_free_vars(formula: &Formula, free: &[String], index: &TupleIndex) -> Result<Self> {
        let unbound: Vec<String> = formula
            .free_vars()
            .into_iter()
            .filter(|v| !free.contains(v))
            .collect();
        if !unbound.is_empty() {
            return Err(Error::FreeVariables(unbound));
        }
        let mut scope = free.to_vec();
        let mut slots = scope.len();
        let root = compile(formula, index, &mut scope, &mut slots)?;
        Ok(CompiledSentence {
            root,
            slots,
            n: index.domain_size(),
        })
    }

    /// Evaluates with the free variables set to the 0-based `values`.
    pub fn eval_at(&self, bits: &[u64], values: &[usize]) -> bool {
        let mut env = vec![0usize; self.slots];
        env[..values.len()].copy_from_slice(values);
        eval(&self.root, bits, &mut env, self.n)
    }
}

fn compile(
    f: &Formula,
    index: &TupleIndex,
    scope: &mut Vec<String>,
    slots: &mut usize,
) -> Result<Node> {
    let slot_of = |v: &String, scope: &Vec<String>| scope.iter().rposition(|s| s == v).unwrap();
    Ok(match f {
        Formula::True => Node::Const(true),
        Formula::False => Node::Const(false),
        Formula::Atom { rel, args } => {
            let r = index
                .position(rel)
                .ok_or_else(|| Error::UndeclaredSymbol(rel.clone()))?;
            let arity = index.symbols()[r].arity;
            if arity != args.len() {
                return Err(Error::ArityMismatch {
                    name: rel.clone(),
                    expected: arity,
                    found: args.len(),
                });
            }
            Node::Atom {
                offset: index.offsets[r],
                slots: args.iter().map(|a| slot_of(a, scope)).collect(),
            }
        }
        Formula::Eq(a, b) => Node::Eq(slot_of(a, scope), slot_of(b, scope)),
        Formula::Not(a) => Node::Not(Box::new(compile(a, index, scope, slots)?)),
        Formula::And(a, b) => Node::And(
            Box::new(compile(a, index, scope, slots)?),
            Box::new(compile(b, index, scope, slots)?),
        ),
        Formula::Or(a, b) => Node::Or(
            Box::new(compile(a, index, scope, slots)?),
            Box::new(compile(b, index, scope, slots)?),
        ),
        Formula::Implies(a, b) => Node::Implies(
            Box::new(compile(a, index, scope, slots)?),
            Box::new(compile(b, index, scope, slots)?),
        ),
        Formula::Iff(a, b) => Node::Iff(
            Box::new(compile(a, index, scope, slots)?),
            Box::new(compile(b, index, scope, slots)?),
        ),
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            scope.push(v.clone());
            let slot = scope.len() - 1;
            *slots = (*slots).max(scope.len());
            let inner = Box::new(compile(body, index, scope, slots)?);
            scope.pop();
            if matches!(f, Formula::Forall(..)) {
                Node::Forall(slot, inner)
            } else {
                Node::Exists(slot, inner)
            }
        }
    })
}

fn eval(node: &Node, bits: &[u64], env: &mut [usize], n: usize) -> bool {
    match node {
        Node::Const(b) => *b,
        Node::Atom { offset, slots } => {
            let i = offset + slots.iter().fold(0, |acc, &s| acc * n + env[s]);
            bit(bits, i)
        }
        Node::Eq(a, b) => env[*a] == env[*b],
        Node::Not(a) => !eval(a, bits, env, n),
        Node::And(a, b) => eval(a, bits, env, n) && eval(b, bits, env, n),
        Node::Or(a, b) => eval(a, bits, env, n) || eval(b, bits, env, n),
        Node::Implies(a, b) => !eval(a, bits, env, n) || eval(b, bits, env, n),
        Node::Iff(a, b) => eval(a, bits, env, n) == eval(b, bits, env, n),
        Node::Forall(slot, body) => (0..n).all(|c| {
            env[*slot] = c;
            eval(body, bits, env, n)
        }),
        Node::Exists(slot, body) => (0..n).any(|c| {
            env[*slot] = c;
            eval(body, bits, env, n)
        }),
    }
}

/// `D |= sentence`. Relations of the sentence absent from `D` are empty.
pub fn evaluate(sentence: &Formula, d: &Structure) -> Result<bool> {
    let symbols = sentence
        .relations()
        .into_iter()
        .map(|(name, arity)| RelationSymbol { name, arity });
    let index = TupleIndex::new(symbols, d.domain_size)?;
    let compiled = CompiledSentence::new(sentence, &index)?;
    Ok(compiled.eval(&d.to_bits(&index)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_inferring;

    fn check(text: &str, d: &Structure) -> bool {
        evaluate(&parse_inferring(text).unwrap().0, d).unwrap()
    }

    #[test]
    fn spec_examples() {
        let d = Structure::new(2).with("R", &[1, 2]).with("R", &[2, 2]);
        assert!(check("forall x. exists y. R(x,y)", &d));
        assert!(!check("forall x. exists y. R(x,y)", &Structure::new(2)));
        assert!(!check("exists x. exists y. x != y", &Structure::new(1)));
        assert!(check("exists x. exists y. x != y", &Structure::new(2)));
    }

    #[test]
    fn empty_domain() {
        let d = Structure::new(0);
        assert!(check("forall x. R(x)", &d));
        assert!(!check("exists x. true", &d));
        assert!(check("true", &d));
    }

    #[test]
    fn shadowing() {
        let d = Structure::new(2).with("R", &[1]);
        assert!(check("exists x. R(x) & (forall x. x = x)", &d));
        assert!(!check("exists x. (forall x. R(x))", &d));
    }

    #[test]
    fn free_variables_rejected() {
        let (f, _) = parse_inferring("R(x)").unwrap();
        assert!(matches!(
            evaluate(&f, &Structure::new(1)),
            Err(Error::FreeVariables(_))
        ));
    }

    #[test]
    fn index_round_trip() {
        let idx = TupleIndex::new(
            [
                RelationSymbol::new("P", 0),
                RelationSymbol::new("R", 2),
                RelationSymbol::new("U", 1),
            ],
            3,
        )
        .unwrap();
        assert_eq!(idx.len(), 1 + 9 + 3);
        for i in 0..idx.len() {
            assert_eq!(idx.index_of(&idx.atom(i)), Some(i));
        }
        let empty = TupleIndex::new([RelationSymbol::new("R", 2), RelationSymbol::new("P", 0)], 0)
            .unwrap();
        assert_eq!(empty.len(), 1);
        assert_eq!(empty.atom(0), GroundAtom::new("P", vec![]));
    }
}
