//! Conjunctive queries without self-joins over tuple-independent relations.
//!
//! A query is a hypergraph: variables are nodes (each with its own domain
//! size) and atoms are edges carrying the probability of each of their
//! tuples. The reduction rules are
//!
//! - (a) a node in at most one edge is removed; the edge's tuples become
//!   `1 - (1 - p)^n_x`
//! - (b) a single-variable edge `R(x)` is removed by conditioning on the
//!   number `k` of true tuples and restricting `x` to `k` values
//! - (c) an empty edge is removed, multiplying by `p`
//! - (d) two edges over the same nodes merge, with probability `p_R p_S`
//! - (e) two nodes in exactly the same edges merge into one node of size
//!   `n_x n_y`
//!
//! A hypergraph is gamma-acyclic when these rules empty it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{self, Rational};
use crate::error::{Error, Result};
use crate::logic::analyze::{clause_atoms, cq_atoms};
use crate::logic::formula::Formula;
use crate::logic::normal::rectify;
use crate::logic::WeightedVocabulary;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub rel: String,
    pub vars: Vec<String>,
    /// Probability of each tuple; any rational.
    pub p: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryHypergraph {
    pub variables: Vec<(String, u64)>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    IsolatedNode { var: String, edge: Option<String> },
    SingletonEdge { edge: String, var: String },
    EmptyEdge(String),
    DuplicateEdges { kept: String, removed: String },
    EquivalentNodes { kept: String, removed: String },
    Separator(String),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::IsolatedNode { var, edge: Some(e) } => write!(f, "(a) isolated node {var} in {e}"),
            Step::IsolatedNode { var, edge: None } => write!(f, "(a) isolated node {var}"),
            Step::SingletonEdge { edge, var } => write!(f, "(b) singleton edge {edge}({var})"),
            Step::EmptyEdge(e) => write!(f, "(c) empty edge {e}"),
            Step::DuplicateEdges { kept, removed } => write!(f, "(d) edge {removed} merged into {kept}"),
            Step::EquivalentNodes { kept, removed } => write!(f, "(e) node {removed} merged into {kept}"),
            Step::Separator(z) => write!(f, "separator {z}"),
        }
    }
}

impl fmt::Display for QueryHypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges
            .iter()
            .map(|e| format!("{}({})", e.rel, e.vars.join(",")))
            .collect();
        let vars: Vec<String> = self.variables.iter().map(|(v, n)| format!("{v}:{n}")).collect();
        write!(f, "{{{}}} over [{}]", edges.join(", "), vars.join(", "))
    }
}

impl QueryHypergraph {
    pub fn new(variables: Vec<(String, u64)>, edges: Vec<Edge>) -> Result<Self> {
        let mut rels = BTreeSet::new();
        let declared: BTreeSet<&String> = variables.iter().map(|(v, _)| v).collect();
        if declared.len() != variables.len() {
            return Err(Error::Invalid("variable declared twice".into()));
        }
        for e in &edges {
            if !rels.insert(e.rel.as_str()) {
                return Err(Error::Invalid(format!("self-join on `{}`", e.rel)));
            }
            let distinct: BTreeSet<&String> = e.vars.iter().collect();
            if distinct.len() != e.vars.len() {
                return Err(Error::Invalid(format!(
                    "atom `{}` repeats a variable",
                    e.rel
                )));
            }
            if let Some(v) = e.vars.iter().find(|v| !declared.contains(v)) {
                return Err(Error::Invalid(format!("variable `{v}` has no domain")));
            }
        }
        Ok(QueryHypergraph { variables, edges })
    }

    /// Builds the hypergraph of an existential conjunctive sentence. Every
    /// variable ranges over `n` values unless `domains` says otherwise.
    pub fn from_formula(
        phi: &Formula,
        probabilities: &BTreeMap<String, Rational>,
        n: u64,
        domains: &BTreeMap<String, u64>,
    ) -> Result<Self> {
        let atoms = cq_atoms(phi)
            .ok_or_else(|| Error::OutOfScope("not an existential conjunction of atoms".into()))?;
        let names = rectify(phi).variable_names();
        if let Some(v) = domains.keys().find(|v| !names.contains(*v)) {
            return Err(Error::Invalid(format!("--domains names unknown variable `{v}`")));
        }
        let variables = names
            .into_iter()
            .map(|v| {
                let size = domains.get(&v).copied().unwrap_or(n);
                (v, size)
            })
            .collect();
        let edges = atoms
            .into_iter()
            .map(|(rel, vars)| {
                let p = probabilities
                    .get(&rel)
                    .cloned()
                    .ok_or_else(|| Error::UndeclaredSymbol(rel.clone()))?;
                Ok(Edge { rel, vars, p })
            })
            .collect::<Result<_>>()?;
        QueryHypergraph::new(variables, edges)
    }

    fn size(&self, var: &str) -> u64 {
        self.variables.iter().find(|(v, _)| v == var).map_or(0, |(_, n)| *n)
    }

    fn membership(&self, var: &str) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].vars.iter().any(|v| v == var))
            .collect()
    }

    fn remove_var(&mut self, var: &str) {
        self.variables.retain(|(v, _)| v != var);
        for e in &mut self.edges {
            e.vars.retain(|v| v != var);
        }
    }

    fn key(&self) -> String {
        let mut s = String::new();
        for (v, n) in &self.variables {
            s.push_str(&format!("{v}:{n};"));
        }
        for e in &self.edges {
            s.push_str(&format!("{}({})={};", e.rel, e.vars.join(","), e.p));
        }
        s
    }

    /// Applicable rule instances, grouped in the order (c), (d), (e), (a), (b).
    fn candidates(&self) -> Vec<Step> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.vars.is_empty() {
                out.push(Step::EmptyEdge(e.rel.clone()));
            }
        }
        let sets: Vec<BTreeSet<&String>> = self.edges.iter().map(|e| e.vars.iter().collect()).collect();
        for i in 0..self.edges.len() {
            for j in i + 1..self.edges.len() {
                if sets[i] == sets[j] {
                    out.push(Step::DuplicateEdges {
                        kept: self.edges[i].rel.clone(),
                        removed: self.edges[j].rel.clone(),
                    });
                }
            }
        }
        let members: Vec<Vec<usize>> = self.variables.iter().map(|(v, _)| self.membership(v)).collect();
        for i in 0..self.variables.len() {
            for j in i + 1..self.variables.len() {
                if members[i] == members[j] && !members[i].is_empty() {
                    out.push(Step::EquivalentNodes {
                        kept: self.variables[i].0.clone(),
                        removed: self.variables[j].0.clone(),
                    });
                }
            }
        }
        for (i, (v, _)) in self.variables.iter().enumerate() {
            if members[i].len() <= 1 {
                out.push(Step::IsolatedNode {
                    var: v.clone(),
                    edge: members[i].first().map(|&e| self.edges[e].rel.clone()),
                });
            }
        }
        for e in &self.edges {
            if e.vars.len() == 1 {
                out.push(Step::SingletonEdge {
                    edge: e.rel.clone(),
                    var: e.vars[0].clone(),
                });
            }
        }
        out
    }

    fn edge_index(&self, rel: &str) -> usize {
        self.edges.iter().position(|e| e.rel == rel).expect("edge exists")
    }

    /// Variables occurring in every edge.
    pub fn separators(&self) -> Vec<String> {
        if self.edges.is_empty() {
            return Vec::new();
        }
        self.variables
            .iter()
            .filter(|(v, _)| self.edges.iter().all(|e| e.vars.contains(v)))
            .map(|(v, _)| v.clone())
            .collect()
    }
}

/// Structural reduction with rules (a) to (e) only.
pub fn gamma_reduce(h: &QueryHypergraph) -> Result<Vec<Step>> {
    let mut g = h.clone();
    let mut trace = Vec::new();
    while !(g.edges.is_empty() && g.variables.is_empty()) {
        let Some(step) = g.candidates().into_iter().next() else {
            return Err(Error::NotGammaAcyclic(g.to_string()));
        };
        match &step {
            Step::EmptyEdge(r) | Step::DuplicateEdges { removed: r, .. } | Step::SingletonEdge { edge: r, .. } => {
                let i = g.edge_index(r);
                g.edges.remove(i);
            }
            Step::EquivalentNodes { removed: v, .. } | Step::IsolatedNode { var: v, .. } => g.remove_var(v),
            Step::Separator(_) => unreachable!(),
        }
        trace.push(step);
    }
    Ok(trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RuleOrder {
    #[default]
    Default,
    /// Pick uniformly among all applicable rule instances.
    Random(u64),
}

#[derive(Clone, Debug)]
pub struct CqOutcome {
    pub value: Rational,
    /// Steps of the top-level reduction.
    pub trace: Vec<Step>,
}

struct Evaluator {
    rng: Option<ChaCha8Rng>,
    memo: HashMap<String, Rational>,
}

impl Evaluator {
    fn pick(&mut self, g: &QueryHypergraph) -> Option<Step> {
        let mut c = g.candidates();
        if c.is_empty() {
            return None;
        }
        let i = match &mut self.rng {
            Some(rng) => rng.gen_range(0..c.len()),
            None => 0,
        };
        Some(c.swap_remove(i))
    }

    fn prob(&mut self, g: QueryHypergraph, mut trace: Option<&mut Vec<Step>>) -> Result<Rational> {
        let key = g.key();
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let mut g = g;
        let mut factor = Rational::one();
        let value = loop {
            if g.variables.iter().any(|(_, n)| *n == 0) {
                break Rational::zero();
            }
            if g.edges.is_empty() {
                break factor;
            }
            let step = match self.pick(&g) {
                Some(s) => s,
                None => {
                    let z = g
                        .separators()
                        .into_iter()
                        .next()
                        .ok_or_else(|| Error::NotGammaAcyclic(g.to_string()))?;
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(Step::Separator(z.clone()));
                    }
                    let nz = g.size(&z);
                    let mut sub = g.clone();
                    sub.remove_var(&z);
                    let q = self.prob(sub, None)?;
                    break factor * (Rational::one() - arith::pow(&(Rational::one() - q), nz));
                }
            };
            if let Some(t) = trace.as_deref_mut() {
                t.push(step.clone());
            }
            match &step {
                Step::EmptyEdge(r) => {
                    let e = g.edges.remove(g.edge_index(r));
                    factor *= e.p;
                }
                Step::DuplicateEdges { kept, removed } => {
                    let e = g.edges.remove(g.edge_index(removed));
                    let k = g.edge_index(kept);
                    g.edges[k].p *= e.p;
                }
                Step::EquivalentNodes { kept, removed } => {
                    let n = g.size(kept) * g.size(removed);
                    g.remove_var(removed);
                    for (v, size) in &mut g.variables {
                        if v == kept {
                            *size = n;
                        }
                    }
                }
                Step::IsolatedNode { var, edge } => {
                    if let Some(r) = edge {
                        let n = g.size(var);
                        let k = g.edge_index(r);
                        let p = &g.edges[k].p;
                        g.edges[k].p = Rational::one() - arith::pow(&(Rational::one() - p), n);
                    }
                    g.remove_var(var);
                }
                Step::SingletonEdge { edge, var } => {
                    let e = g.edges.remove(g.edge_index(edge));
                    let n = g.size(var);
                    let q = Rational::one() - &e.p;
                    let mut sum = Rational::zero();
                    for k in 1..=n {
                        let mut sub = g.clone();
                        for (v, size) in &mut sub.variables {
                            if v == var {
                                *size = k;
                            }
                        }
                        let rest = self.prob(sub, None)?;
                        if rest.is_zero() {
                            continue;
                        }
                        sum += Rational::from_integer(BigInt::from(arith::binomial(n, k)))
                            * arith::pow(&e.p, k)
                            * arith::pow(&q, n - k)
                            * rest;
                    }
                    break factor * sum;
                }
                Step::Separator(_) => unreachable!(),
            }
        };
        self.memo.insert(key, value.clone());
        Ok(value)
    }
}

pub fn cq_probability(h: &QueryHypergraph) -> Result<Rational> {
    Ok(cq_probability_with(h, RuleOrder::Default)?.value)
}

/// Falls back to the separator rule when (a) to (e) stall.
pub fn cq_probability_with(h: &QueryHypergraph, order: RuleOrder) -> Result<CqOutcome> {
    let mut ev = Evaluator {
        rng: match order {
            RuleOrder::Default => None,
            RuleOrder::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        },
        memo: HashMap::new(),
    };
    let mut trace = Vec::new();
    let value = ev.prob(h.clone(), Some(&mut trace))?;
    Ok(CqOutcome { value, trace })
}

/// `z` must occur in every edge. The sub-queries for distinct values of `z`
/// use disjoint tuples, so `Pr(Q) = 1 - (1 - Pr(Q[a/z]))^n_z`.
pub fn separator_rule(h: &QueryHypergraph, z: &str) -> Result<Rational> {
    if !h.separators().iter().any(|s| s == z) {
        return Err(Error::Invalid(format!("`{z}` does not occur in every atom")));
    }
    let nz = h.size(z);
    let mut sub = h.clone();
    sub.remove_var(z);
    let q = cq_probability(&sub)?;
    Ok(Rational::one() - arith::pow(&(Rational::one() - q), nz))
}

/// Tuple probabilities `w / (w + wbar)`.
pub fn probabilities(vocab: &WeightedVocabulary) -> Result<BTreeMap<String, Rational>> {
    vocab
        .relations()
        .iter()
        .map(|r| {
            let total = &r.w + &r.wbar;
            if total.is_zero() {
                return Err(Error::OutOfScope(format!(
                    "`{}` has w + wbar = 0 and no tuple probability",
                    r.symbol.name
                )));
            }
            Ok((r.symbol.name.clone(), &r.w / total))
        })
        .collect()
}

/// WFOMC of a self-join-free conjunctive sentence: `Pr(Q)` times the total
/// weight `prod (w + wbar)^#tuples` of the vocabulary. A relation of the
/// query has one tuple per assignment of its variables' domains; other
/// relations range over `n`.
pub fn cq_wfomc(
    phi: &Formula,
    n: u64,
    vocab: &WeightedVocabulary,
    domains: &BTreeMap<String, u64>,
) -> Result<Rational> {
    let mut vocab = vocab.clone();
    vocab.extend_unit(&phi.relations())?;
    let used = phi.relations();
    let mut probs = BTreeMap::new();
    for r in vocab.relations() {
        if used.contains_key(&r.symbol.name) {
            let total = &r.w + &r.wbar;
            if total.is_zero() {
                return Err(Error::OutOfScope(format!(
                    "`{}` has w + wbar = 0 and no tuple probability",
                    r.symbol.name
                )));
            }
            probs.insert(r.symbol.name.clone(), &r.w / total);
        }
    }
    let h = QueryHypergraph::from_formula(phi, &probs, n, domains)?;
    let mut scale = Rational::one();
    for r in vocab.relations() {
        let tuples = match h.edges.iter().find(|e| e.rel == r.symbol.name) {
            Some(e) => e.vars.iter().map(|v| h.size(v)).product(),
            None => n.pow(r.symbol.arity as u32),
        };
        scale *= arith::pow(&(&r.w + &r.wbar), tuples);
    }
    Ok(cq_probability(&h)? * scale)
}

/// Probability of a conjunction of positive universal clauses, by
/// inclusion-exclusion over disjunctions of clauses, each evaluated as the
/// complement of its dual conjunctive query.
pub fn clause_conjunction_probability(
    clauses: &[Formula],
    n: u64,
    probabilities: &BTreeMap<String, Rational>,
) -> Result<Rational> {
    let atoms: Vec<_> = clauses
        .iter()
        .map(|c| {
            clause_atoms(c).ok_or_else(|| {
                Error::OutOfScope(format!("`{c}` is not a positive equality-free clause"))
            })
        })
        .collect::<Result<_>>()?;
    if clauses.len() >= 20 {
        return Err(Error::ResourceCap {
            what: "clause subsets",
            limit: 1 << 19,
            actual: 1 << clauses.len(),
        });
    }
    let mut total = Rational::zero();
    for mask in 1u32..(1 << clauses.len()) {
        let mut vars = Vec::new();
        let mut edges = Vec::new();
        for (i, clause) in atoms.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let mut rename: BTreeMap<&String, String> = BTreeMap::new();
            for (rel, args) in clause {
                let args = args
                    .iter()
                    .map(|a| {
                        rename
                            .entry(a)
                            .or_insert_with(|| {
                                let v = format!("v{i}_{}", vars.len());
                                vars.push((v.clone(), n));
                                v
                            })
                            .clone()
                    })
                    .collect();
                let p = probabilities
                    .get(rel)
                    .ok_or_else(|| Error::UndeclaredSymbol(rel.clone()))?;
                edges.push(Edge {
                    rel: rel.clone(),
                    vars: args,
                    p: Rational::one() - p,
                });
            }
        }
        let dual = QueryHypergraph::new(vars, edges)
            .map_err(|e| Error::OutOfScope(format!("dual query: {e}")))?;
        let clause = Rational::one() - cq_probability(&dual)?;
        if mask.count_ones() % 2 == 1 {
            total += clause;
        } else {
            total -= clause;
        }
    }
    Ok(total)
}
