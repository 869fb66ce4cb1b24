#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use liftcount::arith::{int, pow, ratio};
use liftcount::cq::QueryHypergraph;
use liftcount::ground::OracleConfig;
use liftcount::logic::formula::{self as f, Formula, Quantifier};
use liftcount::logic::{RelationSymbol, WeightedVocabulary};
use liftcount::Rational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn oracle() -> OracleConfig {
    OracleConfig::with_cap(64)
}

pub const POOL: [(&str, usize); 5] = [("P", 0), ("U", 1), ("V", 1), ("R", 2), ("E", 2)];

pub fn weight_choices() -> Vec<Rational> {
    vec![int(1), int(2), int(-1), ratio(1, 2), int(3), ratio(-2, 3), int(0)]
}

/// Up to three symbols from the pool, with random weights.
pub fn random_vocab(rng: &mut ChaCha8Rng) -> WeightedVocabulary {
    let k = rng.gen_range(1..=3);
    let mut pool = POOL.to_vec();
    pool.shuffle(rng);
    let mut v = WeightedVocabulary::new();
    let ws = weight_choices();
    for (name, arity) in pool.into_iter().take(k) {
        let w = ws.choose(rng).unwrap().clone();
        let wbar = ws.choose(rng).unwrap().clone();
        v.add(name, arity, w, wbar).unwrap();
    }
    v
}

fn leaf(rng: &mut ChaCha8Rng, bound: &[&'static str], vocab: &WeightedVocabulary, equality: bool) -> Option<Formula> {
    let mut options: Vec<Formula> = Vec::new();
    for r in vocab.relations() {
        if r.symbol.arity == 0 || !bound.is_empty() {
            let args: Vec<&str> = (0..r.symbol.arity).map(|_| *bound.choose(rng).unwrap()).collect();
            options.push(f::atom(&r.symbol.name, args));
        }
    }
    if equality && !bound.is_empty() {
        options.push(f::eq(bound.choose(rng).unwrap(), bound.choose(rng).unwrap()));
    }
    options.choose(rng).cloned()
}

fn node(
    rng: &mut ChaCha8Rng,
    depth: usize,
    bound: &[&'static str],
    vocab: &WeightedVocabulary,
    equality: bool,
) -> Formula {
    if depth == 0 || rng.gen_bool(0.15) {
        if let Some(l) = leaf(rng, bound, vocab, equality) {
            return l;
        }
    }
    let depth = depth.saturating_sub(1);
    let quantify = bound.is_empty() || depth == 0 || rng.gen_bool(if bound.len() == 1 { 0.4 } else { 0.15 });
    if quantify {
        let fresh: Vec<&'static str> = ["x", "y"].into_iter().filter(|v| !bound.contains(v)).collect();
        let v = if !fresh.is_empty() && rng.gen_bool(0.85) {
            *fresh.choose(rng).unwrap()
        } else {
            *["x", "y"].choose(rng).unwrap()
        };
        let mut inner: Vec<&'static str> = bound.to_vec();
        if !inner.contains(&v) {
            inner.push(v);
        }
        let q = if rng.gen_bool(0.5) { Quantifier::Forall } else { Quantifier::Exists };
        let body = if depth == 0 {
            leaf(rng, &inner, vocab, equality).unwrap()
        } else {
            node(rng, depth, &inner, vocab, equality)
        };
        return f::quantify(q, v, body);
    }
    let a = node(rng, depth, bound, vocab, equality);
    match rng.gen_range(0..5) {
        0 => f::not(a),
        1 => f::and(a, node(rng, depth, bound, vocab, equality)),
        2 => f::or(a, node(rng, depth, bound, vocab, equality)),
        3 => f::implies(a, node(rng, depth, bound, vocab, equality)),
        _ => f::iff(a, node(rng, depth, bound, vocab, equality)),
    }
}

/// A random sentence over the variables `x` and `y` and the vocabulary's
/// relations. The vocabulary is trimmed to the relations that occur.
pub fn random_fo2(rng: &mut ChaCha8Rng, equality: bool) -> (Formula, WeightedVocabulary) {
    loop {
        let vocab = random_vocab(rng);
        let depth = rng.gen_range(3..=5);
        let phi = node(rng, depth, &[], &vocab, equality);
        assert!(phi.is_sentence());
        if equality && !phi.has_equality() {
            continue;
        }
        let used = phi.relations();
        if used.is_empty() {
            continue;
        }
        let mut trimmed = WeightedVocabulary::new();
        for r in vocab.relations() {
            if used.contains_key(&r.symbol.name) {
                trimmed.add(r.symbol.name.clone(), r.symbol.arity, r.w.clone(), r.wbar.clone()).unwrap();
            }
        }
        return (phi, trimmed);
    }
}

/// Formulas over a fixed signature, free variables allowed.
pub fn formula_strategy() -> impl Strategy<Value = Formula> {
    let var = prop::sample::select(vec!["x", "y", "z"]);
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        Just(f::atom::<&str>("P", [])),
        var.clone().prop_map(|v| f::atom("U", [v])),
        (var.clone(), var.clone()).prop_map(|(a, b)| f::atom("R", [a, b])),
        (var.clone(), var.clone()).prop_map(|(a, b)| f::eq(a, b)),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(f::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| f::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| f::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| f::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| f::iff(a, b)),
            (var.clone(), inner.clone()).prop_map(|(v, a)| f::quantify(Quantifier::Forall, v, a)),
            (var.clone(), inner).prop_map(|(v, a)| f::quantify(Quantifier::Exists, v, a)),
        ]
    })
}

/// Closes a formula under universal quantifiers.
pub fn close(phi: Formula) -> Formula {
    let free: Vec<String> = phi.free_vars().into_iter().collect();
    f::forall_all(&free, phi)
}

pub fn signature() -> WeightedVocabulary {
    WeightedVocabulary::unit([
        RelationSymbol::new("P", 0),
        RelationSymbol::new("U", 1),
        RelationSymbol::new("R", 2),
    ])
    .unwrap()
}

/// `Pr(Q)` by enumerating every world over the edges' tuples, each edge
/// ranging over the product of its variables' domains.
pub fn cq_oracle(h: &QueryHypergraph) -> Rational {
    let size: BTreeMap<&str, u64> = h.variables.iter().map(|(v, n)| (v.as_str(), *n)).collect();
    let mut offsets = Vec::new();
    let mut total = 0usize;
    for e in &h.edges {
        offsets.push(total);
        total += e.vars.iter().map(|v| size[v.as_str()] as usize).product::<usize>();
    }
    assert!(total <= 20, "oracle limited to 20 tuples");
    // tuple bits needed by each full assignment
    let vars: Vec<&str> = h.variables.iter().map(|(v, _)| v.as_str()).collect();
    let mut assignments: Vec<u32> = Vec::new();
    if vars.iter().all(|v| size[v] > 0) {
        let mut values = vec![0u64; vars.len()];
        loop {
            let mut mask = 0u32;
            for (i, e) in h.edges.iter().enumerate() {
                let mut idx = 0usize;
                for v in &e.vars {
                    let pos = vars.iter().position(|w| w == v).unwrap();
                    idx = idx * size[v.as_str()] as usize + values[pos] as usize;
                }
                mask |= 1 << (offsets[i] + idx);
            }
            assignments.push(mask);
            let mut k = 0;
            loop {
                if k == vars.len() {
                    break;
                }
                values[k] += 1;
                if values[k] < size[vars[k]] {
                    break;
                }
                values[k] = 0;
                k += 1;
            }
            if k == vars.len() {
                break;
            }
        }
    }
    let edge_of: Vec<usize> = (0..total)
        .map(|b| offsets.iter().rposition(|&o| o <= b).unwrap())
        .collect();
    let mut tally: HashMap<Vec<u32>, u64> = HashMap::new();
    for world in 0u32..(1u32 << total) {
        if assignments.iter().any(|&m| world & m == m) {
            let mut k = vec![0u32; h.edges.len()];
            for (b, &e) in edge_of.iter().enumerate() {
                if world >> b & 1 == 1 {
                    k[e] += 1;
                }
            }
            *tally.entry(k).or_default() += 1;
        }
    }
    let sizes: Vec<u64> = (0..h.edges.len())
        .map(|i| (if i + 1 < offsets.len() { offsets[i + 1] } else { total } - offsets[i]) as u64)
        .collect();
    let mut out = Rational::zero();
    for (k, count) in tally {
        let mut w = Rational::from_integer(count.into());
        for (i, e) in h.edges.iter().enumerate() {
            w *= pow(&e.p, k[i] as u64) * pow(&(Rational::one() - &e.p), sizes[i] - k[i] as u64);
        }
        out += w;
    }
    out
}

/// Total number of ground tuples of a hypergraph.
pub fn tuple_count(h: &QueryHypergraph) -> u64 {
    h.edges
        .iter()
        .map(|e| {
            e.vars
                .iter()
                .map(|v| h.variables.iter().find(|(w, _)| w == v).unwrap().1)
                .product::<u64>()
        })
        .sum()
}

pub fn probability_choices() -> Vec<Rational> {
    vec![ratio(1, 2), ratio(1, 3), ratio(3, 4), int(2), ratio(-1, 2), ratio(5, 4)]
}

/// A random self-join-free query over up to four variables.
pub fn random_cq(rng: &mut ChaCha8Rng) -> QueryHypergraph {
    let names = ["x", "y", "z", "u"];
    let nv = rng.gen_range(1..=4);
    let ne = rng.gen_range(1..=4);
    let ps = probability_choices();
    let mut edges = Vec::new();
    for i in 0..ne {
        let arity = rng.gen_range(0..=nv.min(3));
        let mut vars: Vec<String> = names[..nv].iter().map(|s| s.to_string()).collect();
        vars.shuffle(rng);
        vars.truncate(arity);
        edges.push(liftcount::cq::Edge {
            rel: format!("R{i}"),
            vars,
            p: ps.choose(rng).unwrap().clone(),
        });
    }
    let variables = names[..nv]
        .iter()
        .filter(|v| edges.iter().any(|e| e.vars.iter().any(|w| w == *v)))
        .map(|v| (v.to_string(), rng.gen_range(1..=3)))
        .collect();
    QueryHypergraph::new(variables, edges).unwrap()
}
