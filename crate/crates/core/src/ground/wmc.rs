//! Weighted model counting of ground circuits: exhaustive enumeration and a
//! component-caching DPLL counter. Both are exact and must agree.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use super::circuit::{Circuit, GroundCircuit};
use crate::arith::{self, Rational};
use crate::error::{Error, Result};
use crate::logic::{GroundAtom, TupleIndex, WeightedVocabulary};

/// Per-tuple weights over a universe. Symmetric per relation, with optional
/// per-tuple overrides.
#[derive(Clone, Debug)]
pub struct TupleWeighting {
    per_relation: Vec<(Rational, Rational)>,
    overrides: BTreeMap<usize, (Rational, Rational)>,
}

impl TupleWeighting {
    /// Extends the vocabulary's symmetric weights to every tuple of
    /// `universe`. Relations are looked up by name.
    pub fn symmetric(vocab: &WeightedVocabulary, universe: &TupleIndex) -> Result<Self> {
        let per_relation = universe
            .symbols()
            .iter()
            .map(|s| {
                vocab
                    .get(&s.name)
                    .map(|r| (r.w.clone(), r.wbar.clone()))
                    .ok_or_else(|| Error::UndeclaredSymbol(s.name.clone()))
            })
            .collect::<Result<_>>()?;
        Ok(TupleWeighting {
            per_relation,
            overrides: BTreeMap::new(),
        })
    }

    pub fn unit(universe: &TupleIndex) -> Self {
        TupleWeighting {
            per_relation: vec![(Rational::one(), Rational::one()); universe.symbols().len()],
            overrides: BTreeMap::new(),
        }
    }

    /// Gives one tuple its own weight pair.
    pub fn set_tuple(
        &mut self,
        universe: &TupleIndex,
        atom: &GroundAtom,
        w: Rational,
        wbar: Rational,
    ) -> Result<()> {
        let i = universe
            .index_of(atom)
            .ok_or_else(|| Error::Invalid(format!("tuple {atom} is not in the universe")))?;
        self.overrides.insert(i, (w, wbar));
        Ok(())
    }

    pub fn weight(&self, universe: &TupleIndex, tuple: usize) -> (&Rational, &Rational) {
        if let Some((w, wb)) = self.overrides.get(&tuple) {
            return (w, wb);
        }
        let (w, wb) = &self.per_relation[universe.relation_of(tuple)];
        (w, wb)
    }

    /// Product of `w + wbar` over the universe tuples not in `used`.
    fn absent_factor(&self, universe: &TupleIndex, used: &[usize]) -> Rational {
        let mut missing: Vec<u64> = universe
            .symbols()
            .iter()
            .map(|s| (universe.domain_size() as u64).pow(s.arity as u32))
            .collect();
        let mut acc = Rational::one();
        for &t in used {
            if !self.overrides.contains_key(&t) {
                missing[universe.relation_of(t)] -= 1;
            }
        }
        for (&t, (w, wb)) in &self.overrides {
            missing[universe.relation_of(t)] -= 1;
            if used.binary_search(&t).is_err() {
                acc *= w + wb;
            }
        }
        for (count, (w, wb)) in missing.iter().zip(&self.per_relation) {
            acc *= arith::pow(&(w + wb), *count);
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Engine {
    /// Enumeration for small circuits, DPLL otherwise.
    #[default]
    Auto,
    Enumerate,
    Dpll,
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    /// Largest number of distinct circuit variables accepted.
    pub cap: usize,
    pub engine: Engine,
}

pub const DEFAULT_CAP: usize = 24;

impl Default for OracleConfig {
    fn default() -> Self {
        let cap = std::env::var("LIFTCOUNT_CAP")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_CAP);
        OracleConfig {
            cap,
            engine: Engine::Auto,
        }
    }
}

impl OracleConfig {
    pub fn with_cap(cap: usize) -> Self {
        OracleConfig {
            cap,
            ..Self::default()
        }
    }

    pub fn engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }
}

/// `WMC(F, w, wbar)`: the weighted sum over all assignments of the universe
/// satisfying `F`.
pub fn wmc(g: &GroundCircuit, weights: &TupleWeighting, config: &OracleConfig) -> Result<Rational> {
    let used: Vec<usize> = g.vars().into_iter().collect();
    if used.len() > config.cap {
        return Err(Error::ResourceCap {
            what: "ground circuit variables",
            limit: config.cap,
            actual: used.len(),
        });
    }
    let local: HashMap<usize, usize> = used.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let root = g.root.relabel(&|v| local[&v]);
    let var_weights: Vec<(Rational, Rational)> = used
        .iter()
        .map(|&t| {
            let (w, wb) = weights.weight(&g.universe, t);
            (w.clone(), wb.clone())
        })
        .collect();
    let inner = match config.engine {
        Engine::Enumerate => enumerate(&root, &var_weights),
        Engine::Dpll => dpll(&root, &var_weights),
        Engine::Auto if used.len() <= 12 => enumerate(&root, &var_weights),
        Engine::Auto => dpll(&root, &var_weights),
    };
    if inner.is_zero() {
        return Ok(inner);
    }
    Ok(inner * weights.absent_factor(&g.universe, &used))
}

/// Sums over all `2^k` assignments of variables `0..k`. Satisfying
/// assignments are tallied by how many variables of each weight class are
/// true, so the rational work is proportional to the number of classes.
pub fn enumerate(root: &Circuit, weights: &[(Rational, Rational)]) -> Rational {
    let k = weights.len();
    let mut classes: Vec<&(Rational, Rational)> = Vec::new();
    let class_of: Vec<usize> = weights
        .iter()
        .map(|w| match classes.iter().position(|c| *c == w) {
            Some(i) => i,
            None => {
                classes.push(w);
                classes.len() - 1
            }
        })
        .collect();
    let mut sizes = vec![0u64; classes.len()];
    for &c in &class_of {
        sizes[c] += 1;
    }
    // mixed-radix key: digit c counts true variables of class c
    let mut radix = vec![1u128; classes.len()];
    for c in 1..classes.len() {
        radix[c] = radix[c - 1] * (sizes[c - 1] as u128 + 1);
    }
    let step: Vec<u128> = class_of.iter().map(|&c| radix[c]).collect();
    let mut tally: HashMap<u128, u64> = HashMap::new();
    let mut assignment = 0u64;
    let mut key = 0u128;
    let total = 1u64 << k;
    for i in 0..total {
        if i > 0 {
            // Gray code: flip the lowest set bit position of i
            let v = i.trailing_zeros() as usize;
            assignment ^= 1 << v;
            if assignment >> v & 1 == 1 {
                key += step[v];
            } else {
                key -= step[v];
            }
        }
        if root.eval(&|v| assignment >> v & 1 == 1) {
            *tally.entry(key).or_default() += 1;
        }
    }
    let mut acc = Rational::zero();
    for (key, count) in tally {
        let mut term = Rational::from_integer(count.into());
        for c in 0..classes.len() {
            let trues = ((key / radix[c]) % (sizes[c] as u128 + 1)) as u64;
            let (w, wb) = classes[c];
            term *= arith::pow(w, trues) * arith::pow(wb, sizes[c] - trues);
        }
        acc += term;
    }
    acc
}

type Lit = i32;
type Clause = Vec<Lit>;

fn var_of(l: Lit) -> usize {
    (l.unsigned_abs() - 1) as usize
}

fn lit(v: usize, positive: bool) -> Lit {
    let l = v as Lit + 1;
    if positive {
        l
    } else {
        -l
    }
}

struct Tseitin {
    clauses: Vec<Clause>,
    next: usize,
}

impl Tseitin {
    fn fresh(&mut self) -> usize {
        self.next += 1;
        self.next - 1
    }

    /// A literal equivalent to `c`. Constants never reach here.
    fn encode(&mut self, c: &Circuit) -> Lit {
        match c {
            Circuit::Const(_) => unreachable!("constants are folded"),
            Circuit::Var(v) => lit(*v, true),
            Circuit::Not(a) => -self.encode(a),
            Circuit::And(cs) => {
                let ls: Vec<Lit> = cs.iter().map(|c| self.encode(c)).collect();
                let y = lit(self.fresh(), true);
                let mut big = vec![y];
                for &l in &ls {
                    self.clauses.push(vec![-y, l]);
                    big.push(-l);
                }
                self.clauses.push(big);
                y
            }
            Circuit::Or(cs) => {
                let ls: Vec<Lit> = cs.iter().map(|c| self.encode(c)).collect();
                let y = lit(self.fresh(), true);
                let mut big = vec![-y];
                for &l in &ls {
                    self.clauses.push(vec![y, -l]);
                    big.push(l);
                }
                self.clauses.push(big);
                y
            }
            Circuit::Iff(a, b) => {
                let (a, b) = (self.encode(a), self.encode(b));
                let y = lit(self.fresh(), true);
                self.clauses.push(vec![-y, -a, b]);
                self.clauses.push(vec![-y, a, -b]);
                self.clauses.push(vec![y, a, b]);
                self.clauses.push(vec![y, -a, -b]);
                y
            }
        }
    }

    fn assert_true(&mut self, c: &Circuit) {
        match c {
            Circuit::And(cs) => cs.iter().for_each(|c| self.assert_true(c)),
            Circuit::Or(cs) => {
                let clause = cs.iter().map(|c| self.encode(c)).collect();
                self.clauses.push(clause);
            }
            other => {
                let l = self.encode(other);
                self.clauses.push(vec![l]);
            }
        }
    }
}

/// Component-caching DPLL over a Tseitin encoding. Auxiliary gate variables
/// are weighted `(1, 1)`; each input assignment extends to exactly one
/// assignment of them, so the count is unchanged.
pub fn dpll(root: &Circuit, weights: &[(Rational, Rational)]) -> Rational {
    let k = weights.len();
    let all_free = || {
        weights
            .iter()
            .fold(Rational::one(), |acc, (w, wb)| acc * (w + wb))
    };
    match root {
        Circuit::Const(false) => return Rational::zero(),
        Circuit::Const(true) => return all_free(),
        _ => {}
    }
    let mut ts = Tseitin {
        clauses: Vec::new(),
        next: k,
    };
    ts.assert_true(root);
    let mut all = weights.to_vec();
    all.resize(ts.next, (Rational::one(), Rational::one()));
    let mut counter = Counter {
        inputs: k,
        weights: all,
        cache: HashMap::new(),
    };
    let clauses: Vec<Clause> = ts.clauses.into_iter().filter_map(normalize).collect();
    let vars: Vec<usize> = (0..ts.next).collect();
    counter.count(clauses, &vars)
}

/// Sorts and dedups a clause; `None` for tautologies.
fn normalize(mut c: Clause) -> Option<Clause> {
    c.sort_by_key(|l| (l.unsigned_abs(), *l));
    c.dedup();
    if c.windows(2).any(|w| w[0] == -w[1]) {
        None
    } else {
        Some(c)
    }
}

/// Cached components kept before the cache is flushed.
const CACHE_LIMIT: usize = 1 << 16;

struct Counter {
    inputs: usize,
    weights: Vec<(Rational, Rational)>,
    cache: HashMap<Vec<Clause>, Rational>,
}

impl Counter {
    fn lit_weight(&self, l: Lit) -> &Rational {
        let (w, wb) = &self.weights[var_of(l)];
        if l > 0 {
            w
        } else {
            wb
        }
    }

    fn free(&self, v: usize) -> Rational {
        let (w, wb) = &self.weights[v];
        w + wb
    }

    /// Weighted count over assignments to `vars` (a superset of the clause
    /// variables) satisfying every clause.
    fn count(&mut self, mut clauses: Vec<Clause>, vars: &[usize]) -> Rational {
        let mut factor = Rational::one();
        let mut assigned = Vec::new();
        while let Some(unit) = clauses.iter().find(|c| c.len() == 1).map(|c| c[0]) {
            factor *= self.lit_weight(unit);
            assigned.push(var_of(unit));
            match condition(&clauses, unit) {
                Some(next) => clauses = next,
                None => return Rational::zero(),
            }
            if factor.is_zero() {
                return factor;
            }
        }
        let mut present = vec![false; self.weights.len()];
        for c in &clauses {
            for &l in c {
                present[var_of(l)] = true;
            }
        }
        for &v in assigned.iter() {
            present[v] = true;
        }
        for &v in vars {
            if !present[v] {
                factor *= self.free(v);
            }
        }
        if clauses.is_empty() || factor.is_zero() {
            return factor;
        }
        for comp in components(clauses, self.weights.len()) {
            factor *= self.component(comp);
            if factor.is_zero() {
                break;
            }
        }
        factor
    }

    fn component(&mut self, mut clauses: Vec<Clause>) -> Rational {
        clauses.sort();
        if let Some(v) = self.cache.get(&clauses) {
            return v.clone();
        }
        let mut freq: HashMap<usize, usize> = HashMap::new();
        for c in &clauses {
            for &l in c {
                *freq.entry(var_of(l)).or_default() += 1;
            }
        }
        let mut vars: Vec<usize> = freq.keys().copied().collect();
        vars.sort_unstable();
        // gate variables follow from the inputs by propagation
        let inputs = self.inputs;
        let branch = *vars
            .iter()
            .max_by_key(|v| (**v < inputs, freq[v], std::cmp::Reverse(**v)))
            .unwrap();
        let rest: Vec<usize> = vars.iter().copied().filter(|&v| v != branch).collect();
        let mut total = Rational::zero();
        for positive in [true, false] {
            let l = lit(branch, positive);
            let w = self.lit_weight(l).clone();
            if w.is_zero() {
                continue;
            }
            if let Some(next) = condition(&clauses, l) {
                total += w * self.count(next, &rest);
            }
        }
        if self.cache.len() >= CACHE_LIMIT {
            self.cache.clear();
        }
        self.cache.insert(clauses, total.clone());
        total
    }
}

/// Sets literal `l` true. `None` if some clause becomes empty.
fn condition(clauses: &[Clause], l: Lit) -> Option<Vec<Clause>> {
    let mut out = Vec::with_capacity(clauses.len());
    for c in clauses {
        if c.contains(&l) {
            continue;
        }
        if c.contains(&-l) {
            let reduced: Clause = c.iter().copied().filter(|&x| x != -l).collect();
            if reduced.is_empty() {
                return None;
            }
            out.push(reduced);
        } else {
            out.push(c.clone());
        }
    }
    Some(out)
}

/// Splits clauses into variable-disjoint groups.
fn components(clauses: Vec<Clause>, nvars: usize) -> Vec<Vec<Clause>> {
    let mut parent: Vec<usize> = (0..nvars).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for c in &clauses {
        let a = find(&mut parent, var_of(c[0]));
        for &l in &c[1..] {
            let b = find(&mut parent, var_of(l));
            if a != b {
                parent[b] = a;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Clause>> = BTreeMap::new();
    for c in clauses {
        let r = find(&mut parent, var_of(c[0]));
        groups.entry(r).or_default().push(c);
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use crate::ground::circuit::lineage;
    use crate::logic::parse_inferring;

    fn both(root: &Circuit, weights: &[(Rational, Rational)]) -> Rational {
        let a = enumerate(root, weights);
        let b = dpll(root, weights);
        assert_eq!(a, b, "engines disagree on {root:?}");
        a
    }

    #[test]
    fn single_variable() {
        assert_eq!(both(&Circuit::Var(0), &[(int(2), int(3))]), int(2));
    }

    #[test]
    fn true_over_k_variables() {
        let w = [(int(2), int(3)), (int(-1), int(5)), (int(1), int(1))];
        assert_eq!(both(&Circuit::Const(true), &w), int(5 * 4 * 2));
    }

    #[test]
    fn or_of_two() {
        let c = Circuit::or([Circuit::Var(0), Circuit::Var(1)]);
        assert_eq!(both(&c, &[(int(1), int(1)), (int(1), int(1))]), int(3));
    }

    #[test]
    fn absent_tuples_contribute_their_total_weight() {
        let (f, syms) = parse_inferring("exists y. S(y)").unwrap();
        let g = lineage(&f, 3).unwrap();
        let mut vocab = WeightedVocabulary::unit(syms).unwrap();
        vocab.set_weights("S", int(2), int(1)).unwrap();
        let tw = TupleWeighting::symmetric(&vocab, &g.universe).unwrap();
        assert_eq!(wmc(&g, &tw, &OracleConfig::default()).unwrap(), int(26));
    }

    #[test]
    fn cap_is_enforced() {
        let (f, _) = parse_inferring("exists x,y. R(x,y)").unwrap();
        let g = lineage(&f, 6).unwrap();
        let err = wmc(&g, &TupleWeighting::unit(&g.universe), &OracleConfig::with_cap(24));
        assert!(matches!(err, Err(Error::ResourceCap { actual: 36, .. })));
    }
}
