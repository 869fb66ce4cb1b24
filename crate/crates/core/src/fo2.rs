//! Lifted WFOMC for two-variable sentences.
//!
//! The sentence is brought to `forall x. forall y. psi(x, y)` by the normal
//! form, arity reduction, Skolemization and Shannon expansion of nullary
//! symbols. Elements are then grouped into cells (1-types: a truth value for
//! every unary atom and every diagonal `B(x, x)`); once each element's cell
//! is fixed, the off-diagonal atoms of different pairs are independent. With
//! `n_i` elements in cell `i` the weighted count is
//!
//! ```text
//! sum over n_1 + ... + n_L = n of
//!     n! / prod n_i!  *  prod t_i^n_i  *  prod s_i^C(n_i, 2)  *  prod_{i<j} r_ij^(n_i n_j)
//! ```

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{self, Rational};
use crate::error::{Error, Result};
use crate::ground::{brute_wfomc, OracleConfig};
use crate::logic::formula::{self as f, Formula};
use crate::logic::normal::prenex;
use crate::logic::WeightedVocabulary;
use crate::reductions::fresh::FreshNames;
use crate::reductions::skolem::skolemize_with;
use crate::reductions::{reduce_arity, scott_normal_form, shannon_expand_nullary};

pub const DEFAULT_MAX_CELLS: usize = 4096;

/// Parameters of the cell decomposition of `forall x,y. psi(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellParameters {
    pub unary: Vec<String>,
    pub binary: Vec<String>,
    /// Cells with `t != 0` as bit profiles (bit `k` is the `k`-th unary atom,
    /// then the diagonals). Profiles whose rows of `r` coincide behave alike
    /// and are merged into one class; the vectors below are indexed by class.
    pub cells: Vec<Vec<usize>>,
    /// Weight of a single element in cell `i`, times `[psi(c, c)]`.
    pub t: Vec<Rational>,
    /// Weighted count of off-diagonal assignments for two elements of cell `i`.
    pub s: Vec<Rational>,
    /// Same for one element of cell `i` and one of cell `j`; symmetric.
    pub r: Vec<Vec<Rational>>,
}

impl CellParameters {
    pub fn cells(&self) -> usize {
        self.cells.len()
    }

    /// The multinomial sum for domain size `n`.
    pub fn sum(&self, n: usize) -> Rational {
        let active: Vec<usize> = (0..self.cells()).filter(|&i| !self.t[i].is_zero()).collect();
        if active.is_empty() {
            return if n == 0 { Rational::one() } else { Rational::zero() };
        }
        let k = active.len();
        let t_pow: Vec<Vec<Rational>> = active.iter().map(|&i| powers(&self.t[i], n)).collect();
        let s_pow: Vec<Vec<Rational>> = active
            .iter()
            .map(|&i| (0..=n as u64).map(|m| arith::pow(&self.s[i], m * m.saturating_sub(1) / 2)).collect())
            .collect();
        let r_pow: Vec<Vec<Vec<Rational>>> = active
            .iter()
            .map(|&i| active.iter().map(|&j| powers(&self.r[i][j], n)).collect())
            .collect();
        let mut dfs = Dfs {
            k,
            t_pow,
            s_pow,
            r_pow,
            total: Rational::zero(),
        };
        let cross = vec![Rational::one(); k];
        dfs.go(0, n, Rational::one(), cross);
        dfs.total
    }
}

fn powers(base: &Rational, n: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Rational::one());
    for m in 1..=n {
        let next = &out[m - 1] * base;
        out.push(next);
    }
    out
}

struct Dfs {
    k: usize,
    t_pow: Vec<Vec<Rational>>,
    s_pow: Vec<Vec<Rational>>,
    r_pow: Vec<Vec<Vec<Rational>>>,
    total: Rational,
}

impl Dfs {
    /// `cross[j]` holds `prod_{i < cell} r_ij^n_i` for every later `j`.
    fn go(&mut self, cell: usize, remaining: usize, acc: Rational, cross: Vec<Rational>) {
        let last = cell + 1 == self.k;
        let range = if last { remaining..=remaining } else { 0..=remaining };
        for m in range {
            let mut factor = Rational::from_integer(BigInt::from(arith::binomial(remaining as u64, m as u64)));
            factor *= &self.t_pow[cell][m];
            factor *= &self.s_pow[cell][m];
            factor *= arith::pow(&cross[cell], m as u64);
            if factor.is_zero() {
                continue;
            }
            let next = &acc * factor;
            if last {
                self.total += next;
                continue;
            }
            let mut cross_next = cross.clone();
            if m > 0 {
                for (j, c) in cross_next.iter_mut().enumerate().skip(cell + 1) {
                    *c *= &self.r_pow[cell][j][m];
                }
            }
            self.go(cell + 1, remaining - m, next, cross_next);
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    UnaryX(usize),
    UnaryY(usize),
    Diag { binary: usize, on_x: bool },
    Off { binary: usize, forward: bool },
    Equal,
    Const(bool),
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(Slot),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
}

/// One element's cell plus the off-diagonal bits, as seen from `psi(x, y)`.
struct PairView<'a> {
    cell_x: usize,
    cell_y: usize,
    /// bit `2j` is `B_j(a, b)`, bit `2j + 1` is `B_j(b, a)`
    off: usize,
    /// whether `x` is `a` (the first element)
    x_is_a: bool,
    same: bool,
    u: usize,
    _p: std::marker::PhantomData<&'a ()>,
}

impl PairView<'_> {
    fn value(&self, slot: Slot) -> bool {
        match slot {
            Slot::UnaryX(i) => self.cell_x >> i & 1 == 1,
            Slot::UnaryY(i) => self.cell_y >> i & 1 == 1,
            Slot::Diag { binary, on_x } => {
                let c = if on_x { self.cell_x } else { self.cell_y };
                c >> (self.u + binary) & 1 == 1
            }
            Slot::Off { binary, forward } => {
                if self.same {
                    return self.cell_x >> (self.u + binary) & 1 == 1;
                }
                // forward means B(x, y)
                let ab = forward == self.x_is_a;
                self.off >> (2 * binary + usize::from(!ab)) & 1 == 1
            }
            Slot::Equal => self.same,
            Slot::Const(b) => b,
        }
    }
}

fn eval(node: &Node, view: &PairView) -> bool {
    match node {
        Node::Leaf(s) => view.value(*s),
        Node::Not(a) => !eval(a, view),
        Node::And(a, b) => eval(a, view) && eval(b, view),
        Node::Or(a, b) => eval(a, view) || eval(b, view),
        Node::Iff(a, b) => eval(a, view) == eval(b, view),
    }
}

fn compile(
    psi: &Formula,
    x: &str,
    y: &str,
    unary: &[String],
    binary: &[String],
) -> Result<Node> {
    let bad = |what: String| Error::OutOfScope(format!("cell decomposition: {what}"));
    let is_x = |v: &str| -> Result<bool> {
        if v == x {
            Ok(true)
        } else if v == y {
            Ok(false)
        } else {
            Err(bad(format!("unexpected variable `{v}`")))
        }
    };
    Ok(match psi {
        Formula::True => Node::Leaf(Slot::Const(true)),
        Formula::False => Node::Leaf(Slot::Const(false)),
        Formula::Eq(a, b) => {
            if is_x(a)? == is_x(b)? {
                Node::Leaf(Slot::Const(true))
            } else {
                Node::Leaf(Slot::Equal)
            }
        }
        Formula::Atom { rel, args } => match args.len() {
            1 => {
                let i = unary.iter().position(|u| u == rel).unwrap();
                Node::Leaf(if is_x(&args[0])? { Slot::UnaryX(i) } else { Slot::UnaryY(i) })
            }
            2 => {
                let j = binary.iter().position(|b| b == rel).unwrap();
                let (a, b) = (is_x(&args[0])?, is_x(&args[1])?);
                Node::Leaf(match (a, b) {
                    (true, true) => Slot::Diag { binary: j, on_x: true },
                    (false, false) => Slot::Diag { binary: j, on_x: false },
                    (true, false) => Slot::Off { binary: j, forward: true },
                    (false, true) => Slot::Off { binary: j, forward: false },
                })
            }
            k => return Err(bad(format!("relation `{rel}` has arity {k}"))),
        },
        Formula::Not(a) => Node::Not(Box::new(compile(a, x, y, unary, binary)?)),
        Formula::And(a, b) => Node::And(
            Box::new(compile(a, x, y, unary, binary)?),
            Box::new(compile(b, x, y, unary, binary)?),
        ),
        Formula::Or(a, b) => Node::Or(
            Box::new(compile(a, x, y, unary, binary)?),
            Box::new(compile(b, x, y, unary, binary)?),
        ),
        Formula::Implies(a, b) => Node::Or(
            Box::new(Node::Not(Box::new(compile(a, x, y, unary, binary)?))),
            Box::new(compile(b, x, y, unary, binary)?),
        ),
        Formula::Iff(a, b) => Node::Iff(
            Box::new(compile(a, x, y, unary, binary)?),
            Box::new(compile(b, x, y, unary, binary)?),
        ),
        Formula::Forall(..) | Formula::Exists(..) => {
            return Err(bad("formula is not quantifier-free".into()))
        }
    })
}

/// Cell parameters of `forall x,y. psi(x, y)` for quantifier-free
/// `psi` whose free variables are among `x` and `y`. Every relation of
/// `psi` must have arity 1 or 2; equality is allowed.
///
/// At most `max_cells` cells are enumerated and at most `max_cells^2`
/// evaluations of `psi` are spent on pairs of cells.
pub fn cell_parameters(
    psi: &Formula,
    vars: (&str, &str),
    vocab: &WeightedVocabulary,
    max_cells: usize,
) -> Result<CellParameters> {
    let mut budget = max_cells.saturating_mul(max_cells);
    cell_parameters_within(psi, vars, vocab, max_cells, &mut budget)
}

fn cell_parameters_within(
    psi: &Formula,
    vars: (&str, &str),
    vocab: &WeightedVocabulary,
    max_cells: usize,
    budget: &mut usize,
) -> Result<CellParameters> {
    let rels = psi.relations();
    let mut unary = Vec::new();
    let mut binary = Vec::new();
    for (name, arity) in &rels {
        match arity {
            1 => unary.push(name.clone()),
            2 => binary.push(name.clone()),
            a => {
                return Err(Error::OutOfScope(format!(
                    "cell decomposition needs arity 1 or 2, `{name}` has {a}"
                )))
            }
        }
    }
    let weight = |name: &String| -> Result<(Rational, Rational)> {
        let r = vocab
            .get(name)
            .ok_or_else(|| Error::UndeclaredSymbol(name.clone()))?;
        Ok((r.w.clone(), r.wbar.clone()))
    };
    let uw: Vec<(Rational, Rational)> = unary.iter().map(weight).collect::<Result<_>>()?;
    let bw: Vec<(Rational, Rational)> = binary.iter().map(weight).collect::<Result<_>>()?;
    let (u, b) = (unary.len(), binary.len());
    let bits = u + b;
    if bits >= 32 || (1usize << bits) > max_cells {
        return Err(Error::ResourceCap {
            what: "cells",
            limit: max_cells,
            actual: if bits < 63 { 1 << bits } else { usize::MAX },
        });
    }
    let node = compile(psi, vars.0, vars.1, &unary, &binary)?;
    let view = |cx: usize, cy: usize, off: usize, x_is_a: bool, same: bool| PairView {
        cell_x: cx,
        cell_y: cy,
        off,
        x_is_a,
        same,
        u,
        _p: std::marker::PhantomData,
    };
    let mut cells = Vec::new();
    let mut t = Vec::new();
    for c in 0..1usize << bits {
        if !eval(&node, &view(c, c, 0, true, true)) {
            continue;
        }
        let mut w = Rational::one();
        for (i, (wt, wf)) in uw.iter().chain(bw.iter()).enumerate() {
            w *= if c >> i & 1 == 1 { wt } else { wf };
        }
        if !w.is_zero() {
            cells.push(c);
            t.push(w);
        }
    }
    let k = cells.len();
    let offs = 1usize << (2 * b);
    let work = (k * (k + 1) / 2).saturating_mul(offs);
    if work > *budget {
        return Err(Error::ResourceCap {
            what: "cell pair evaluations",
            limit: *budget,
            actual: work,
        });
    }
    *budget -= work;
    let off_weight: Vec<Rational> = (0..offs)
        .map(|m| {
            let mut w = Rational::one();
            for (j, (wt, wf)) in bw.iter().enumerate() {
                for d in 0..2 {
                    w *= if m >> (2 * j + d) & 1 == 1 { wt } else { wf };
                }
            }
            w
        })
        .collect();
    let mut r = vec![vec![Rational::zero(); k]; k];
    for i in 0..k {
        for j in i..k {
            let mut acc = Rational::zero();
            for (m, w) in off_weight.iter().enumerate() {
                // a in cell i, b in cell j; psi(a, b) and psi(b, a)
                if eval(&node, &view(cells[i], cells[j], m, true, false))
                    && eval(&node, &view(cells[j], cells[i], m, false, false))
                {
                    acc += w;
                }
            }
            r[j][i] = acc.clone();
            r[i][j] = acc;
        }
    }
    // equal rows force r_ii = r_ij = r_jj, so the two cells are
    // interchangeable and their single-element weights add up
    let mut classes: Vec<usize> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashMap<&[Rational], usize> = HashMap::new();
    for i in 0..k {
        match seen.get(r[i].as_slice()) {
            Some(&c) => members[c].push(i),
            None => {
                seen.insert(r[i].as_slice(), classes.len());
                classes.push(i);
                members.push(vec![i]);
            }
        }
    }
    let t = members
        .iter()
        .map(|m| m.iter().map(|&i| &t[i]).sum())
        .collect();
    let r: Vec<Vec<Rational>> = classes
        .iter()
        .map(|&i| classes.iter().map(|&j| r[i][j].clone()).collect())
        .collect();
    let s = (0..classes.len()).map(|i| r[i][i].clone()).collect();
    let cells = members
        .into_iter()
        .map(|m| m.into_iter().map(|i| cells[i]).collect())
        .collect();
    Ok(CellParameters {
        unary,
        binary,
        cells,
        t,
        s,
        r,
    })
}

#[derive(Clone, Debug)]
pub struct Fo2Config {
    pub max_cells: usize,
    /// Used for the empty domain only.
    pub oracle: OracleConfig,
}

impl Default for Fo2Config {
    fn default() -> Self {
        Fo2Config {
            max_cells: DEFAULT_MAX_CELLS,
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Fo2Branch {
    pub multiplier: Rational,
    pub params: CellParameters,
    /// `(w + wbar, arity)` of relations the branch leaves unconstrained.
    pub free: Vec<(Rational, usize)>,
}

/// The n-independent part of the computation.
#[derive(Clone, Debug)]
pub struct Fo2Plan {
    sentence: Formula,
    input_vocab: WeightedVocabulary,
    pub psi: Formula,
    pub branches: Vec<Fo2Branch>,
    oracle: OracleConfig,
}

impl Fo2Plan {
    pub fn new(phi: &Formula, vocab: &WeightedVocabulary, config: &Fo2Config) -> Result<Self> {
        let free = phi.free_vars();
        if !free.is_empty() {
            return Err(Error::FreeVariables(free.into_iter().collect()));
        }
        if phi.variable_names().len() > 2 {
            return Err(Error::OutOfScope(format!(
                "sentence uses {} variables; the lifted algorithm needs at most 2",
                phi.variable_names().len()
            )));
        }
        let mut input_vocab = vocab.clone();
        input_vocab.extend_unit(&phi.relations())?;
        let snf = scott_normal_form(phi, &input_vocab)?;
        let reduced = reduce_arity(&snf.formula, &snf.vocab)?;
        let mut names = FreshNames::new(&reduced.vocab, [&reduced.formula]);
        let mut vocab = reduced.vocab;
        let mut matrices = Vec::new();
        for conjunct in reduced.formula.conjuncts() {
            let sk = skolemize_with(conjunct, &vocab, &mut names)?;
            vocab = sk.vocab;
            let p = prenex(&sk.formula);
            let vars: Vec<&String> = p.prefix.iter().map(|(_, v)| v).collect();
            if vars.len() > 2 {
                return Err(Error::OutOfScope("normal form left more than two variables".into()));
            }
            let map: BTreeMap<String, String> = vars
                .iter()
                .zip(["x", "y"])
                .map(|(v, t)| ((*v).clone(), t.to_string()))
                .collect();
            matrices.push(p.matrix.rename_free(&map));
        }
        let psi = f::and_all(matrices);
        let expansion = shannon_expand_nullary(&psi, &vocab)?;
        let mut branches = Vec::new();
        let mut budget = config.max_cells.saturating_mul(config.max_cells);
        for (cofactor, multiplier) in expansion.branches {
            if multiplier.is_zero() || cofactor == Formula::False {
                continue;
            }
            let params = cell_parameters_within(
                &cofactor,
                ("x", "y"),
                &expansion.vocab,
                config.max_cells,
                &mut budget,
            )?;
            let used = cofactor.relations();
            let free = expansion
                .vocab
                .relations()
                .iter()
                .filter(|r| !used.contains_key(&r.symbol.name))
                .map(|r| (&r.w + &r.wbar, r.symbol.arity))
                .collect();
            branches.push(Fo2Branch {
                multiplier,
                params,
                free,
            });
        }
        Ok(Fo2Plan {
            sentence: phi.clone(),
            input_vocab,
            psi,
            branches,
            oracle: config.oracle.clone(),
        })
    }

    pub fn evaluate(&self, n: usize) -> Result<Rational> {
        if n == 0 {
            // the normal form is only equivalent on non-empty domains
            return brute_wfomc(&self.sentence, 0, &self.input_vocab, &self.oracle);
        }
        let mut total = Rational::zero();
        for b in &self.branches {
            let mut term = &b.multiplier * b.params.sum(n);
            if term.is_zero() {
                continue;
            }
            for (c, arity) in &b.free {
                term *= arith::pow(c, (n as u64).pow(*arity as u32));
            }
            total += term;
        }
        Ok(total)
    }
}

pub fn wfomc_fo2(phi: &Formula, n: usize, vocab: &WeightedVocabulary) -> Result<Rational> {
    wfomc_fo2_with(phi, n, vocab, &Fo2Config::default())
}

pub fn wfomc_fo2_with(
    phi: &Formula,
    n: usize,
    vocab: &WeightedVocabulary,
    config: &Fo2Config,
) -> Result<Rational> {
    Fo2Plan::new(phi, vocab, config)?.evaluate(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ratio};
    use crate::logic::parse_inferring;

    fn both(text: &str, weights: &[(&str, Rational, Rational)], max_n: usize) {
        let (phi, syms) = parse_inferring(text).unwrap();
        let mut v = WeightedVocabulary::unit(syms).unwrap();
        for (name, w, wbar) in weights {
            v.set_weights(name, w.clone(), wbar.clone()).unwrap();
        }
        let plan = Fo2Plan::new(&phi, &v, &Fo2Config::default()).unwrap();
        let cfg = OracleConfig::with_cap(40);
        for n in 0..=max_n {
            assert_eq!(
                plan.evaluate(n).unwrap(),
                brute_wfomc(&phi, n, &v, &cfg).unwrap(),
                "{text} at n = {n}"
            );
        }
    }

    #[test]
    fn forall_exists() {
        let (phi, syms) = parse_inferring("forall x. exists y. R(x,y)").unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        assert_eq!(wfomc_fo2(&phi, 4, &v).unwrap(), int(50625));
    }

    #[test]
    fn weighted_exists() {
        let (phi, syms) = parse_inferring("exists y. S(y)").unwrap();
        let mut v = WeightedVocabulary::unit(syms).unwrap();
        v.set_weights("S", int(2), int(1)).unwrap();
        assert_eq!(wfomc_fo2(&phi, 3, &v).unwrap(), int(26));
    }

    #[test]
    fn agrees_with_grounding() {
        both("forall x,y. R(x) | S(x,y) | T(y)", &[], 3);
        both("forall x,y. R(x,y) -> R(y,x)", &[("R", int(2), ratio(1, 3))], 3);
        both("forall x. exists y. x != y & E(x,y)", &[], 3);
        both("exists x. forall y. R(x,y) | x = y", &[("R", int(-1), int(3))], 3);
        both("P | forall x. exists y. R(x,y) & U(y)", &[("P", int(2), int(-1))], 3);
        both("forall x. exists y. R(x,y,x)", &[("R", int(2), int(1))], 2);
        both("forall x. (exists y. R(x,y)) -> forall y. (S(y) | R(y,x))", &[], 3);
        both("!exists x. U(x)", &[], 3);
    }

    #[test]
    fn rejects_three_variables() {
        let (phi, syms) = parse_inferring("forall x,y,z. R(x,y) | R(y,z)").unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        assert!(matches!(wfomc_fo2(&phi, 2, &v), Err(Error::OutOfScope(_))));
    }

    #[test]
    fn symmetric_cross_terms() {
        let (phi, syms) = parse_inferring("forall x,y. U(x) & R(x,y) -> V(y)").unwrap();
        let v = WeightedVocabulary::unit(syms).unwrap();
        let p = cell_parameters(
            match &phi {
                Formula::Forall(_, inner) => match &**inner {
                    Formula::Forall(_, m) => m,
                    _ => unreachable!(),
                },
                _ => unreachable!(),
            },
            ("x", "y"),
            &v,
            DEFAULT_MAX_CELLS,
        )
        .unwrap();
        // U(c) & R(c,c) & !V(c) is excluded
        assert_eq!(p.cells.iter().map(Vec::len).sum::<usize>(), 7);
        for i in 0..p.cells() {
            for j in 0..p.cells() {
                assert_eq!(p.r[i][j], p.r[j][i]);
            }
        }
    }
}
