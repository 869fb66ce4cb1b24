//! Arity reduction for FO² sentences.
//!
//! With two variables an atom of arity `a >= 3` only ever sees tuples with
//! one or two distinct values. `R(y,x,y)` has the first-occurrence pattern
//! `010` and becomes `R_010(y,x)`; all-equal atoms become the unary `R_000`.
//! The diagonal `R_p(c,c)` of each binary pattern is the tuple
//! `R(c,...,c)`, so it is tied to `R_000(c)` and the weights of `R_000` are
//! divided accordingly. Tuples with three or more distinct values, and the
//! tuples of patterns that do not occur, are unconstrained; the original
//! `R` stays in the vocabulary unused, and two filler symbols correct its
//! contribution `(w + wbar)^(n^a)` down to exactly those free tuples.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::fresh::FreshNames;
use super::{Introduced, Role, TransformResult};
use crate::arith::{pow_signed, Rational};
use crate::error::{Error, Result};
use crate::logic::formula::{self as f, Formula};
use crate::logic::{RelationSymbol, WeightedVocabulary};

pub fn reduce_arity(phi: &Formula, vocab: &WeightedVocabulary) -> Result<TransformResult> {
    if phi.variable_names().len() > 2 {
        return Err(Error::OutOfScope(
            "arity reduction needs a sentence with at most two variables".into(),
        ));
    }
    let mut vocab = vocab.clone();
    vocab.extend_unit(&phi.relations())?;
    // relation -> set of patterns used
    let mut patterns: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    phi.visit(&mut |node| {
        if let Formula::Atom { rel, args } = node {
            if args.len() >= 3 {
                patterns.entry(rel.clone()).or_default().insert(pattern(args));
            }
        }
    });
    if patterns.is_empty() {
        return Ok(TransformResult::unchanged(phi.clone(), vocab));
    }
    let mut names = FreshNames::new(&vocab, [phi]);
    let mut introduced = Vec::new();
    let mut renamed: BTreeMap<(String, Vec<usize>), String> = BTreeMap::new();
    let mut links = Vec::new();
    for (rel, used) in &patterns {
        let r = vocab.get(rel).expect("declared above").clone();
        let arity = r.symbol.arity;
        let binary: Vec<&Vec<usize>> = used.iter().filter(|p| p.contains(&1)).collect();
        let k = binary.len() as i64;
        let unary_pattern = vec![0; arity];
        let mut add = |pat: &Vec<usize>, ar: usize, w: Rational, wbar: Rational| -> Result<String> {
            let digits: String = pat.iter().map(|d| d.to_string()).collect();
            let name = names.name_like(&format!("{rel}_{digits}"));
            vocab.add(name.clone(), ar, w, wbar)?;
            introduced.push(Introduced {
                symbol: RelationSymbol::new(name.clone(), ar),
                role: Role::AritySplit,
            });
            Ok(name)
        };
        for p in &binary {
            let name = add(p, 2, r.w.clone(), r.wbar.clone())?;
            renamed.insert((rel.clone(), (*p).clone()), name);
        }
        // the diagonal group {R_000(c), R_p(c,c) for each p} must carry w
        // (resp. wbar) in total
        let shared = |base: &Rational| {
            if base.is_zero() {
                Rational::one()
            } else {
                pow_signed(base, 1 - k)
            }
        };
        let unary = add(&unary_pattern, 1, shared(&r.w), shared(&r.wbar))?;
        renamed.insert((rel.clone(), unary_pattern.clone()), unary.clone());
        for p in &binary {
            let link = f::forall_all(
                &["x"],
                f::iff(
                    f::atom(&renamed[&(rel.clone(), (*p).clone())], ["x", "x"]),
                    f::atom(&unary, ["x"]),
                ),
            );
            links.push(link);
        }
        // free tuples: n^a - k(n^2 - n) - n, of which the unused R accounts
        // for n^a; fillers contribute c^(-k n^2) and c^((k-1) n)
        let c = &r.w + &r.wbar;
        let exps = [(2usize, -k), (1usize, k - 1)];
        for (ar, e) in exps {
            if e == 0 {
                continue;
            }
            if c.is_zero() {
                return Err(Error::OutOfScope(format!(
                    "arity reduction of `{rel}` needs w + wbar != 0"
                )));
            }
            names.declare(
                "Fill",
                ar,
                pow_signed(&c, e),
                Rational::zero(),
                Role::Filler,
                &mut vocab,
                &mut introduced,
            )?;
        }
    }
    let replaced = phi.map_bottom_up(&mut |node| match node {
        Formula::Atom { rel, args } if args.len() >= 3 => {
            let p = pattern(&args);
            let mut seen: Vec<String> = Vec::new();
            for a in &args {
                if !seen.contains(a) {
                    seen.push(a.clone());
                }
            }
            f::atom(&renamed[&(rel, p)], seen)
        }
        other => other,
    });
    Ok(TransformResult {
        formula: f::and_all(std::iter::once(replaced).chain(links)),
        vocab,
        introduced,
    })
}

/// First-occurrence numbering of the arguments, e.g. `(y,x,y) -> [0,1,0]`.
fn pattern(args: &[String]) -> Vec<usize> {
    let mut seen: Vec<&String> = Vec::new();
    args.iter()
        .map(|a| match seen.iter().position(|s| *s == a) {
            Some(i) => i,
            None => {
                seen.push(a);
                seen.len() - 1
            }
        })
        .collect()
}
