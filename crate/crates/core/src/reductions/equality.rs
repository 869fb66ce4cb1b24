//! Equality removal.
//!
//! Every `x = y` becomes `E(x, y)` for a fresh binary `E`, and
//! `forall x. E(x, x)` is conjoined. With `E` weighted `(z, 1)`, worlds
//! where `E` is exactly the identity carry `z^n` and every other world with
//! reflexive `E` carries a higher power, so `WFOMC(phi, n)` is the
//! coefficient of `z^n` in `f(z) = WFOMC(phi', n)`, a polynomial of degree at
//! most `n^2`.

use num_traits::One;

use super::fresh::FreshNames;
use super::{Introduced, Role, TransformResult};
use crate::arith::{int, try_extract_coefficient, Rational};
use crate::error::Result;
use crate::logic::formula::{self as f, Formula};
use crate::logic::{RelationSymbol, WeightedVocabulary};

/// How to recover the original count from the transformed sentence.
#[derive(Clone, Debug)]
pub struct EqualityRecipe {
    /// The equality symbol, or `None` when the input had no equality and the
    /// transformed sentence is the original.
    pub symbol: Option<String>,
}

impl EqualityRecipe {
    /// Evaluates `WFOMC(phi, n)` given a counter for the transformed
    /// sentence. The counter is called with the vocabulary in which `E` has
    /// weight `(z, 1)` for `z = 0, ..., n^2`.
    pub fn evaluate(
        &self,
        result: &TransformResult,
        n: usize,
        mut counter: impl FnMut(&Formula, &WeightedVocabulary) -> Result<Rational>,
    ) -> Result<Rational> {
        let Some(e) = &self.symbol else {
            return counter(&result.formula, &result.vocab);
        };
        let mut vocab = result.vocab.clone();
        try_extract_coefficient(
            |z| {
                vocab.set_weights(e, z.clone(), Rational::one())?;
                counter(&result.formula, &vocab)
            },
            n * n,
            n,
        )
    }
}

pub fn remove_equality(
    phi: &Formula,
    vocab: &WeightedVocabulary,
) -> Result<(TransformResult, EqualityRecipe)> {
    let mut vocab = vocab.clone();
    vocab.extend_unit(&phi.relations())?;
    if !phi.has_equality() {
        return Ok((
            TransformResult::unchanged(phi.clone(), vocab),
            EqualityRecipe { symbol: None },
        ));
    }
    let mut names = FreshNames::new(&vocab, [phi]);
    let e = names.name("Eq");
    vocab.add(e.clone(), 2, int(1), int(1))?;
    let replaced = phi.map_bottom_up(&mut |node| match node {
        Formula::Eq(a, b) => f::atom(&e, [a, b]),
        other => other,
    });
    let x = crate::logic::normal::fresh_var("x", &phi.variable_names());
    let reflexive = f::forall_all(&[x.clone()], f::atom(&e, [x.clone(), x]));
    let result = TransformResult {
        formula: f::and(replaced, reflexive),
        vocab,
        introduced: vec![Introduced {
            symbol: RelationSymbol::new(e.clone(), 2),
            role: Role::Equality,
        }],
    };
    Ok((result, EqualityRecipe { symbol: Some(e) }))
}
