//! WFOMC-preserving transformations of weighted sentences.

pub mod arity;
pub mod equality;
pub mod fresh;
pub mod mln;
pub mod negation;
pub mod scott;
pub mod shannon;
pub mod skolem;

use crate::logic::{Formula, RelationSymbol, WeightedVocabulary};

pub use arity::reduce_arity;
pub use equality::{remove_equality, EqualityRecipe};
pub use mln::{mln_direct, mln_probability, mln_reduce, MlnConstraint, MlnModel, MlnWeight};
pub use negation::remove_negation;
pub use scott::{scott_normal_form, scott_reduce};
pub use shannon::{shannon_expand_nullary, ShannonExpansion};
pub use skolem::skolemize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Skolem,
    NegationA,
    NegationB,
    Equality,
    Scott,
    AritySplit,
    Filler,
    SoftConstraint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Introduced {
    pub symbol: RelationSymbol,
    pub role: Role,
}

/// Output of a transformation: the new sentence over an extension of the
/// input vocabulary, and the symbols that were added.
#[derive(Clone, Debug)]
pub struct TransformResult {
    pub formula: Formula,
    pub vocab: WeightedVocabulary,
    pub introduced: Vec<Introduced>,
}

impl TransformResult {
    pub fn unchanged(formula: Formula, vocab: WeightedVocabulary) -> Self {
        TransformResult {
            formula,
            vocab,
            introduced: Vec::new(),
        }
    }
}
