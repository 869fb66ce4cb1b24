pub mod analyze;
pub mod formula;
pub mod normal;
pub mod parser;
pub mod structure;
pub mod vocab;

pub use analyze::{analyze, FormulaClass};
pub use formula::{Formula, Quantifier};
pub use parser::{parse, parse_inferring};
pub use normal::{nnf, prenex, rectify, simplify, Prenex};
pub use structure::{evaluate, CompiledSentence, GroundAtom, Structure, TupleIndex};
pub use vocab::{RelationSymbol, WeightedRelation, WeightedVocabulary};
