//! Ground-truth counting by grounding and exhaustive or DPLL-based
//! weighted model counting.

pub mod circuit;
pub mod oracle;
pub mod wmc;

pub use circuit::{lineage, lineage_in, Circuit, GroundCircuit};
pub use oracle::{brute_wfomc, count_models, count_models_direct, covering_vocab, wfomc_direct};
pub use wmc::{wmc, Engine, OracleConfig, TupleWeighting, DEFAULT_CAP};
