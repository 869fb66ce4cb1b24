pub mod arith;
pub mod cq;
pub mod error;
pub mod fo2;
pub mod ground;
pub mod logic;
pub mod reductions;
pub mod special;

pub use arith::Rational;
pub use error::{Error, Result};
