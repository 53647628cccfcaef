//! Perfect zero-knowledge interactive proofs over finite fields.
//!
//! The crate is layered bottom-up: field arithmetic, dense polynomials and
//! arithmetic circuits, conditional sampling of random polynomials, oracles
//! with low-degree testing, the sumcheck family (plain, masked, and the
//! strongly hiding variant with its simulator), algebraic commitments,
//! sum-product circuits with their (zero-knowledge) protocols, and front-ends
//! that reduce TQBF, layered arithmetic circuits and oracle 3-SAT to them.

pub mod aqc;
pub mod circuit;
pub mod commit;
pub mod error;
pub mod field;
pub mod frontends;
pub mod harness;
pub mod mpoly;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod spc;
pub mod sumcheck;

pub use error::{Error, Result};
pub use field::{Fe, Field, Subset};
pub use mpoly::{MultiPoly, PrefixQuery};
