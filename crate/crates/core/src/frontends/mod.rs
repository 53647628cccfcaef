//! Reductions into sum-product circuits: TQBF, layered arithmetic circuits and oracle 3-SAT.

pub mod layered;
pub mod o3sat;
pub mod tqbf;
