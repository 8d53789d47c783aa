//! Hamiltonian assembly, eigensolvers and discrete operator identities.

pub mod lanczos;
pub mod assemble;

pub use assemble::{AssembledModel, Variant};
pub mod dense;
pub mod identities;
pub mod solve;

pub use solve::{solve_ground, GroundState, Method, SolveOptions};
