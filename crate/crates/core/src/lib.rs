//! Numerical laboratory for the ultraviolet- and infrared-cutoff Nelson Hamiltonian.

// `!(x > 0.0)` is used on purpose throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature tables keep their published digits.
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod closedform;
pub mod error;
pub mod fockspace;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod particle;
pub mod quadrature;
pub mod roots;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use model::{FrameMode, ModelParams, ScaleFrame};
