//! Interferometric probe of a Bose condensate coupled to a two-level atom:
//! Fock-space primitives, the effective Hamiltonian, atom-loss channels,
//! Lindblad evolution and the Ramsey-type probe protocol.

// `!(x >= 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod dissipation;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod propagate;
pub mod protocol;

pub use error::{Error, Result};
