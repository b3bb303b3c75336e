//! Knapsack cryptanalysis workbench.
//!
//! Implements the basic Merkle-Hellman cryptosystem and the
//! permutation-combination variant built on it, and breaks both with
//! Shamir's attack: LLL reduction of a simultaneous diophantine
//! approximation lattice recovers an equivalent trapdoor `(U', P')` from the
//! public knapsack alone.

pub mod attack;
pub mod error;
pub mod factoradic;
pub mod hwang;
pub mod knapsack;
pub mod lattice;
pub mod message;
pub mod rng;

pub use error::{Error, Result};
pub mod experiment;
pub mod format;
