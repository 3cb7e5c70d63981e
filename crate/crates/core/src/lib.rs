//! Exact arithmetic for lattice-function Hecke eigenclasses over real
//! quadratic fields.

pub mod arith;
pub mod classchar;
pub mod coeff;
pub mod error;
pub mod galois;
pub mod global;
pub mod lattice;
pub mod localtree;
pub mod quadfield;
pub mod selftest;
pub mod session;

pub use coeff::{CoeffField, FieldElement};
pub use error::{Error, Result};
pub use lattice::{ContextS, Lattice};
pub use quadfield::{KElement, PrimeIdeal, PrimeKind, QuadraticField, Splitting};
