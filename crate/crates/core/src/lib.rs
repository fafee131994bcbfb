//! Temperley-Lieb subproduct systems.
//!
//! Starting from a quadratic polynomial whose anti-linear operator has a
//! unitary square, this crate builds the Temperley-Lieb projection, the
//! Jones-Wenzl tower of subspaces, the creation operators on the resulting
//! Fock space, and the K-theory bookkeeping of the associated quantum group.

pub mod fock;
pub mod jw;
pub mod ktheory;
pub mod matrix;
pub mod tl;

pub use matrix::{c, CMatrix, C64};
