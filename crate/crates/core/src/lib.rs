//! Symbolic verification of Hamiltonian structures for hydrodynamic-type systems.

#![allow(clippy::needless_range_loop)]

pub mod jet;
pub mod par;
pub mod conditions;
pub mod tensor;
pub mod lax;
pub mod oassoc;
