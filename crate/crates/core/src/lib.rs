//! Hopf invariant of maps S³ → S², computed four independent ways: the
//! Whitehead integral `∫ A ∧ dA`, the degree of the lifted Gauss map,
//! linking of preimage curves, and a Biot–Savart loop integral over them.

pub mod error;
pub mod fibers;
pub mod fields;
pub mod gauge;
pub mod geometry;
pub mod invariant;
pub mod links;
pub mod parallel;
pub mod report;
pub mod verify;

pub use error::{HopfError, Result};
