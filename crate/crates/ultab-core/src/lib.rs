//! Finite-model machinery for uniform local tabularity of superintuitionistic
//! logics: posets and their upset algebras, Kripke models, bounded
//! bisimulations, p-morphisms, Jankov formulas, the standard frame families
//! and a bounded decision procedure for the degree of uniformity.
//!
//! Everything here is pure computation over finite structures with at most
//! [`MAX_WORLDS`] points, so the crate builds without `std`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bisim;
pub mod canon;
pub mod error;
pub mod families;
pub mod formula;
pub mod heyting;
pub mod morphism;
pub mod poset;
pub mod semantics;
pub mod uniformity;

mod bits;

pub use error::{Error, Result};
pub use formula::Formula;
pub use poset::{Poset, Upset, MAX_WORLDS};
pub use semantics::Model;
