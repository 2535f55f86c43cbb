//! Exact dynamics of toral automorphisms acting on the closed subgroups
//! of the n-torus that lie in the closure of the one-parameter subgroups,
//! i.e. on subtori together with the trivial subgroup.
//!
//! All arithmetic is exact (`BigInt`); floating point appears only in the
//! certified Hausdorff metric estimates of [`torus::hausdorff_distance`].
//!
//! Module map:
//! - [`linalg`]: integer matrices, Hermite normal form, saturation,
//!   characteristic polynomials, factorization and finite-order tests.
//! - [`torus`]: subtori, annihilators, covector duality, the flat metric.
//! - [`dynamics`]: the action of GL(n,Z), orbits, and the deciders.
//! - [`constructions`]: disjoint orbit families, non-expansivity
//!   certificates and the independent certificate checker.
//! - [`io`]: JSON formats, job specs and report envelopes.

pub mod constructions;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod torus;

pub use error::{Error, Result};
