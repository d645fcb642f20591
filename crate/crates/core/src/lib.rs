//! Equilibrium measures, capacities, and Green's functions for polynomial
//! preimages and filled Julia sets, with diagnostics for regular and
//! centering polynomial sequences and their derivative towers.
//!
//! Modules:
//! - [`poly`]: dense complex polynomials and the named sequence generators.
//! - [`roots`]: simultaneous root finding, level-set fibers, zero clusters.
//! - [`measure`]: discrete measures, potentials, energy, capacity, moments,
//!   Fekete points.
//! - [`dynamics`]: escape-time Green's functions, filled-Julia membership,
//!   Brolin sampling, capacity identities, reference domains.
//! - [`regularity`]: regularity/centering diagnostics, balanced pullbacks,
//!   heredity and convergence experiments.
//! - [`render`]: rasterization of Green fields to portable pixmaps.
//!
//! Everything is deterministic: fixed seeds, fixed initial configurations,
//! and index-ordered parallel reductions make results bit-identical across
//! thread counts and across the `parallel`/sequential builds.

pub mod dynamics;
pub mod error;
pub mod jsonfmt;
pub mod measure;
mod parallel;
pub mod poly;
pub mod regularity;
pub mod render;
pub mod roots;
mod sum;
mod wide;

pub use error::{Error, Result};
