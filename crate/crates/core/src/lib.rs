//! Numerical laboratory for the vector Dyson equation `-1/m = z + S m`.
//!
//! The crate is organised around five analyses:
//!
//! - [`variance`]: loading variance profiles and the combinatorics of their
//!   zero pattern (maximal zero rectangles, staircase detection, permutation
//!   recovery, irreducibility of anti-diagonal blocks, block expansion).
//! - [`solver`]: the self-consistent solve on the upper half-plane, path
//!   continuation along rays, and the stability operator `F = |m| S |m|`.
//! - [`asymptotics`]: power-law exponents, phases and limiting constants of
//!   the solution as `z -> 0` for staircase profiles, plus the block-averaged
//!   reduction used for non-constant block profiles.
//! - [`density`]: the self-consistent density of states and its divergence at
//!   the origin.
//! - [`montecarlo`]: sampled random block matrices for cross-validation.

pub mod asymptotics;
pub mod density;
mod error;
pub mod linalg;
pub mod montecarlo;
pub mod rng;
pub mod solver;
pub mod variance;

pub use error::{Error, ErrorKind, Result};
pub use num_complex::Complex64;
