//! Behaviour of the solution as `z -> 0` for staircase profiles.
//!
//! Component `k` (1-based) of an `n`-dimensional staircase solution scales
//! like `c_k e^{i pi k/(n+1)} z^{1 - 2k/(n+1)}`. This module computes the
//! constants `c_k` from the log-linear system they satisfy, fits exponents
//! and phases along solved rays, checks the pairwise relations between
//! components, and reduces non-constant block solutions to an
//! `n`-dimensional equation with asymptotically positive coefficients.

mod constants;
mod fit;
mod reduction;
mod relations;

pub use constants::{
    constant_system, constant_system_residuals, limit_constants, ConstantSystem, MAX_CONDITION,
};
pub use fit::{fit_asymptotics, fit_table, predicted_exponent, predicted_phase, AsymptoticFit};
pub use reduction::{uniform_bound_sweep, vde_like_reduce, Reduction, SweepRow, SweepTable};
pub use relations::{
    pair_product_check, ratio_relation_check, zm_vanishing_check, PairProduct, RatioRelation,
    ZmReport,
};
