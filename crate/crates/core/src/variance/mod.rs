//! Variance profiles and the combinatorics of their zero pattern.

mod expand;
mod irreducible;
mod profile;
mod rectangles;
mod staircase;

pub use expand::{check_block_conditions, expand_profile, BlockConditionReport};
pub use irreducible::{antidiagonal_irreducibility, is_strongly_connected};
pub use profile::{load_profile, BlockMeta, ProfileDocument, VarianceProfile};
pub use rectangles::{
    classify_regime, maximal_zero_rectangles, maximal_zero_rectangles_with_cap, Regime,
    StructureReport, ZeroRectangle, DEFAULT_RECTANGLE_CAP,
};
pub use staircase::{
    check_assumption_staircase, recover_staircase_permutation, StaircaseCheck, Violation,
};
