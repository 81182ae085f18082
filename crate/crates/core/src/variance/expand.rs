use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_assumption_staircase, BlockMeta, VarianceProfile};
use crate::{rng, Error, Result};

/// Expand an `n x n` staircase profile into an `nN x nN` profile with
/// non-constant blocks.
///
/// Each positive `s_jk` becomes an `N x N` block with entries uniform in
/// `[s_jk (1 - noise) / N, s_jk (1 + noise) / N]`, keyed by `(seed, row, col)`;
/// the matrix is then symmetrised as `(X + X^T) / 2`.
pub fn expand_profile(
    small: &VarianceProfile,
    inner: usize,
    noise: f64,
    seed: u64,
) -> Result<VarianceProfile> {
    if !(0.0..1.0).contains(&noise) {
        return Err(Error::Precondition(format!(
            "noise must lie in [0, 1), got {noise}"
        )));
    }
    if inner == 0 {
        return Err(Error::Precondition(
            "inner block size must be positive".into(),
        ));
    }
    if !check_assumption_staircase(small).holds {
        return Err(Error::Precondition(
            "small profile is not in staircase form".into(),
        ));
    }
    let n = small.dim();
    let dim = n * inner;
    let scale = inner as f64;
    let raw = DMatrix::from_fn(dim, dim, |a, b| {
        let s = small.get(a / inner, b / inner);
        if s == 0.0 {
            return 0.0;
        }
        if noise == 0.0 {
            return s / scale;
        }
        let u: f64 = rng::entry_stream(seed, rng::DOMAIN_EXPANSION, 0, dim, a, b).random();
        s * (1.0 - noise + 2.0 * noise * u) / scale
    });
    let sym = DMatrix::from_fn(dim, dim, |a, b| 0.5 * (raw[(a, b)] + raw[(b, a)]));
    VarianceProfile::from_matrix(sym, Some(BlockMeta { n, inner }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockConditionReport {
    pub uniform_blocks: bool,
    pub bounds_hold: bool,
    pub zero_above_antidiagonal: bool,
    pub positive_on_antidiagonals: bool,
}

impl BlockConditionReport {
    pub fn all(&self) -> bool {
        self.uniform_blocks
            && self.bounds_hold
            && self.zero_above_antidiagonal
            && self.positive_on_antidiagonals
    }
}

/// Check the non-constant block conditions: each block uniformly zero or
/// positive, positive entries within `[lower / N, upper / N]`, blocks zero for
/// `j + k > n + 1` and positive for `j + k` in `{n, n + 1}` (1-based).
pub fn check_block_conditions(
    profile: &VarianceProfile,
    lower: f64,
    upper: f64,
) -> Result<BlockConditionReport> {
    let meta = profile
        .block_meta()
        .ok_or_else(|| Error::Precondition("profile has no block metadata".into()))?;
    let (n, inner) = (meta.n, meta.inner);
    let scale = inner as f64;
    let mut report = BlockConditionReport {
        uniform_blocks: true,
        bounds_hold: true,
        zero_above_antidiagonal: true,
        positive_on_antidiagonals: true,
    };
    for bj in 0..n {
        for bk in 0..n {
            let block: Vec<f64> = (0..inner)
                .flat_map(|a| (0..inner).map(move |b| (a, b)))
                .map(|(a, b)| profile.get(bj * inner + a, bk * inner + b))
                .collect();
            let zeros = block.iter().filter(|&&v| v == 0.0).count();
            let all_zero = zeros == block.len();
            if zeros != 0 && !all_zero {
                report.uniform_blocks = false;
            }
            if !all_zero
                && block
                    .iter()
                    .any(|&v| v < lower / scale || v > upper / scale)
            {
                report.bounds_hold = false;
            }
            let sum = bj + bk + 2;
            if sum > n + 1 && !all_zero {
                report.zero_above_antidiagonal = false;
            }
            if (sum == n || sum == n + 1) && zeros != 0 {
                report.positive_on_antidiagonals = false;
            }
        }
    }
    Ok(report)
}
