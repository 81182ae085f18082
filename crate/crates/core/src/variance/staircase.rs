//! Staircase zero pattern: positive on the anti-diagonal and the diagonal
//! just above it, zero strictly below the anti-diagonal.

use serde::{Deserialize, Serialize};

use super::VarianceProfile;
use crate::{Error, Result};

/// A single entry disagreeing with the staircase pattern (0-based indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub row: usize,
    pub col: usize,
    /// `true` if the pattern requires zero here, `false` if it requires a positive entry.
    pub expected_zero: bool,
    pub found: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseCheck {
    pub holds: bool,
    pub violations: Vec<Violation>,
}

/// Check the staircase pattern in the given index order.
///
/// With 1-based indices: `s_ij > 0` for `i + j` in `{dim, dim + 1}` and
/// `s_ij = 0` for `i + j >= dim + 2`. Other entries are unconstrained.
pub fn check_assumption_staircase(profile: &VarianceProfile) -> StaircaseCheck {
    let dim = profile.dim();
    let mut violations = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            // 1-based sum minus 2
            let s = i + j;
            let found = profile.get(i, j);
            if s + 2 >= dim + 2 {
                if found != 0.0 {
                    violations.push(Violation {
                        row: i,
                        col: j,
                        expected_zero: true,
                        found,
                    });
                }
            } else if s + 2 >= dim && found <= 0.0 {
                violations.push(Violation {
                    row: i,
                    col: j,
                    expected_zero: false,
                    found,
                });
            }
        }
    }
    StaircaseCheck {
        holds: violations.is_empty(),
        violations,
    }
}

/// Upper bound on the number of tie-group orderings tried before giving up.
const MAX_CANDIDATES: u64 = 1_000_000;

/// Find `perm` such that `s[perm[i]][perm[j]]` has the staircase pattern.
///
/// In the staircase row `i` (1-based) has exactly `i - 1` zeros, so rows are
/// sorted by zero count; rows with equal counts are tried in every order.
pub fn recover_staircase_permutation(profile: &VarianceProfile) -> Result<Vec<usize>> {
    let dim = profile.dim();
    let zeros: Vec<usize> = (0..dim)
        .map(|i| (0..dim).filter(|&j| profile.is_zero(i, j)).count())
        .collect();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by_key(|&i| (zeros[i], i));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if zeros[g[0]] == zeros[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let candidates = groups
        .iter()
        .map(|g| (1..=g.len() as u64).product::<u64>())
        .try_fold(1u64, |acc, f| acc.checked_mul(f))
        .unwrap_or(u64::MAX);
    if candidates > MAX_CANDIDATES {
        return Err(Error::NoStaircasePermutation);
    }

    let mut current = Vec::with_capacity(dim);
    if search_groups(profile, &mut groups, 0, &mut current) {
        Ok(current)
    } else {
        Err(Error::NoStaircasePermutation)
    }
}

fn search_groups(
    profile: &VarianceProfile,
    groups: &mut [Vec<usize>],
    g: usize,
    current: &mut Vec<usize>,
) -> bool {
    if g == groups.len() {
        return profile
            .permuted(current)
            .map(|p| check_assumption_staircase(&p).holds)
            .unwrap_or(false);
    }
    let len = groups[g].len();
    permute_group(profile, groups, g, 0, len, current)
}

// Heap-free recursive permutation of `groups[g][k..]`.
fn permute_group(
    profile: &VarianceProfile,
    groups: &mut [Vec<usize>],
    g: usize,
    k: usize,
    len: usize,
    current: &mut Vec<usize>,
) -> bool {
    if k == len {
        let base = current.len();
        current.extend_from_slice(&groups[g]);
        if search_groups(profile, groups, g + 1, current) {
            return true;
        }
        current.truncate(base);
        return false;
    }
    for i in k..len {
        groups[g].swap(k, i);
        if permute_group(profile, groups, g, k + 1, len, current) {
            return true;
        }
        groups[g].swap(k, i);
    }
    false
}
