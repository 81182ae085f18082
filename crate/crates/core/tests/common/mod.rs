#![allow(dead_code)]

use vde_core::variance::VarianceProfile;

/// Staircase with `s_ij = value(i, j)` where `i + j <= n - 1` (0-based).
pub fn staircase_with(n: usize, value: impl Fn(usize, usize) -> f64) -> VarianceProfile {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i + j < n {
                        value(i.min(j), i.max(j))
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    VarianceProfile::from_rows(&rows).unwrap()
}

pub fn ones_staircase(n: usize) -> VarianceProfile {
    staircase_with(n, |_, _| 1.0)
}

/// Staircase whose upper-triangle entries are read from `weights` in order.
pub fn weighted_staircase(n: usize, weights: &[f64]) -> VarianceProfile {
    staircase_with(n, |i, j| weights[(i * n + j) % weights.len()])
}
