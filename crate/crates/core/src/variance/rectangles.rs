//! Maximal all-zero rectangles of a variance profile.
//!
//! A zero rectangle is a pair of index sets `(rows, cols)` with `s_ij = 0`
//! for every `i in rows`, `j in cols`. Index sets need not be contiguous, so
//! the rectangles are the maximal bicliques of the bipartite graph whose
//! edges are the zero entries. They are enumerated with close-by-one
//! branching over rows: each node intersects the zero columns of the chosen
//! rows, closes the row set, and is kept only if the closure adds no row
//! earlier than the branching row. Every closed pair is visited once.

use serde::{Deserialize, Serialize};

use super::VarianceProfile;
use super::{antidiagonal_irreducibility, recover_staircase_permutation};
use crate::{Error, Result};

/// Largest dimension accepted by the exhaustive search.
pub const DEFAULT_RECTANGLE_CAP: usize = 20;

/// A maximal all-zero submatrix. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroRectangle {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub perimeter: usize,
}

impl ZeroRectangle {
    fn from_masks(rows: u32, cols: u32) -> Self {
        let rows = bits(rows);
        let cols = bits(cols);
        let perimeter = 2 * (rows.len() + cols.len());
        Self {
            rows,
            cols,
            perimeter,
        }
    }
}

fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Behaviour of the solution at `z = 0` predicted by the zero pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Every zero rectangle has perimeter `< 2 dim`; the solution stays bounded.
    Bounded,
    /// Largest perimeter in `[2 dim, 2 dim + 1]`.
    CriticalStaircase,
    /// Some perimeter `>= 2 (dim + 1)`; a point mass appears at zero.
    RankDeficient,
}

impl Regime {
    pub fn from_perimeter(max_perimeter: usize, dim: usize) -> Self {
        if max_perimeter >= 2 * (dim + 1) {
            Regime::RankDeficient
        } else if max_perimeter < 2 * dim {
            Regime::Bounded
        } else {
            Regime::CriticalStaircase
        }
    }
}

/// Combined structural analysis of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub dim: usize,
    pub regime: Regime,
    pub max_perimeter: usize,
    pub critical_count: usize,
    pub critical_blocks: Vec<ZeroRectangle>,
    /// `perm[i]` is the original index placed at position `i` (0-based).
    pub staircase_permutation: Option<Vec<usize>>,
    pub antidiagonal_positive: bool,
    pub super_antidiagonal_positive: bool,
    pub block_partition: Option<Vec<usize>>,
    pub irreducibility: Option<Vec<bool>>,
}

/// Enumerate every maximal zero rectangle with the default dimension cap.
pub fn maximal_zero_rectangles(profile: &VarianceProfile) -> Result<Vec<ZeroRectangle>> {
    maximal_zero_rectangles_with_cap(profile, DEFAULT_RECTANGLE_CAP)
}

pub fn maximal_zero_rectangles_with_cap(
    profile: &VarianceProfile,
    cap: usize,
) -> Result<Vec<ZeroRectangle>> {
    let dim = profile.dim();
    if dim > cap || dim > 31 {
        return Err(Error::DimensionCap {
            dim,
            cap: cap.min(31),
        });
    }
    let zero_cols: Vec<u32> = (0..dim)
        .map(|i| {
            (0..dim)
                .filter(|&j| profile.is_zero(i, j))
                .fold(0u32, |m, j| m | (1 << j))
        })
        .collect();
    let all_cols = if dim == 32 {
        u32::MAX
    } else {
        (1u32 << dim) - 1
    };

    let mut out = Vec::new();
    let mut search = Search {
        zero_cols: &zero_cols,
        out: &mut out,
    };
    search.extend(0, 0, all_cols);

    out.sort_by(|a, b| {
        b.perimeter
            .cmp(&a.perimeter)
            .then_with(|| a.rows.cmp(&b.rows))
            .then_with(|| a.cols.cmp(&b.cols))
    });
    Ok(out)
}

struct Search<'a> {
    zero_cols: &'a [u32],
    out: &'a mut Vec<ZeroRectangle>,
}

impl Search<'_> {
    fn closure(&self, cols: u32) -> u32 {
        self.zero_cols
            .iter()
            .enumerate()
            .filter(|(_, &z)| z & cols == cols)
            .fold(0u32, |m, (i, _)| m | (1 << i))
    }

    fn extend(&mut self, start: usize, rows: u32, cols: u32) {
        for r in start..self.zero_cols.len() {
            if rows & (1 << r) != 0 {
                continue;
            }
            let next_cols = cols & self.zero_cols[r];
            if next_cols == 0 {
                continue;
            }
            let closed = self.closure(next_cols);
            let earlier = (1u32 << r) - 1;
            if closed & earlier & !rows != 0 {
                continue;
            }
            self.out.push(ZeroRectangle::from_masks(closed, next_cols));
            self.extend(r + 1, closed, next_cols);
        }
    }
}

/// Classify the zero pattern and gather the staircase diagnostics.
pub fn classify_regime(profile: &VarianceProfile) -> Result<StructureReport> {
    let dim = profile.dim();
    let rectangles = maximal_zero_rectangles(profile)?;
    let max_perimeter = rectangles.first().map_or(0, |r| r.perimeter);
    let regime = Regime::from_perimeter(max_perimeter, dim);
    let critical_blocks: Vec<ZeroRectangle> = rectangles
        .into_iter()
        .filter(|r| r.perimeter == 2 * dim || r.perimeter == 2 * dim + 1)
        .collect();

    let staircase_permutation = recover_staircase_permutation(profile).ok();
    let arranged = match &staircase_permutation {
        Some(p) => profile.permuted(p)?,
        None => profile.clone(),
    };
    let (antidiagonal_positive, super_antidiagonal_positive) = antidiagonal_flags(&arranged);

    let block_partition = match profile.block_meta() {
        Some(meta) => Some(vec![meta.inner; meta.n]),
        None if staircase_permutation.is_some() => Some(vec![1; dim]),
        None => None,
    };
    let irreducibility = match &block_partition {
        Some(partition) => {
            let target = if profile.block_meta().is_some() {
                profile
            } else {
                &arranged
            };
            Some(antidiagonal_irreducibility(target, partition)?)
        }
        None => None,
    };

    Ok(StructureReport {
        dim,
        regime,
        max_perimeter,
        critical_count: critical_blocks.len(),
        critical_blocks,
        staircase_permutation,
        antidiagonal_positive,
        super_antidiagonal_positive,
        block_partition,
        irreducibility,
    })
}

/// Positivity of the anti-diagonal (`i + j = dim + 1`, 1-based) and of the
/// diagonal just above it (`i + j = dim`).
fn antidiagonal_flags(profile: &VarianceProfile) -> (bool, bool) {
    let dim = profile.dim();
    let anti = (0..dim).all(|i| profile.get(i, dim - 1 - i) > 0.0);
    let sup = (0..dim.saturating_sub(1)).all(|i| profile.get(i, dim - 2 - i) > 0.0);
    (anti, sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(rows: &[&[f64]]) -> VarianceProfile {
        VarianceProfile::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    /// Independent oracle: all (row subset, col subset) pairs that are
    /// all-zero and cannot be extended.
    fn brute_force(p: &VarianceProfile) -> Vec<ZeroRectangle> {
        let dim = p.dim();
        let zero = |rows: u32, cols: u32| {
            (0..dim).all(|i| {
                rows & (1 << i) == 0 || (0..dim).all(|j| cols & (1 << j) == 0 || p.is_zero(i, j))
            })
        };
        let mut out = Vec::new();
        for rows in 1u32..(1 << dim) {
            for cols in 1u32..(1 << dim) {
                if !zero(rows, cols) {
                    continue;
                }
                let row_ext = (0..dim).any(|i| rows & (1 << i) == 0 && zero(rows | (1 << i), cols));
                let col_ext = (0..dim).any(|j| cols & (1 << j) == 0 && zero(rows, cols | (1 << j)));
                if !row_ext && !col_ext {
                    out.push(ZeroRectangle::from_masks(rows, cols));
                }
            }
        }
        out.sort_by(|a, b| {
            b.perimeter
                .cmp(&a.perimeter)
                .then_with(|| a.rows.cmp(&b.rows))
                .then_with(|| a.cols.cmp(&b.cols))
        });
        out
    }

    #[test]
    fn single_zero_entry() {
        let p = profile(&[&[1.0, 1.0], &[1.0, 0.0]]);
        let r = maximal_zero_rectangles(&p).unwrap();
        assert_eq!(
            r,
            vec![ZeroRectangle {
                rows: vec![1],
                cols: vec![1],
                perimeter: 4
            }]
        );
    }

    #[test]
    fn three_by_three_staircase_has_two_rectangles() {
        let p = profile(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]);
        let r = maximal_zero_rectangles(&p).unwrap();
        assert_eq!(r, brute_force(&p));
        assert_eq!(
            r,
            vec![
                ZeroRectangle {
                    rows: vec![1, 2],
                    cols: vec![2],
                    perimeter: 6
                },
                ZeroRectangle {
                    rows: vec![2],
                    cols: vec![1, 2],
                    perimeter: 6
                },
            ]
        );
    }

    #[test]
    fn positive_matrix_has_none() {
        let p = profile(&[&[1.0; 3], &[1.0; 3], &[1.0; 3]]);
        assert!(maximal_zero_rectangles(&p).unwrap().is_empty());
        let rep = classify_regime(&p).unwrap();
        assert_eq!(rep.regime, Regime::Bounded);
        assert_eq!(rep.max_perimeter, 0);
    }

    #[test]
    fn classify_examples() {
        let p = profile(&[&[1.0, 1.0], &[1.0, 0.0]]);
        let rep = classify_regime(&p).unwrap();
        assert_eq!(rep.regime, Regime::CriticalStaircase);
        assert_eq!(rep.max_perimeter, 4);
        assert_eq!(rep.critical_count, 1);
        assert_eq!(rep.irreducibility, Some(vec![true, true]));

        let p = profile(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let rep = classify_regime(&p).unwrap();
        assert_eq!(rep.regime, Regime::RankDeficient);
        assert_eq!(rep.max_perimeter, 6);
    }

    #[test]
    fn cap_is_enforced() {
        let dim = 21;
        let p = VarianceProfile::from_rows(&vec![vec![1.0; dim]; dim]).unwrap();
        assert!(matches!(
            maximal_zero_rectangles(&p),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn agrees_with_brute_force_on_patterns() {
        // all symmetric 0/1 patterns on 4 indices
        let pairs: Vec<(usize, usize)> = (0..4).flat_map(|i| (i..4).map(move |j| (i, j))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let mut rows = vec![vec![1.0; 4]; 4];
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    rows[i][j] = 0.0;
                    rows[j][i] = 0.0;
                }
            }
            let p = VarianceProfile::from_rows(&rows).unwrap();
            assert_eq!(
                maximal_zero_rectangles(&p).unwrap(),
                brute_force(&p),
                "mask {mask:b}"
            );
        }
    }
}
