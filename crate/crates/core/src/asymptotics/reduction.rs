//! Block averaging of an expanded solution into an `n`-dimensional
//! VDE-like equation, and the uniform-bound sweep across block sizes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{predicted_exponent, predicted_phase};
use crate::solver::{solve_path, SolverOptions, VdeSolution};
use crate::variance::{expand_profile, VarianceProfile};
use crate::{Error, Result};

/// Coefficients of `-1 = w_k z m_k + sum_j s_kj m_k m_j` built from an
/// expanded solution, with diagnostics on their limiting behaviour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub omega: Vec<Complex64>,
    /// `s_hat[j][k]`, 0-based outer blocks.
    pub s_hat: Vec<Vec<Complex64>>,
    /// Representatives `m^{[k]}_1`.
    pub m_hat: Vec<Complex64>,
    pub residual: f64,
    /// `s_hat[j][k] == 0` exactly where block `(j, k)` of the profile vanishes.
    pub zero_pattern_matches: bool,
    pub max_arg_s_hat: f64,
    pub max_arg_omega: f64,
    pub s_hat_modulus_range: (f64, f64),
    pub omega_modulus_range: (f64, f64),
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

pub fn vde_like_reduce(solution: &VdeSolution, profile: &VarianceProfile) -> Result<Reduction> {
    let meta = profile.block_meta().ok_or_else(|| {
        Error::Precondition("reduction needs a profile with block metadata".into())
    })?;
    if solution.dim() != profile.dim() {
        return Err(Error::Precondition(
            "solution dimension does not match profile".into(),
        ));
    }
    let (n, inner) = (meta.n, meta.inner);
    let scale = inner as f64;
    let m = &solution.m;
    let z = solution.z();

    let m_hat: Vec<Complex64> = (0..n).map(|k| m[k * inner]).collect();
    let ratios: Vec<Vec<Complex64>> = (0..n)
        .map(|k| (0..inner).map(|nu| m[k * inner + nu] / m_hat[k]).collect())
        .collect();
    let omega: Vec<Complex64> = ratios
        .iter()
        .map(|r| r.iter().sum::<Complex64>() / scale)
        .collect();

    let block_zero = |j: usize, k: usize| {
        (0..inner).all(|a| (0..inner).all(|b| profile.is_zero(j * inner + a, k * inner + b)))
    };
    let mut s_hat = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (j, row) in s_hat.iter_mut().enumerate() {
        for (k, entry) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for nu in 0..inner {
                for tau in 0..inner {
                    let s = profile.get(k * inner + nu, j * inner + tau);
                    if s != 0.0 {
                        acc += ratios[k][nu] * ratios[j][tau] * s;
                    }
                }
            }
            *entry = acc / scale;
        }
    }

    let residual = (0..n)
        .map(|k| {
            let coupling: Complex64 = (0..n).map(|j| s_hat[k][j] * m_hat[k] * m_hat[j]).sum();
            (Complex64::new(1.0, 0.0) + omega[k] * z * m_hat[k] + coupling).norm()
        })
        .fold(0.0, f64::max);

    let zero_pattern_matches = (0..n)
        .all(|j| (0..n).all(|k| (s_hat[j][k] == Complex64::new(0.0, 0.0)) == block_zero(j, k)));
    let nonzero: Vec<Complex64> = s_hat
        .iter()
        .flatten()
        .copied()
        .filter(|s| s.norm() != 0.0)
        .collect();

    Ok(Reduction {
        max_arg_s_hat: nonzero.iter().map(|s| s.arg().abs()).fold(0.0, f64::max),
        max_arg_omega: omega.iter().map(|w| w.arg().abs()).fold(0.0, f64::max),
        s_hat_modulus_range: range(nonzero.iter().map(|s| s.norm())),
        omega_modulus_range: range(omega.iter().map(|w| w.norm())),
        omega,
        s_hat,
        m_hat,
        residual,
        zero_pattern_matches,
    })
}

/// Normalized moduli `|m_k| |z|^{-(1 - 2b/(n+1))}` of one expanded profile
/// at the smallest radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub inner: usize,
    /// Per outer block, `(min, max)` of the normalized modulus.
    pub block_ranges: Vec<(f64, f64)>,
    /// Largest deviation of `arg m_k - e phi_0` from `pi b/(n+1)`.
    pub max_phase_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Largest ratio max/min of the normalized modulus within one outer
    /// block, pooled over all block sizes.
    pub spread_factor: f64,
    /// Ratio max/min over every component and block size.
    pub global_ratio: f64,
}

fn sweep_row(solution: &VdeSolution, n: usize, inner: usize, angle: f64) -> SweepRow {
    let r = solution.z().norm();
    let mut block_ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
    let mut max_phase_deviation: f64 = 0.0;
    for (k, mk) in solution.m.iter().enumerate() {
        let b = k / inner;
        let e = predicted_exponent(b + 1, n);
        let v = mk.norm() * r.powf(-e);
        let slot = &mut block_ranges[b];
        *slot = (slot.0.min(v), slot.1.max(v));
        let dev = (mk.arg() - e * angle - predicted_phase(b + 1, n)).abs();
        max_phase_deviation = max_phase_deviation.max(dev);
    }
    SweepRow {
        inner,
        block_ranges,
        max_phase_deviation,
    }
}

/// Expand `small` for each block size in `inners`, solve along the ray and
/// compare the normalized moduli at the smallest radius across block sizes.
pub fn uniform_bound_sweep(
    small: &VarianceProfile,
    inners: &[usize],
    noise: f64,
    seed: u64,
    angle: f64,
    radii: &[f64],
    opts: &SolverOptions,
) -> Result<SweepTable> {
    if inners.is_empty() {
        return Err(Error::Precondition("empty list of block sizes".into()));
    }
    let n = small.dim();
    let rows = inners
        .par_iter()
        .map(|&inner| {
            let big = expand_profile(small, inner, noise, seed)?;
            let path = solve_path(&big, angle, radii, opts)?;
            Ok(sweep_row(path.last().unwrap(), n, inner, angle))
        })
        .collect::<Result<Vec<SweepRow>>>()?;

    let spread_factor = (0..n)
        .map(|b| {
            let (lo, hi) = range(
                rows.iter()
                    .flat_map(|row| [row.block_ranges[b].0, row.block_ranges[b].1]),
            );
            hi / lo
        })
        .fold(1.0, f64::max);
    let (lo, hi) = range(
        rows.iter()
            .flat_map(|row| row.block_ranges.iter().flat_map(|&(a, b)| [a, b])),
    );
    Ok(SweepTable {
        rows,
        spread_factor,
        global_ratio: hi / lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, SpectralPoint};
    use crate::variance::VarianceProfile;
    use std::f64::consts::FRAC_PI_2;

    fn small2() -> VarianceProfile {
        VarianceProfile::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn solve_at(p: &VarianceProfile, r: f64) -> VdeSolution {
        solve(
            p,
            SpectralPoint::on_ray(r, FRAC_PI_2).unwrap(),
            &SolverOptions::default(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn constant_blocks_reduce_to_small_profile() {
        let small = small2();
        let big = expand_profile(&small, 4, 0.0, 1).unwrap();
        let red = vde_like_reduce(&solve_at(&big, 1e-3), &big).unwrap();
        for k in 0..2 {
            assert!((red.omega[k] - 1.0).norm() < 1e-10);
            for j in 0..2 {
                assert!((red.s_hat[j][k] - small.get(j, k)).norm() < 1e-10);
            }
        }
        assert!(red.zero_pattern_matches);
        assert!(red.residual < 1e-10);
    }

    #[test]
    fn noisy_blocks_have_real_positive_limits() {
        let big = expand_profile(&small2(), 8, 0.5, 7).unwrap();
        let red = vde_like_reduce(&solve_at(&big, 1e-5), &big).unwrap();
        assert!(red.zero_pattern_matches);
        assert!(red.residual <= 1e-10, "{}", red.residual);
        assert!(red.max_arg_s_hat < 0.05, "{red:?}");
        assert!(red.max_arg_omega < 0.05, "{red:?}");
        assert!(red.s_hat_modulus_range.0 > 0.0);
    }

    #[test]
    fn reduction_requires_blocks() {
        let p = small2();
        assert!(vde_like_reduce(&solve_at(&p, 1e-2), &p).is_err());
    }

    #[test]
    fn sweep_without_noise_has_unit_spread() {
        let radii = crate::solver::geometric_radii(1e-1, 1e-4, 4).unwrap();
        let table = uniform_bound_sweep(
            &small2(),
            &[2, 4],
            0.0,
            0,
            FRAC_PI_2,
            &radii,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((table.spread_factor - 1.0).abs() < 1e-9, "{table:?}");
        assert_eq!(table.rows.len(), 2);
    }
}
