//! Checks on a converged solution: the stability operator, the exact
//! quadratic identity it satisfies, and the a-priori size bounds.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{stability_matrix_raw, VdeSolution};
use crate::linalg::normalized_l2;
use crate::variance::VarianceProfile;
use crate::{Error, Result};

/// `F_kj = |m_k| s_kj |m_j|`.
pub fn stability_matrix(solution: &VdeSolution, profile: &VarianceProfile) -> DMatrix<f64> {
    stability_matrix_raw(profile.entries(), &solution.m)
}

/// Normalised L2 norm of `F^2 u - u - (conj(z) I - z F) |m|` with
/// `u = m / |m|`.
///
/// The expression vanishes identically for the exact solution, so the value
/// measures how well `m` solves the equation.
pub fn saturation_identity_residual(solution: &VdeSolution, profile: &VarianceProfile) -> f64 {
    let f = stability_matrix(solution, profile);
    let z = solution.z();
    let abs: Vec<f64> = solution.m.iter().map(|c| c.norm()).collect();
    let u: Vec<Complex64> = solution.m.iter().zip(&abs).map(|(c, a)| c / a).collect();
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        (0..v.len())
            .map(|k| v.iter().enumerate().map(|(j, x)| x * f[(k, j)]).sum())
            .collect()
    };
    let fu = apply(&u);
    let ffu = apply(&fu);
    let f_abs: Vec<f64> = (0..abs.len())
        .map(|k| abs.iter().enumerate().map(|(j, a)| f[(k, j)] * a).sum())
        .collect();
    let diff: Vec<Complex64> = (0..u.len())
        .map(|k| ffu[k] - u[k] - (z.conj() * abs[k] - z * f_abs[k]))
        .collect();
    normalized_l2(&diff)
}

/// Size of the solution relative to `|z|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub abs_z: f64,
    /// `|m_k| |z|` per component.
    pub m_times_z: Vec<f64>,
    /// `|z| / |m_k|` per component.
    pub z_over_m: Vec<f64>,
    pub min_m_times_z: f64,
    pub max_z_over_m: f64,
    /// `|m|_2 |z|`, bounded by 2.
    pub norm_m_times_z: f64,
    /// `|1/m|_2 |z|`, bounded by `|z|^2 + 2 |S|`.
    pub norm_inv_m_times_z: f64,
    pub upper_bound_holds: bool,
    pub lower_bound_holds: bool,
}

impl BoundsReport {
    pub fn holds(&self) -> bool {
        self.upper_bound_holds && self.lower_bound_holds
    }
}

/// Measure `c |z| < |m_k| < C / |z|` through the norm estimates
/// `|m|_2 <= 2 / |z|` and `|1/m|_2 <= |z| + 2 |S| / |z|`.
pub fn check_solution_bounds(
    solution: &VdeSolution,
    profile: &VarianceProfile,
) -> Result<BoundsReport> {
    let abs_z = solution.z().norm();
    if abs_z >= 1.0 {
        return Err(Error::Precondition(format!(
            "bounds apply for |z| < 1, got {abs_z}"
        )));
    }
    let m_times_z: Vec<f64> = solution.m.iter().map(|c| c.norm() * abs_z).collect();
    let z_over_m: Vec<f64> = solution.m.iter().map(|c| abs_z / c.norm()).collect();
    let inv: Vec<Complex64> = solution.m.iter().map(|c| c.inv()).collect();
    let norm_m_times_z = normalized_l2(&solution.m) * abs_z;
    let norm_inv_m_times_z = normalized_l2(&inv) * abs_z;
    let s_norm = profile.spectral_norm();
    // small slack for rounding in the norms themselves
    let slack = 1.0 + 1e-9;
    Ok(BoundsReport {
        abs_z,
        min_m_times_z: m_times_z.iter().cloned().fold(f64::INFINITY, f64::min),
        max_z_over_m: z_over_m.iter().cloned().fold(0.0, f64::max),
        upper_bound_holds: norm_m_times_z <= 2.0 * slack,
        lower_bound_holds: norm_inv_m_times_z <= (abs_z * abs_z + 2.0 * s_norm) * slack,
        m_times_z,
        z_over_m,
        norm_m_times_z,
        norm_inv_m_times_z,
    })
}
