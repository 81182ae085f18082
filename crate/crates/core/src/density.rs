//! Self-consistent density of states `rho(E) = (1/(pi n)) sum_k Im m_k(E + i0)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::linear_fit;
use crate::solver::{solve, SolverOptions, SpectralPoint};
use crate::variance::{check_assumption_staircase, VarianceProfile};
use crate::{Error, Result};

/// Geometric schedule `1e-2, 1e-3, ..., 1e-8`. The last three values stay
/// well below the smallest default grid energy `1e-4`.
pub fn default_eta_schedule() -> Vec<f64> {
    (2..=8).map(|p| 10f64.powi(-p)).collect()
}

/// Window of `|E|` for the divergence fit stored by [`rho_grid`].
pub const DEFAULT_DIVERGENCE_WINDOW: (f64, f64) = (1e-4, 1e-3);

/// `2 sqrt(max row sum) + 0.5`, a safe bound on the support.
pub fn support_bound(profile: &VarianceProfile) -> f64 {
    2.0 * profile.max_row_sum().sqrt() + 0.5
}

/// Uniform grid of 400 points on `[-E_max, E_max]` merged with log-spaced
/// points `+-10^{-4} .. +-10^{-1}` at 16 per decade. Zero is never included.
pub fn default_energy_grid(e_max: f64) -> Vec<f64> {
    let uniform = 400;
    let mut grid: Vec<f64> = (0..uniform)
        .map(|j| -e_max + 2.0 * e_max * j as f64 / (uniform - 1) as f64)
        .collect();
    for j in 0..=48 {
        let e = 10f64.powf(-4.0 + j as f64 / 16.0);
        grid.push(e);
        grid.push(-e);
    }
    grid.retain(|e| *e != 0.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub value: f64,
    /// Smallest `eta` in the schedule.
    pub eta_used: f64,
    pub error_estimate: f64,
    /// The finite-`eta` values grow without converging as `eta -> 0`.
    pub divergent: bool,
}

fn validate_schedule(etas: &[f64]) -> Result<()> {
    if etas.len() < 3 {
        return Err(Error::Precondition(
            "eta schedule needs at least 3 values".into(),
        ));
    }
    if etas.iter().any(|e| !(e.is_finite() && *e > 0.0)) || etas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition(
            "eta schedule must be positive and strictly descending".into(),
        ));
    }
    if (etas[0] / etas[etas.len() - 1]).log10() < 2.0 - 1e-9 {
        return Err(Error::Precondition(
            "eta schedule must span at least two decades".into(),
        ));
    }
    Ok(())
}

/// Fit `a + b eta^beta` through the last three values and return `a`.
fn extrapolate(etas: &[f64], values: &[f64]) -> RhoEstimate {
    let k = values.len();
    let (v1, v2, v3) = (values[k - 3], values[k - 2], values[k - 1]);
    let (e2, e3) = (etas[k - 2], etas[k - 1]);
    let fallback = |divergent| RhoEstimate {
        value: v3.max(0.0),
        eta_used: e3,
        error_estimate: (v3 - v2).abs(),
        divergent,
    };
    let (d1, d2) = (v2 - v1, v3 - v2);
    if d1.abs() <= 1e-15 * v3.abs().max(1e-300) || d2 == 0.0 {
        return fallback(false);
    }
    let q = d2 / d1;
    if q >= 1.0 {
        return fallback(true);
    }
    if q <= 0.0 {
        return fallback(false);
    }
    // geometric steps t = eta_3/eta_2 give q = t^beta, and b eta_3^beta = d2 q/(q - 1)
    let t = e3 / e2;
    let beta = q.ln() / t.ln();
    if !beta.is_finite() || beta <= 0.0 {
        return fallback(false);
    }
    let correction = d2 * q / (q - 1.0);
    let a = v3 - correction;
    RhoEstimate {
        value: a.max(0.0),
        eta_used: e3,
        error_estimate: correction.abs(),
        divergent: false,
    }
}

/// Density at `energy` from warm-started solves down the `eta` schedule.
pub fn rho_at(
    profile: &VarianceProfile,
    energy: f64,
    etas: &[f64],
    opts: &SolverOptions,
) -> Result<RhoEstimate> {
    validate_schedule(etas)?;
    let scale = std::f64::consts::PI * profile.dim() as f64;
    let mut values = Vec::with_capacity(etas.len());
    let mut warm: Option<Vec<_>> = None;
    for &eta in etas {
        let point = SpectralPoint::new(energy, eta)?;
        let sol = solve(profile, point, opts, warm.as_deref()).map_err(|e| Error::EtaFailure {
            eta,
            source: Box::new(e),
        })?;
        values.push(sol.m.iter().map(|m| m.im).sum::<f64>() / scale);
        warm = Some(sol.m);
    }
    Ok(extrapolate(etas, &values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub energies: Vec<f64>,
    pub rho: Vec<f64>,
    pub eta_used: Vec<f64>,
    pub error_estimate: Vec<f64>,
    pub divergent: Vec<bool>,
    pub eta_schedule: Vec<f64>,
    pub e_max: f64,
    /// `-(n-1)/(n+1)` for (block) staircase profiles.
    pub predicted_exponent: Option<f64>,
    pub divergence_exponent: Option<f64>,
    pub divergence_constant: Option<f64>,
    pub total_mass: f64,
}

fn staircase_exponent(profile: &VarianceProfile) -> Option<f64> {
    let n = match profile.block_meta() {
        Some(meta) => meta.n,
        None if check_assumption_staircase(profile).holds => profile.dim(),
        None => return None,
    };
    Some(-((n as f64 - 1.0) / (n as f64 + 1.0)))
}

/// Density on `grid` (sorted on output) with its total mass. When the grid
/// holds enough points in [`DEFAULT_DIVERGENCE_WINDOW`] the divergence fit on
/// that window is stored as well.
pub fn rho_grid(
    profile: &VarianceProfile,
    grid: &[f64],
    etas: &[f64],
    opts: &SolverOptions,
) -> Result<DensityProfile> {
    validate_schedule(etas)?;
    let e_max = support_bound(profile);
    let mut energies: Vec<f64> = grid.to_vec();
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::Precondition("energy grid must be finite".into()));
    }
    energies.sort_by(f64::total_cmp);
    energies.dedup();
    let estimates = energies
        .par_iter()
        .map(|&e| rho_at(profile, e, etas, opts))
        .collect::<Result<Vec<_>>>()?;

    let mut dp = DensityProfile {
        rho: estimates.iter().map(|r| r.value).collect(),
        eta_used: estimates.iter().map(|r| r.eta_used).collect(),
        error_estimate: estimates.iter().map(|r| r.error_estimate).collect(),
        divergent: estimates.iter().map(|r| r.divergent).collect(),
        energies,
        eta_schedule: etas.to_vec(),
        e_max,
        predicted_exponent: staircase_exponent(profile),
        divergence_exponent: None,
        divergence_constant: None,
        total_mass: 0.0,
    };
    if let Ok(fit) = divergence_fit(&dp, DEFAULT_DIVERGENCE_WINDOW) {
        dp.divergence_exponent = Some(fit.exponent);
        dp.divergence_constant = Some(fit.constant);
    }
    dp.total_mass = total_mass(profile, &dp, etas, opts)?;
    Ok(dp)
}

/// `int_0^{e1} C E^alpha` through the two innermost points on one side.
fn power_law_fill(inner: (f64, f64), outer: (f64, f64)) -> f64 {
    let ((e1, r1), (e2, r2)) = (inner, outer);
    if r1 > 0.0 && r2 > 0.0 {
        let alpha = (r2 / r1).ln() / (e2 / e1).ln();
        if alpha > -1.0 && alpha.is_finite() {
            return e1 * r1 / (1.0 + alpha);
        }
    }
    e1 * r1
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

fn total_mass(
    profile: &VarianceProfile,
    dp: &DensityProfile,
    etas: &[f64],
    opts: &SolverOptions,
) -> Result<f64> {
    let mut points: Vec<(f64, f64)> = dp
        .energies
        .iter()
        .zip(&dp.rho)
        .zip(&dp.divergent)
        .filter(|(_, d)| !**d)
        .map(|((e, r), _)| (*e, *r))
        .collect();
    if points.is_empty() {
        return Ok(0.0);
    }
    if points[0].0 > -dp.e_max {
        points.insert(
            0,
            (-dp.e_max, rho_at(profile, -dp.e_max, etas, opts)?.value),
        );
    }
    if points[points.len() - 1].0 < dp.e_max {
        points.push((dp.e_max, rho_at(profile, dp.e_max, etas, opts)?.value));
    }
    let neg: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 < 0.0).collect();
    let pos: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 > 0.0).collect();
    let straddles = !neg.is_empty() && !pos.is_empty() && !points.iter().any(|p| p.0 == 0.0);
    if !straddles || neg.len() < 2 || pos.len() < 2 {
        return Ok(trapezoid(&points));
    }
    let mirrored = |p: (f64, f64)| (-p.0, p.1);
    let left = power_law_fill(mirrored(neg[neg.len() - 1]), mirrored(neg[neg.len() - 2]));
    let right = power_law_fill(pos[0], pos[1]);
    Ok(trapezoid(&neg) + left + right + trapezoid(&pos))
}

/// Power-law fit `rho ~ C |E|^alpha` on a window of `|E|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceFit {
    pub window: (f64, f64),
    pub exponent: f64,
    pub constant: f64,
    /// Exponent the normalization below uses: the staircase prediction when
    /// known, the fitted one otherwise.
    pub reference_exponent: f64,
    /// `(E, rho(E) |E|^{-reference_exponent})` at every window point.
    pub normalized: Vec<(f64, f64)>,
    /// `(max - min) / mean` of the normalized values.
    pub relative_spread: f64,
}

pub fn divergence_fit(dp: &DensityProfile, window: (f64, f64)) -> Result<DivergenceFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi && hi <= 0.1 * dp.e_max) {
        return Err(Error::Precondition(format!(
            "window ({lo}, {hi}) must lie within (0, {}]",
            0.1 * dp.e_max
        )));
    }
    let inside: Vec<(f64, f64)> = dp
        .energies
        .iter()
        .zip(&dp.rho)
        .filter(|(e, _)| e.abs() > lo && e.abs() < hi)
        .map(|(e, r)| (*e, *r))
        .collect();
    if inside.len() < 8 {
        return Err(Error::Fit(format!(
            "{} grid points in the window, need 8",
            inside.len()
        )));
    }
    if inside.iter().any(|(_, r)| *r <= 0.0) {
        return Err(Error::Fit("non-positive density inside the window".into()));
    }
    let xs: Vec<f64> = inside.iter().map(|(e, _)| e.abs().ln()).collect();
    let ys: Vec<f64> = inside.iter().map(|(_, r)| r.ln()).collect();
    let (exponent, intercept) =
        linear_fit(&xs, &ys).ok_or_else(|| Error::Fit("degenerate window".into()))?;
    let reference_exponent = dp.predicted_exponent.unwrap_or(exponent);
    let normalized: Vec<(f64, f64)> = inside
        .iter()
        .map(|(e, r)| (*e, r * e.abs().powf(-reference_exponent)))
        .collect();
    let (min, max, sum) = normalized.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, 0.0),
        |(a, b, s), (_, v)| (a.min(*v), b.max(*v), s + v),
    );
    let mean = sum / normalized.len() as f64;
    Ok(DivergenceFit {
        window,
        exponent,
        constant: intercept.exp(),
        reference_exponent,
        normalized,
        relative_spread: (max - min) / mean,
    })
}

/// `int_{-delta}^{delta} rho`: the fitted power law below the fit window
/// and the trapezoid rule over grid points from there up to `delta`.
pub fn mass_near_zero(dp: &DensityProfile, fit: &DivergenceFit, delta: f64) -> Result<f64> {
    let cut = fit.window.0;
    if delta <= 0.0 {
        return Ok(0.0);
    }
    let power = |e: f64| fit.constant * e.powf(fit.exponent + 1.0) / (fit.exponent + 1.0);
    if fit.exponent <= -1.0 {
        return Err(Error::Fit("fitted exponent is not integrable".into()));
    }
    if delta <= cut {
        return Ok(2.0 * power(delta));
    }
    let side = |sign: f64| -> Result<f64> {
        let mut pts: Vec<(f64, f64)> = dp
            .energies
            .iter()
            .zip(&dp.rho)
            .filter(|(e, _)| sign * **e >= cut && sign * **e <= delta)
            .map(|(e, r)| (sign * e, *r))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let covered = pts.first().is_some_and(|p| p.0 <= cut * 1.5)
            && pts.last().is_some_and(|p| p.0 >= delta * (1.0 - 1e-9));
        if !covered {
            return Err(Error::Fit(format!("grid does not cover [{cut}, {delta}]")));
        }
        Ok(power(pts[0].0) + trapezoid(&pts))
    };
    Ok(side(1.0)? + side(-1.0)?)
}

/// Tab-separated rows `E rho eta_used error_estimate divergent`.
pub fn density_table(dp: &DensityProfile) -> String {
    let mut out = String::from("E\trho\teta_used\terror_estimate\tdivergent\n");
    for j in 0..dp.energies.len() {
        let _ = writeln!(
            out,
            "{:.10e}\t{:.10e}\t{:.3e}\t{:.3e}\t{}",
            dp.energies[j], dp.rho[j], dp.eta_used[j], dp.error_estimate[j], dp.divergent[j]
        );
    }
    out
}
