//! Solver for `-1/m = z + S m` on the upper half-plane.
//!
//! The contract is a damped fixed-point iteration
//! `m <- (1 - a) m + a (-1 / (z + S m))` with adaptive damping. Close to
//! `z = 0` its contraction rate tends to one, so by default a guarded
//! Newton iteration on `1 + m (z + S m) = 0` runs first and the fixed-point
//! loop is only the fallback. Both keep every accepted iterate in the upper
//! half-plane.

mod diagnostics;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{real_matvec, solve_complex, symmetric_spectral_norm};
use crate::variance::VarianceProfile;
use crate::{Error, Result};

pub use diagnostics::{
    check_solution_bounds, saturation_identity_residual, stability_matrix, BoundsReport,
};

/// A point `z = E + i eta` with `eta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub re: f64,
    pub im: f64,
}

impl SpectralPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if im.is_nan() || im <= 0.0 || !re.is_finite() || !im.is_finite() {
            return Err(Error::Precondition(format!(
                "spectral point must lie in the upper half-plane, got {re} + {im}i"
            )));
        }
        Ok(Self { re, im })
    }

    /// `r e^{i angle}` with `angle` in `(0, pi)`.
    pub fn on_ray(radius: f64, angle: f64) -> Result<Self> {
        if !(angle > 0.0 && angle < std::f64::consts::PI) || radius.is_nan() || radius <= 0.0 {
            return Err(Error::Precondition(format!(
                "ray point needs radius > 0 and angle in (0, pi), got r={radius}, angle={angle}"
            )));
        }
        let z = Complex64::from_polar(radius, angle);
        Self::new(z.re, z.im)
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Bound on the scale-free defect `max_k |1 + m_k (z + (S m)_k)|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial (and maximal) fixed-point damping.
    pub damping: f64,
    /// Reach small `Im z` through a chain of warm-started solves when no
    /// warm start is supplied.
    pub continuation: bool,
    /// Use the Newton iteration before the fixed-point fallback.
    pub newton: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 1_000_000,
            damping: 1.0,
            continuation: true,
            newton: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Precondition(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Precondition(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Precondition("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Converged solution at one spectral point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SolutionRecord", try_from = "SolutionRecord")]
pub struct VdeSolution {
    pub point: SpectralPoint,
    pub m: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
    /// Spectral norm of `F = |m| S |m|`.
    pub f_norm: f64,
}

impl VdeSolution {
    pub fn z(&self) -> Complex64 {
        self.point.z()
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }
}

/// Wire form: `{"z": [re, im], "m": [[re, im], ...], "residual", "iterations", "f_norm"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub z: [f64; 2],
    pub m: Vec<[f64; 2]>,
    pub residual: f64,
    pub iterations: usize,
    pub f_norm: f64,
}

impl From<VdeSolution> for SolutionRecord {
    fn from(s: VdeSolution) -> Self {
        Self {
            z: [s.point.re, s.point.im],
            m: s.m.iter().map(|c| [c.re, c.im]).collect(),
            residual: s.residual,
            iterations: s.iterations,
            f_norm: s.f_norm,
        }
    }
}

impl TryFrom<SolutionRecord> for VdeSolution {
    type Error = Error;

    fn try_from(r: SolutionRecord) -> Result<Self> {
        Ok(Self {
            point: SpectralPoint::new(r.z[0], r.z[1])?,
            m: r.m.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
            residual: r.residual,
            iterations: r.iterations,
            f_norm: r.f_norm,
        })
    }
}

/// Scale-free defect `max_k |1 + m_k (z + (S m)_k)|`, i.e. the defect of the
/// equation `1/m_k + z + (S m)_k = 0` weighted by `|m_k|`.
pub fn residual(profile: &VarianceProfile, z: Complex64, m: &[Complex64]) -> f64 {
    let sm = real_matvec(profile.entries(), m);
    defect(z, m, &sm)
        .iter()
        .fold(0.0, |acc, g| acc.max(g.norm()))
}

fn defect(z: Complex64, m: &[Complex64], sm: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .zip(sm)
        .map(|(mk, smk)| Complex64::new(1.0, 0.0) + mk * (z + smk))
        .collect()
}

fn in_upper_half_plane(m: &[Complex64]) -> bool {
    m.iter()
        .all(|c| c.im > 0.0 && c.re.is_finite() && c.im.is_finite())
}

/// Spectral norm of `|m| S |m|`.
pub fn f_norm(profile: &VarianceProfile, m: &[Complex64]) -> f64 {
    symmetric_spectral_norm(&stability_matrix_raw(profile.entries(), m))
}

pub(crate) fn stability_matrix_raw(s: &DMatrix<f64>, m: &[Complex64]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |k, j| m[k].norm() * s[(k, j)] * m[j].norm())
}

/// Solve the equation at `point`.
///
/// Without a warm start the iteration begins at `m = i (1, ..., 1)`; when
/// `opts.continuation` is set and `Im z < 1/2`, that start is placed at
/// `Re z + i` and the solution is carried down to `point` by warm-started
/// solves.
pub fn solve(
    profile: &VarianceProfile,
    point: SpectralPoint,
    opts: &SolverOptions,
    warm_start: Option<&[Complex64]>,
) -> Result<VdeSolution> {
    opts.validate()?;
    let dim = profile.dim();
    if let Some(w) = warm_start {
        if w.len() != dim {
            return Err(Error::Precondition(format!(
                "warm start has length {}, expected {}",
                w.len(),
                dim
            )));
        }
        if !in_upper_half_plane(w) {
            return Err(Error::Precondition(
                "warm start must lie in the upper half-plane".into(),
            ));
        }
        return continue_to(profile, point.z(), w, point, opts, 0);
    }

    let initial = vec![Complex64::new(0.0, 1.0); dim];
    if !opts.continuation || point.im >= 0.5 {
        return solve_from(profile, point, initial, opts);
    }

    let mut current = solve_from(profile, SpectralPoint::new(point.re, 1.0)?, initial, opts)?;
    let mut iterations = current.iterations;
    let step = 10f64.powf(-0.25);
    let mut eta = 1.0 * step;
    while eta > point.im {
        let p = SpectralPoint::new(point.re, eta)?;
        current = continue_to(profile, current.z(), &current.m, p, opts, 0)?;
        iterations += current.iterations;
        eta *= step;
    }
    let mut last = continue_to(profile, current.z(), &current.m, point, opts, 0)?;
    last.iterations += iterations;
    Ok(last)
}

const MAX_BISECTIONS: usize = 12;

/// Warm-started solve at `target`; on failure, first solve at the log-polar
/// midpoint between `from` and `target`.
fn continue_to(
    profile: &VarianceProfile,
    from: Complex64,
    warm: &[Complex64],
    target: SpectralPoint,
    opts: &SolverOptions,
    depth: usize,
) -> Result<VdeSolution> {
    match solve_from(profile, target, warm.to_vec(), opts) {
        Ok(s) => Ok(s),
        Err(e) if depth >= MAX_BISECTIONS => Err(e),
        Err(_) => {
            let to = target.z();
            let r = (from.norm() * to.norm()).sqrt();
            let angle = 0.5 * (from.arg() + to.arg());
            let mid_z = Complex64::from_polar(r, angle);
            let mid = SpectralPoint::new(mid_z.re, mid_z.im)?;
            let half = continue_to(profile, from, warm, mid, opts, depth + 1)?;
            let mut full = continue_to(profile, mid_z, &half.m, target, opts, depth + 1)?;
            full.iterations += half.iterations;
            Ok(full)
        }
    }
}

fn finish(
    profile: &VarianceProfile,
    point: SpectralPoint,
    m: Vec<Complex64>,
    res: f64,
    iterations: usize,
) -> VdeSolution {
    let f_norm = f_norm(profile, &m);
    VdeSolution {
        point,
        m,
        residual: res,
        iterations,
        f_norm,
    }
}

fn solve_from(
    profile: &VarianceProfile,
    point: SpectralPoint,
    initial: Vec<Complex64>,
    opts: &SolverOptions,
) -> Result<VdeSolution> {
    let mut m = initial;
    let mut used = 0usize;
    if opts.newton {
        match newton(profile, point.z(), &mut m, opts) {
            NewtonOutcome::Converged {
                iterations,
                residual,
            } => {
                return Ok(finish(profile, point, m, residual, iterations));
            }
            NewtonOutcome::Stalled { iterations } => used = iterations,
        }
    }
    let (iterations, res) = fixed_point(profile, point.z(), &mut m, opts, used)?;
    Ok(finish(profile, point, m, res, iterations))
}

enum NewtonOutcome {
    Converged { iterations: usize, residual: f64 },
    Stalled { iterations: usize },
}

const NEWTON_MAX_ITER: usize = 200;

/// Newton on `g(m) = 1 + m (z + S m)` with a backtracking line search on
/// `|g|_2` that rejects steps leaving the upper half-plane. On stall, `m`
/// holds the best accepted iterate.
///
/// Steps are taken in `log m`: near `z = 0` the Jacobian degenerates along
/// the scaling `m_k -> l m_k, m_{n+1-k} -> m_{n+1-k} / l`, which is a
/// straight line in logarithmic coordinates.
fn newton(
    profile: &VarianceProfile,
    z: Complex64,
    m: &mut Vec<Complex64>,
    opts: &SolverOptions,
) -> NewtonOutcome {
    let s = profile.entries();
    let n = m.len();
    let merit = |g: &[Complex64]| g.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let max_abs = |g: &[Complex64]| g.iter().fold(0.0_f64, |a, x| a.max(x.norm()));

    let mut sm = real_matvec(s, m);
    let mut g = defect(z, m, &sm);
    for it in 0..NEWTON_MAX_ITER.min(opts.max_iter) {
        let res = max_abs(&g);
        if res <= opts.tol {
            return NewtonOutcome::Converged {
                iterations: it,
                residual: res,
            };
        }
        let jac = DMatrix::from_fn(n, n, |k, j| {
            let diag = if k == j {
                z + sm[k]
            } else {
                Complex64::new(0.0, 0.0)
            };
            diag + m[k] * s[(k, j)]
        });
        let rhs: Vec<Complex64> = g.iter().map(|x| -x).collect();
        let Some(step) = solve_complex(jac, &rhs) else {
            return NewtonOutcome::Stalled { iterations: it };
        };
        let current = merit(&g);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<Complex64> = m
                .iter()
                .zip(&step)
                .map(|(a, d)| a * (d * alpha / a).exp())
                .collect();
            if in_upper_half_plane(&cand) {
                let cand_sm = real_matvec(s, &cand);
                let cand_g = defect(z, &cand, &cand_sm);
                if merit(&cand_g) < current {
                    *m = cand;
                    sm = cand_sm;
                    g = cand_g;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return NewtonOutcome::Stalled { iterations: it + 1 };
        }
    }
    let res = max_abs(&g);
    if res <= opts.tol {
        NewtonOutcome::Converged {
            iterations: NEWTON_MAX_ITER,
            residual: res,
        }
    } else {
        NewtonOutcome::Stalled {
            iterations: NEWTON_MAX_ITER,
        }
    }
}

const WINDOW: usize = 20;
const RESTORE_AFTER: usize = 100;
const MIN_DAMPING: f64 = 1e-8;

/// Damped fixed-point iteration. Returns `(iterations, residual)`.
fn fixed_point(
    profile: &VarianceProfile,
    z: Complex64,
    m: &mut Vec<Complex64>,
    opts: &SolverOptions,
    start: usize,
) -> Result<(usize, f64)> {
    let s = profile.entries();
    let mut alpha = opts.damping;
    let mut window_start = f64::INFINITY;
    let mut since_window = 0usize;
    let mut decreasing = 0usize;
    let mut prev = f64::INFINITY;
    let mut res = f64::INFINITY;
    for it in start..opts.max_iter {
        let sm = real_matvec(s, m);
        res = defect(z, m, &sm).iter().fold(0.0, |a, x| a.max(x.norm()));
        if res <= opts.tol {
            return Ok((it, res));
        }

        if res < prev {
            decreasing += 1;
            if decreasing >= RESTORE_AFTER && alpha < opts.damping {
                alpha = (2.0 * alpha).min(opts.damping);
                decreasing = 0;
            }
        } else {
            decreasing = 0;
        }
        prev = res;
        since_window += 1;
        if since_window >= WINDOW {
            if res >= window_start {
                alpha *= 0.5;
            }
            window_start = res;
            since_window = 0;
        }

        loop {
            if alpha < MIN_DAMPING {
                return Err(Error::DampingUnderflow {
                    iterations: it,
                    residual: res,
                });
            }
            let cand: Vec<Complex64> = m
                .iter()
                .zip(&sm)
                .map(|(mk, smk)| mk * (1.0 - alpha) + (-(z + smk).inv()) * alpha)
                .collect();
            if in_upper_half_plane(&cand) {
                *m = cand;
                break;
            }
            alpha *= 0.5;
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual: res,
    })
}

/// Solutions along `z_j = r_j e^{i angle}` for strictly descending radii,
/// each warm-started from the previous one.
pub fn solve_path(
    profile: &VarianceProfile,
    angle: f64,
    radii: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<VdeSolution>> {
    if !(angle > 0.0 && angle < std::f64::consts::PI) {
        return Err(Error::Precondition(format!(
            "ray angle must lie in (0, pi), got {angle}"
        )));
    }
    if radii.iter().any(|r| r.is_nan() || *r <= 0.0) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition(
            "radii must be positive and strictly descending".into(),
        ));
    }
    let mut out: Vec<VdeSolution> = Vec::with_capacity(radii.len());
    for &r in radii {
        let point = SpectralPoint::on_ray(r, angle)?;
        let result = match out.last() {
            Some(prev) => continue_to(profile, prev.z(), &prev.m, point, opts, 0),
            None => solve(profile, point, opts, None),
        };
        out.push(result.map_err(|e| Error::PathFailure {
            radius: r,
            source: Box::new(e),
        })?);
    }
    Ok(out)
}

/// Geometric radii from `r_max` down to `r_min` with `per_decade` points per
/// decade; both ends included.
pub fn geometric_radii(r_max: f64, r_min: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(r_max > r_min && r_min > 0.0) || per_decade == 0 {
        return Err(Error::Precondition(format!(
            "need r_max > r_min > 0 and per_decade > 0, got ({r_max}, {r_min}, {per_decade})"
        )));
    }
    let decades = (r_max / r_min).log10();
    let steps = (decades * per_decade as f64).round() as usize;
    let steps = steps.max(1);
    Ok((0..=steps)
        .map(|j| r_max * (r_min / r_max).powf(j as f64 / steps as f64))
        .collect())
}
