use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::limit_constants;
use crate::linalg::linear_fit;
use crate::solver::VdeSolution;
use crate::variance::VarianceProfile;
use crate::{Error, Result};

/// Power law `1 - 2b/(n+1)` of outer block `b` (1-based).
pub fn predicted_exponent(block: usize, n: usize) -> f64 {
    1.0 - 2.0 * block as f64 / (n as f64 + 1.0)
}

/// Limiting phase `pi b/(n+1)` of `m z^{-(1 - 2b/(n+1))}`.
pub fn predicted_phase(block: usize, n: usize) -> f64 {
    PI * block as f64 / (n as f64 + 1.0)
}

/// Per-component fit along a ray. `component` and `block` are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub component: usize,
    pub block: usize,
    pub measured_exponent: f64,
    pub predicted_exponent: f64,
    pub measured_phase: f64,
    pub predicted_phase: f64,
    pub measured_constant: f64,
    /// Richardson estimate assuming a correction of order `r^{2/(n+1)}`.
    pub extrapolated_constant: Option<f64>,
    pub predicted_constant: Option<f64>,
}

const MIN_DECADES: f64 = 4.0;
const WINDOW_DECADES: f64 = 2.0;

fn ray_angle(path: &[VdeSolution]) -> Result<f64> {
    let angle = path[0].z().arg();
    if path.iter().any(|s| (s.z().arg() - angle).abs() > 1e-9) {
        return Err(Error::Precondition(
            "path does not lie on a single ray".into(),
        ));
    }
    Ok(angle)
}

/// Fit exponents, phases and constants of every component along a ray.
///
/// The exponent is the least-squares slope of `log |m_k|` against `log r`
/// over the last two decades of radii; phase and constant are read at the
/// smallest radius. Components of an expanded profile are compared with the
/// prediction for their outer block.
pub fn fit_asymptotics(
    path: &[VdeSolution],
    profile: &VarianceProfile,
) -> Result<Vec<AsymptoticFit>> {
    if path.len() < 3 {
        return Err(Error::Fit(format!(
            "path has {} points, need at least 3",
            path.len()
        )));
    }
    let dim = profile.dim();
    if path.iter().any(|s| s.dim() != dim) {
        return Err(Error::Precondition(
            "path dimension does not match profile".into(),
        ));
    }
    let angle = ray_angle(path)?;
    let radii: Vec<f64> = path.iter().map(|s| s.z().norm()).collect();
    let r_first = radii[0];
    let r_last = *radii.last().unwrap();
    if (r_first / r_last).log10() < MIN_DECADES - 1e-9 {
        return Err(Error::Fit(format!(
            "path spans {:.2} decades, need {}",
            (r_first / r_last).log10(),
            MIN_DECADES
        )));
    }
    let cutoff = r_last * 10f64.powf(WINDOW_DECADES) * (1.0 + 1e-9);
    let window: Vec<usize> = (0..path.len()).filter(|&j| radii[j] <= cutoff).collect();
    if window.len() < 2 {
        return Err(Error::Fit("fit window holds fewer than two radii".into()));
    }
    // point about one decade above the smallest radius, for extrapolation
    let earlier = (0..path.len())
        .rev()
        .find(|&j| radii[j] >= 10.0 * r_last * (1.0 - 1e-9));

    let n = profile.outer_blocks();
    let constants = if profile.block_meta().is_none() {
        limit_constants(profile).ok()
    } else {
        None
    };
    let gamma = 2.0 / (n as f64 + 1.0);
    let last = path.last().unwrap();

    (0..dim)
        .map(|k| {
            let block = profile.block_of(k) + 1;
            let exponent = predicted_exponent(block, n);
            let xs: Vec<f64> = window.iter().map(|&j| radii[j].ln()).collect();
            let ys: Vec<f64> = window.iter().map(|&j| path[j].m[k].norm().ln()).collect();
            if exponent.abs() >= 0.1 {
                let monotone = ys.windows(2).all(|w| {
                    if exponent > 0.0 {
                        w[1] <= w[0]
                    } else {
                        w[1] >= w[0]
                    }
                });
                if !monotone {
                    return Err(Error::Fit(format!(
                        "|m_{}| is not monotone over the fit window; path not converged",
                        k + 1
                    )));
                }
            }
            let (slope, _) =
                linear_fit(&xs, &ys).ok_or_else(|| Error::Fit("degenerate fit window".into()))?;
            let scaled = |j: usize| path[j].m[k].norm() * radii[j].powf(-exponent);
            let measured_constant = scaled(path.len() - 1);
            let extrapolated_constant = earlier.map(|j| {
                let (w1, w2) = (radii[j].powf(gamma), r_last.powf(gamma));
                (measured_constant * w1 - scaled(j) * w2) / (w1 - w2)
            });
            Ok(AsymptoticFit {
                component: k + 1,
                block,
                measured_exponent: slope,
                predicted_exponent: exponent,
                measured_phase: last.m[k].arg() - exponent * angle,
                predicted_phase: predicted_phase(block, n),
                measured_constant,
                extrapolated_constant,
                predicted_constant: constants.as_ref().map(|c| c[block - 1]),
            })
        })
        .collect()
}

/// Tab-separated table, one row per radius and component, radii descending.
pub fn fit_table(path: &[VdeSolution], fits: &[AsymptoticFit]) -> String {
    let mut out = String::from(
        "k\tr\tabs_m\targ_m\tmeasured_exponent\tpredicted_exponent\tmeasured_phase\tpredicted_phase\tmeasured_constant\tpredicted_constant\n",
    );
    for s in path {
        for fit in fits {
            let k = fit.component - 1;
            let predicted = fit
                .predicted_constant
                .map_or_else(|| "NA".to_string(), |c| c.to_string());
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                fit.component,
                s.z().norm(),
                s.m[k].norm(),
                s.m[k].arg(),
                fit.measured_exponent,
                fit.predicted_exponent,
                fit.measured_phase,
                fit.predicted_phase,
                fit.measured_constant,
                predicted
            );
        }
    }
    out
}
