//! Relations between components of a staircase solution near `z = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{limit_constants, predicted_exponent, predicted_phase};
use crate::solver::VdeSolution;
use crate::variance::{check_assumption_staircase, VarianceProfile};
use crate::{Error, Result};

/// `m_k m_{n+1-k}` at the smallest radius against its limit `-1/s_{k,n+1-k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairProduct {
    pub k: usize,
    pub partner: usize,
    pub value: Complex64,
    pub expected: Complex64,
    pub relative_error: f64,
}

fn require_staircase(path: &[VdeSolution], profile: &VarianceProfile) -> Result<()> {
    if path.is_empty() {
        return Err(Error::Precondition("empty path".into()));
    }
    if profile.block_meta().is_some() || !check_assumption_staircase(profile).holds {
        return Err(Error::Precondition(
            "relation checks need a plain staircase profile".into(),
        ));
    }
    if path.iter().any(|s| s.dim() != profile.dim()) {
        return Err(Error::Precondition(
            "path dimension does not match profile".into(),
        ));
    }
    Ok(())
}

pub fn pair_product_check(
    path: &[VdeSolution],
    profile: &VarianceProfile,
) -> Result<Vec<PairProduct>> {
    require_staircase(path, profile)?;
    let n = profile.dim();
    let last = path.last().unwrap();
    Ok((1..=n)
        .map(|k| {
            let partner = n + 1 - k;
            let value = last.m[k - 1] * last.m[partner - 1];
            let expected = Complex64::new(-1.0 / profile.get(k - 1, partner - 1), 0.0);
            PairProduct {
                k,
                partner,
                value,
                expected,
                relative_error: (value - expected).norm() / expected.norm(),
            }
        })
        .collect())
}

/// A ratio of component products that converges to a finite non-zero limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRelation {
    /// Indices in the numerator and denominator; index 0 stands for `z`.
    pub numerator: [usize; 2],
    pub denominator: [usize; 2],
    pub radii: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Limit predicted from the constants `c_k` and the phases.
    pub expected: Complex64,
    pub relative_error: f64,
}

/// Leading behaviour `c_j e^{i pi j/(n+1)} z^{1 - 2j/(n+1)}`; `j = 0` is `z`.
fn leading(constants: &[f64], j: usize, n: usize) -> (f64, f64, f64) {
    if j == 0 {
        (1.0, 0.0, 1.0)
    } else {
        (
            constants[j - 1],
            predicted_phase(j, n),
            predicted_exponent(j, n),
        )
    }
}

/// Ratios `(m_1 m_{n-1}) / (z m_n)` and
/// `(m_k m_{n-k}) / (m_{n+1-k} m_{k-1})` for `k = 2..n`, with `m_0 = z`.
pub fn ratio_relation_check(
    path: &[VdeSolution],
    profile: &VarianceProfile,
) -> Result<Vec<RatioRelation>> {
    require_staircase(path, profile)?;
    let n = profile.dim();
    if n < 2 {
        return Err(Error::Precondition("ratio relations need n >= 2".into()));
    }
    let constants = limit_constants(profile)?;
    let mut pairs = vec![([1, n - 1], [0, n])];
    pairs.extend((2..=n).map(|k| ([k, n - k], [n + 1 - k, k - 1])));

    pairs
        .into_iter()
        .map(|(num, den)| {
            let mut modulus = 1.0;
            let mut phase = 0.0;
            let mut exponent = 0.0;
            for (j, sign) in num
                .iter()
                .map(|&j| (j, 1.0))
                .chain(den.iter().map(|&j| (j, -1.0)))
            {
                let (c, ph, e) = leading(&constants, j, n);
                modulus *= c.powf(sign);
                phase += sign * ph;
                exponent += sign * e;
            }
            if exponent.abs() > 1e-12 {
                return Err(Error::Invariant(format!(
                    "ratio {num:?}/{den:?} has leading exponent {exponent}"
                )));
            }
            let expected = Complex64::from_polar(modulus, phase);
            let component = |s: &VdeSolution, j: usize| if j == 0 { s.z() } else { s.m[j - 1] };
            let values: Vec<Complex64> = path
                .iter()
                .map(|s| {
                    component(s, num[0]) * component(s, num[1])
                        / (component(s, den[0]) * component(s, den[1]))
                })
                .collect();
            let last = *values.last().unwrap();
            Ok(RatioRelation {
                numerator: num,
                denominator: den,
                radii: path.iter().map(|s| s.z().norm()).collect(),
                values,
                expected,
                relative_error: (last - expected).norm() / expected.norm(),
            })
        })
        .collect()
}

/// `max_k |z m_k|` along the path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZmReport {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub final_value: f64,
    pub decreasing: bool,
}

pub fn zm_vanishing_check(path: &[VdeSolution]) -> Result<ZmReport> {
    if path.is_empty() {
        return Err(Error::Precondition("empty path".into()));
    }
    let values: Vec<f64> = path
        .iter()
        .map(|s| s.m.iter().map(|m| (s.z() * m).norm()).fold(0.0, f64::max))
        .collect();
    Ok(ZmReport {
        radii: path.iter().map(|s| s.z().norm()).collect(),
        final_value: *values.last().unwrap(),
        decreasing: values.windows(2).all(|w| w[1] <= w[0]),
        values,
    })
}
