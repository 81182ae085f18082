//! Sampled Wigner-type block matrices with a given variance profile.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::solver::{solve, SolverOptions, SpectralPoint};
use crate::variance::VarianceProfile;
use crate::{rng, Error, Result};

/// Largest matrix side accepted by the eigenvalue routines.
pub const DEFAULT_DIMENSION_CAP: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    RealSymmetric,
    ComplexHermitian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub small_profile: VarianceProfile,
    pub inner: usize,
    pub symmetry: Symmetry,
    pub trials: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.inner < 2 {
            return Err(Error::Precondition(format!(
                "inner block size must be >= 2, got {}",
                self.inner
            )));
        }
        if self.trials == 0 {
            return Err(Error::Precondition("at least one trial is required".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.small_profile.dim() * self.inner
    }

    /// Variance `s_jk / N` of entries in the outer block holding `(a, b)`.
    fn variance(&self, a: usize, b: usize) -> f64 {
        self.small_profile.get(a / self.inner, b / self.inner) / self.inner as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampledMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl SampledMatrix {
    pub fn dim(&self) -> usize {
        match self {
            SampledMatrix::Real(h) => h.nrows(),
            SampledMatrix::Complex(h) => h.nrows(),
        }
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        match self {
            SampledMatrix::Real(h) => Complex64::new(h[(a, b)], 0.0),
            SampledMatrix::Complex(h) => h[(a, b)],
        }
    }

    pub fn is_hermitian(&self) -> bool {
        let n = self.dim();
        (0..n).all(|a| (0..n).all(|b| self.entry(a, b) == self.entry(b, a).conj()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = match self {
            SampledMatrix::Real(h) => h.clone().symmetric_eigenvalues().iter().copied().collect(),
            SampledMatrix::Complex(h) => {
                h.clone().symmetric_eigenvalues().iter().copied().collect()
            }
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Diagonal of `(H - z)^{-1}` from the full eigendecomposition.
    pub fn resolvent_diagonal(&self, z: Complex64) -> Vec<Complex64> {
        fn diag<T: nalgebra::ComplexField<RealField = f64>>(
            h: &DMatrix<T>,
            z: Complex64,
            weight: impl Fn(&T) -> f64,
        ) -> Vec<Complex64> {
            let eig = h.clone().symmetric_eigen();
            let n = h.nrows();
            let inv: Vec<Complex64> = eig
                .eigenvalues
                .iter()
                .map(|&l| 1.0 / (Complex64::new(l, 0.0) - z))
                .collect();
            (0..n)
                .map(|l| {
                    (0..n)
                        .map(|i| inv[i] * weight(&eig.eigenvectors[(l, i)]))
                        .sum()
                })
                .collect()
        }
        match self {
            SampledMatrix::Real(h) => diag(h, z, |v| v * v),
            SampledMatrix::Complex(h) => diag(h, z, |v| v.norm_sqr()),
        }
    }
}

/// Draw trial `trial` of the ensemble. Every upper-triangle entry comes from
/// a generator keyed by `(seed, trial, a, b)`; the lower triangle is its
/// conjugate.
pub fn sample_matrix(spec: &EnsembleSpec, trial: u64) -> Result<SampledMatrix> {
    spec.validate()?;
    let dim = spec.dim();
    let stream =
        |a: usize, b: usize| rng::entry_stream(spec.seed, rng::DOMAIN_ENSEMBLE, trial, dim, a, b);
    Ok(match spec.symmetry {
        Symmetry::RealSymmetric => {
            let mut h = DMatrix::zeros(dim, dim);
            for b in 0..dim {
                for a in 0..=b {
                    let var = spec.variance(a, b);
                    if var == 0.0 {
                        continue;
                    }
                    let var = if a == b { 2.0 * var } else { var };
                    let x: f64 = var.sqrt() * stream(a, b).sample::<f64, _>(StandardNormal);
                    h[(a, b)] = x;
                    h[(b, a)] = x;
                }
            }
            SampledMatrix::Real(h)
        }
        Symmetry::ComplexHermitian => {
            let mut h = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
            for b in 0..dim {
                for a in 0..=b {
                    let var = spec.variance(a, b);
                    if var == 0.0 {
                        continue;
                    }
                    if a == b {
                        let x: f64 = stream(a, b).sample(StandardNormal);
                        h[(a, a)] = Complex64::new(var.sqrt() * x, 0.0);
                    } else {
                        let sd = (0.5 * var).sqrt();
                        let mut r = stream(a, b);
                        let (re, im): (f64, f64) =
                            (r.sample(StandardNormal), r.sample(StandardNormal));
                        let x = Complex64::new(sd * re, sd * im);
                        h[(a, b)] = x;
                        h[(b, a)] = x.conj();
                    }
                }
            }
            SampledMatrix::Complex(h)
        }
    })
}

/// `H` vanishes exactly on every block where the profile does.
pub fn structural_zeros_hold(spec: &EnsembleSpec, h: &SampledMatrix) -> bool {
    let dim = spec.dim();
    (0..dim).all(|a| {
        (0..dim).all(|b| spec.variance(a, b) != 0.0 || h.entry(a, b) == Complex64::new(0.0, 0.0))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub trial: u64,
    pub seed: u64,
    pub eigenvalues: Vec<f64>,
}

fn check_cap(spec: &EnsembleSpec) -> Result<()> {
    if spec.dim() > DEFAULT_DIMENSION_CAP {
        return Err(Error::DimensionCap {
            dim: spec.dim(),
            cap: DEFAULT_DIMENSION_CAP,
        });
    }
    Ok(())
}

/// Spectra of every trial, computed in parallel and returned in trial order.
pub fn sample_spectra(spec: &EnsembleSpec) -> Result<Vec<SpectralSample>> {
    spec.validate()?;
    check_cap(spec)?;
    (0..spec.trials as u64)
        .into_par_iter()
        .map(|trial| {
            Ok(SpectralSample {
                trial,
                seed: spec.seed,
                eigenvalues: sample_matrix(spec, trial)?.eigenvalues(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearZeroFraction {
    pub delta: f64,
    pub fraction: f64,
    pub stderr: f64,
    pub per_trial: Vec<f64>,
}

pub fn fraction_in_window(samples: &[SpectralSample], delta: f64) -> NearZeroFraction {
    let per_trial: Vec<f64> = samples
        .iter()
        .map(|s| {
            s.eigenvalues.iter().filter(|l| l.abs() <= delta).count() as f64
                / s.eigenvalues.len() as f64
        })
        .collect();
    let t = per_trial.len() as f64;
    let mean = per_trial.iter().sum::<f64>() / t;
    let stderr = if per_trial.len() > 1 {
        (per_trial.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (t - 1.0) / t).sqrt()
    } else {
        f64::NAN
    };
    NearZeroFraction {
        delta,
        fraction: mean,
        stderr,
        per_trial,
    }
}

/// Fraction of eigenvalues in `[-delta, delta]`, averaged over trials.
pub fn empirical_near_zero(spec: &EnsembleSpec, delta: f64) -> Result<NearZeroFraction> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::Precondition(format!(
            "delta must be non-negative, got {delta}"
        )));
    }
    Ok(fraction_in_window(&sample_spectra(spec)?, delta))
}

/// Tab-separated `trial index eigenvalue` rows.
pub fn spectra_table(samples: &[SpectralSample]) -> String {
    let mut out = String::from("trial\tindex\teigenvalue\n");
    for s in samples {
        for (i, l) in s.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "{}\t{}\t{:.12e}", s.trial, i, l);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrywiseReport {
    pub point: SpectralPoint,
    pub max_deviation: f64,
    pub median_deviation: f64,
    /// `median * sqrt(N eta)`, recorded for comparison across runs.
    pub scaled_median: f64,
}

/// Compare the resolvent diagonal of trial 0 with the solution of the
/// `n`-dimensional equation at the same spectral parameter.
pub fn entrywise_law_check(
    spec: &EnsembleSpec,
    point: SpectralPoint,
    opts: &SolverOptions,
) -> Result<EntrywiseReport> {
    spec.validate()?;
    check_cap(spec)?;
    let floor = (spec.dim() as f64).powf(-1.0 / 3.0);
    if point.im < floor {
        return Err(Error::Precondition(format!(
            "eta = {} is below the floor {floor:.4}",
            point.im
        )));
    }
    let m = solve(&spec.small_profile, point, opts, None)?.m;
    let g = sample_matrix(spec, 0)?.resolvent_diagonal(point.z());
    let mut dev: Vec<f64> = g
        .iter()
        .enumerate()
        .map(|(l, gl)| (gl - m[l / spec.inner]).norm())
        .collect();
    dev.sort_by(f64::total_cmp);
    let len = dev.len();
    let median = if len % 2 == 1 {
        dev[len / 2]
    } else {
        0.5 * (dev[len / 2 - 1] + dev[len / 2])
    };
    Ok(EntrywiseReport {
        point,
        max_deviation: dev[len - 1],
        median_deviation: median,
        scaled_median: median * (spec.inner as f64 * point.im).sqrt(),
    })
}
