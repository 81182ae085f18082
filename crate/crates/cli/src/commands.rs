use std::path::PathBuf;

use serde_json::json;
use vde_core::asymptotics::{
    constant_system, constant_system_residuals, fit_asymptotics, fit_table, pair_product_check,
    predicted_exponent, predicted_phase, uniform_bound_sweep, vde_like_reduce, zm_vanishing_check,
};
use vde_core::density::{
    default_energy_grid, default_eta_schedule, density_table, divergence_fit, mass_near_zero,
    rho_grid, support_bound, DEFAULT_DIVERGENCE_WINDOW,
};
use vde_core::montecarlo::{
    fraction_in_window, sample_spectra, spectra_table, EnsembleSpec, Symmetry,
};
use vde_core::solver::{
    check_solution_bounds, geometric_radii, saturation_identity_residual, solve, solve_path,
    SolverOptions, SpectralPoint, VdeSolution,
};
use vde_core::variance::{
    check_assumption_staircase, classify_regime, expand_profile, VarianceProfile,
};

use crate::args::{Args, Command, SymmetryArg};
use crate::output::{json_document, table_document, Header};
use crate::CliError;

/// Everything a command produces. Files are written even when invariants
/// fail, so the offending values can be inspected.
pub struct Report {
    pub files: Vec<(PathBuf, String)>,
    pub violations: Vec<String>,
}

const CONSTANT_RESIDUAL_TOL: f64 = 1e-12;

pub fn run(args: &Args, source: &str) -> Result<Report, CliError> {
    let profile = vde_core::variance::load_profile(source)?;
    let header = Header::new(args, source);
    let opts = SolverOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        ..SolverOptions::default()
    };
    opts.validate()?;
    let mut violations = Vec::new();
    let mut files = Vec::new();

    let main = match args.command {
        Command::Classify => {
            json_document(&header, json!({ "structure": classify_regime(&profile)? }))
        }
        Command::Solve => {
            let point = SpectralPoint::new(args.energy, args.eta.unwrap_or(1e-6))?;
            let sol = solve(&profile, point, &opts, None)?;
            check_stability(&sol, &mut violations);
            let bounds = if sol.z().norm() < 1.0 {
                Some(check_solution_bounds(&sol, &profile)?)
            } else {
                None
            };
            if bounds.as_ref().is_some_and(|b| !b.holds()) {
                violations.push("solution size bounds violated".into());
            }
            json_document(
                &header,
                json!({
                    "solution": sol,
                    "identity_residual": saturation_identity_residual(&sol, &profile),
                    "bounds": bounds,
                }),
            )
        }
        Command::Scan => {
            let radii = geometric_radii(args.rmax, args.rmin, args.ppd)?;
            let path = solve_path(&profile, args.ray, &radii, &opts)?;
            path.iter()
                .for_each(|s| check_stability(s, &mut violations));
            let fits = fit_asymptotics(&path, &profile)?;
            let mut summary: Vec<(&str, String)> = fits
                .iter()
                .map(|f| {
                    let line = format!(
                        "k={} block={} exponent={:.6} predicted={:.6} phase={:.6} predicted_phase={:.6} constant={:.6e}",
                        f.component,
                        f.block,
                        f.measured_exponent,
                        f.predicted_exponent,
                        f.measured_phase,
                        f.predicted_phase,
                        f.measured_constant
                    );
                    ("fit", line)
                })
                .collect();
            if profile.block_meta().is_none() && check_assumption_staircase(&profile).holds {
                for pp in pair_product_check(&path, &profile)? {
                    summary.push((
                        "pair_product",
                        format!(
                            "k={} partner={} relative_error={:.3e}",
                            pp.k, pp.partner, pp.relative_error
                        ),
                    ));
                }
            }
            summary.push((
                "max_abs_zm",
                format!("{:.6e}", zm_vanishing_check(&path)?.final_value),
            ));
            table_document(&header, &summary, &fit_table(&path, &fits))
        }
        Command::Constants => {
            let sys = constant_system(&profile)?;
            let c: Vec<f64> = sys.solution.iter().map(|x| x.exp()).collect();
            let residual = constant_system_residuals(&profile, &c)
                .into_iter()
                .fold(0.0, f64::max);
            if residual > CONSTANT_RESIDUAL_TOL {
                violations.push(format!("constant system residual {residual:.3e}"));
            }
            let n = profile.dim();
            let rows: Vec<_> = c
                .iter()
                .enumerate()
                .map(|(j, ck)| {
                    json!({
                        "k": j + 1,
                        "c": ck,
                        "exponent": predicted_exponent(j + 1, n),
                        "phase": predicted_phase(j + 1, n),
                    })
                })
                .collect();
            json_document(
                &header,
                json!({ "constants": rows, "condition": sys.condition, "max_residual": residual }),
            )
        }
        Command::Density => {
            let etas = args
                .eta_schedule
                .clone()
                .unwrap_or_else(default_eta_schedule);
            let grid = match &args.egrid {
                Some(spec) => parse_grid(spec)?,
                None => default_energy_grid(support_bound(&profile)),
            };
            let dp = rho_grid(&profile, &grid, &etas, &opts)?;
            if dp.rho.iter().any(|r| *r < 0.0) {
                violations.push("negative density".into());
            }
            if !(0.99..=1.01).contains(&dp.total_mass) {
                violations.push(format!(
                    "total mass {:.6} outside [0.99, 1.01]",
                    dp.total_mass
                ));
            }
            let window = fit_window(args)?;
            let mut summary = vec![
                ("total_mass", format!("{:.8}", dp.total_mass)),
                ("e_max", format!("{:.6}", dp.e_max)),
            ];
            match divergence_fit(&dp, window) {
                Ok(fit) => {
                    summary.push((
                        "divergence_window",
                        format!("{:e},{:e}", window.0, window.1),
                    ));
                    summary.push(("divergence_exponent", format!("{:.6}", fit.exponent)));
                    summary.push(("divergence_constant", format!("{:.6e}", fit.constant)));
                    summary.push((
                        "reference_exponent",
                        format!("{:.6}", fit.reference_exponent),
                    ));
                    summary.push((
                        "normalized_relative_spread",
                        format!("{:.6}", fit.relative_spread),
                    ));
                }
                Err(e) => summary.push(("divergence_fit", format!("unavailable ({e})"))),
            }
            table_document(&header, &summary, &density_table(&dp))
        }
        Command::Mc => {
            let inner = args
                .inner
                .as_ref()
                .and_then(|v| v.first().copied())
                .unwrap_or(400);
            let spec = EnsembleSpec {
                small_profile: profile.clone(),
                inner,
                symmetry: match args.symmetry {
                    SymmetryArg::Real => Symmetry::RealSymmetric,
                    SymmetryArg::Complex => Symmetry::ComplexHermitian,
                },
                trials: args.trials,
                seed: args.seed,
            };
            let samples = sample_spectra(&spec)?;
            let frac = fraction_in_window(&samples, args.delta);
            let prediction = predicted_mass(&profile, args, &opts);
            if let Some(path) = &args.spectra {
                files.push((
                    path.clone(),
                    table_document(&header, &[], &spectra_table(&samples)),
                ));
            }
            json_document(
                &header,
                json!({
                    "ensemble": { "n": profile.dim(), "N": inner, "dim": spec.dim(), "symmetry": spec.symmetry,
                                  "trials": spec.trials, "seed": spec.seed },
                    "delta": args.delta,
                    "fraction": frac.fraction,
                    "stderr": frac.stderr,
                    "per_trial": frac.per_trial,
                    "prediction": prediction,
                    "relative_difference": prediction.map(|p| (frac.fraction - p) / p),
                }),
            )
        }
        Command::Reduce => {
            let big = if profile.block_meta().is_some() {
                profile.clone()
            } else {
                let inner = args
                    .inner
                    .as_ref()
                    .and_then(|v| v.first().copied())
                    .unwrap_or(8);
                expand_profile(&profile, inner, args.noise, args.seed)?
            };
            let point = SpectralPoint::new(args.energy, args.eta.unwrap_or(1e-5))?;
            let sol = solve(&big, point, &opts, None)?;
            check_stability(&sol, &mut violations);
            let red = vde_like_reduce(&sol, &big)?;
            if red.residual > 100.0 * args.tol {
                violations.push(format!("reduced equation residual {:.3e}", red.residual));
            }
            if !red.zero_pattern_matches {
                violations.push("reduced coefficients do not share the block zero pattern".into());
            }
            json_document(&header, json!({ "point": point, "reduction": red }))
        }
        Command::Sweep => {
            let inners = args.inner.clone().unwrap_or_else(|| vec![4, 8, 16]);
            let radii = geometric_radii(args.rmax, args.rmin, args.ppd)?;
            let table = uniform_bound_sweep(
                &profile, &inners, args.noise, args.seed, args.ray, &radii, &opts,
            )?;
            json_document(&header, json!({ "sweep": table }))
        }
    };
    files.insert(0, (args.out.clone(), main));
    Ok(Report { files, violations })
}

fn check_stability(sol: &VdeSolution, violations: &mut Vec<String>) {
    if sol.f_norm >= 1.0 {
        violations.push(format!(
            "stability operator norm {} >= 1 at z = {}",
            sol.f_norm,
            sol.z()
        ));
    }
}

fn fit_window(args: &Args) -> Result<(f64, f64), CliError> {
    match args.window.as_deref() {
        None => Ok(DEFAULT_DIVERGENCE_WINDOW),
        Some([lo, hi]) => Ok((*lo, *hi)),
        Some(_) => Err(CliError::Usage("--window takes two values".into())),
    }
}

/// Mass of the self-consistent density in `[-delta, delta]`.
fn predicted_mass(profile: &VarianceProfile, args: &Args, opts: &SolverOptions) -> Option<f64> {
    let etas = args
        .eta_schedule
        .clone()
        .unwrap_or_else(default_eta_schedule);
    let dp = rho_grid(
        profile,
        &default_energy_grid(support_bound(profile)),
        &etas,
        opts,
    )
    .ok()?;
    let fit = divergence_fit(&dp, fit_window(args).ok()?).ok()?;
    mass_near_zero(&dp, &fit, args.delta).ok()
}

/// `lo:hi:count`, uniformly spaced and inclusive.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "energy grid must look like lo:hi:count, got {spec:?}"
        ))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || count < 2 {
        return Err(bad());
    }
    Ok((0..count)
        .map(|j| lo + (hi - lo) * j as f64 / (count - 1) as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert!(parse_grid("1:-1:3").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:1").is_err());
    }
}
