use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::solve_real_with_condition;
use crate::variance::{check_assumption_staircase, VarianceProfile};
use crate::{Error, Result};

/// Largest condition number accepted for the coefficient matrix. The matrix
/// is provably invertible, so exceeding this points at a bug.
pub const MAX_CONDITION: f64 = 1e8;

/// Linear system for `x_k = log c_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantSystem {
    pub coefficients: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub solution: Vec<f64>,
    pub condition: f64,
}

/// Assemble and solve the system, 1-based indices throughout:
///
/// - `x_k + x_{n+1-k} = -log s_{k,n+1-k}` for `k = 1..ceil(n/2)`,
/// - `x_1 + x_{n-1} - x_n = -log s_{1,n-1}` (only for `n >= 2`),
/// - `x_k + x_{n-k} - x_{n+1-k} - x_{k-1} = log s_{n+1-k,k-1} - log s_{k,n-k}`
///   for `k = 2..floor(n/2)`.
pub fn constant_system(profile: &VarianceProfile) -> Result<ConstantSystem> {
    if !check_assumption_staircase(profile).holds {
        return Err(Error::Precondition(
            "limit constants need a staircase profile".into(),
        ));
    }
    let n = profile.dim();
    let s = |i: usize, j: usize| profile.get(i - 1, j - 1);
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n);
    let mut row = |terms: &[(usize, f64)], rhs: f64| {
        let mut r = vec![0.0; n];
        for &(k, c) in terms {
            r[k - 1] += c;
        }
        rows.push((r, rhs));
    };

    for k in 1..=n.div_ceil(2) {
        row(&[(k, 1.0), (n + 1 - k, 1.0)], -s(k, n + 1 - k).ln());
    }
    if n >= 2 {
        row(&[(1, 1.0), (n - 1, 1.0), (n, -1.0)], -s(1, n - 1).ln());
    }
    for k in 2..=n / 2 {
        row(
            &[(k, 1.0), (n - k, 1.0), (n + 1 - k, -1.0), (k - 1, -1.0)],
            s(n + 1 - k, k - 1).ln() - s(k, n - k).ln(),
        );
    }
    if rows.len() != n {
        return Err(Error::Invariant(format!(
            "constant system has {} equations for {} unknowns",
            rows.len(),
            n
        )));
    }

    let a = DMatrix::from_fn(n, n, |i, j| rows[i].0[j]);
    let rhs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (solution, condition) = solve_real_with_condition(&a, &rhs);
    let solution = match solution {
        Some(x) if condition <= MAX_CONDITION => x,
        _ => return Err(Error::IllConditioned { condition }),
    };
    Ok(ConstantSystem {
        coefficients: rows.into_iter().map(|r| r.0).collect(),
        rhs,
        solution,
        condition,
    })
}

/// Limiting moduli `c_1..c_n` of `m_k z^{-(1 - 2k/(n+1))}`.
pub fn limit_constants(profile: &VarianceProfile) -> Result<Vec<f64>> {
    Ok(constant_system(profile)?
        .solution
        .iter()
        .map(|x| x.exp())
        .collect())
}

/// Relative residuals of the multiplicative relations satisfied by `c`
/// (same ordering as the rows of [`constant_system`]).
pub fn constant_system_residuals(profile: &VarianceProfile, c: &[f64]) -> Vec<f64> {
    let n = profile.dim();
    let s = |i: usize, j: usize| profile.get(i - 1, j - 1);
    let c = |k: usize| c[k - 1];
    let rel = |lhs: f64, rhs: f64| (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n);
    for k in 1..=n.div_ceil(2) {
        out.push(rel(s(k, n + 1 - k) * c(k) * c(n + 1 - k), 1.0));
    }
    if n >= 2 {
        out.push(rel(s(1, n - 1) * c(1) * c(n - 1), c(n)));
    }
    for k in 2..=n / 2 {
        out.push(rel(
            s(k, n - k) * c(k) * c(n - k),
            s(n + 1 - k, k - 1) * c(n + 1 - k) * c(k - 1),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(rows: &[&[f64]]) -> VarianceProfile {
        VarianceProfile::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn scalar_constant() {
        let c = limit_constants(&p(&[&[1.0]])).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15);
        let c = limit_constants(&p(&[&[4.0]])).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_hand_solution() {
        let c = limit_constants(&p(&[&[1.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-14 && (c[1] - 1.0).abs() < 1e-14);

        // x1 + x2 = 0, 2 x1 - x2 = -log 4
        let c = limit_constants(&p(&[&[4.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!((c[0] - 4f64.powf(-1.0 / 3.0)).abs() < 1e-14);
        assert!((c[1] - 4f64.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn system_is_square_and_residuals_vanish() {
        for n in 1..=7 {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i + j < n {
                                1.0 + 0.1 * (i + j) as f64
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            let prof = VarianceProfile::from_rows(&rows).unwrap();
            let sys = constant_system(&prof).unwrap();
            assert_eq!(sys.coefficients.len(), n);
            let c: Vec<f64> = sys.solution.iter().map(|x| x.exp()).collect();
            assert!(constant_system_residuals(&prof, &c)
                .iter()
                .all(|r| *r < 1e-12));
        }
    }

    #[test]
    fn rejects_non_staircase() {
        assert!(limit_constants(&p(&[&[1.0, 1.0], &[1.0, 1.0]])).is_err());
    }
}
