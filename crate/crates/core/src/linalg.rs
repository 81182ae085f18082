//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Normalised Euclidean norm `((1/n) sum |v_j|^2)^{1/2}`.
pub fn normalized_l2(v: &[Complex64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let sum: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    (sum / v.len() as f64).sqrt()
}

/// Same as [`normalized_l2`] for real vectors.
pub fn normalized_l2_real(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let sum: f64 = v.iter().map(|x| x * x).sum();
    (sum / v.len() as f64).sqrt()
}

/// Spectral norm of a real symmetric matrix (largest absolute eigenvalue).
///
/// The operator norm induced by [`normalized_l2`] coincides with this value.
pub fn symmetric_spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `y = A x` for a real matrix and complex vector.
pub fn real_matvec(a: &DMatrix<f64>, x: &[Complex64]) -> Vec<Complex64> {
    let n = a.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, xj) in x.iter().enumerate() {
            let s = a[(i, j)];
            if s != 0.0 {
                re += s * xj.re;
                im += s * xj.im;
            }
        }
        *o = Complex64::new(re, im);
    }
    out
}

/// Solve a dense complex system by LU with partial pivoting.
pub fn solve_complex(a: DMatrix<Complex64>, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let rhs = DVector::from_column_slice(b);
    let x = a.lu().solve(&rhs)?;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return None;
    }
    Some(x.iter().copied().collect())
}

/// Solve a dense real system, returning the solution and the 2-norm
/// condition number of `a`.
pub fn solve_real_with_condition(a: &DMatrix<f64>, b: &[f64]) -> (Option<Vec<f64>>, f64) {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    let rhs = DVector::from_column_slice(b);
    let x = a
        .clone()
        .lu()
        .solve(&rhs)
        .map(|v| v.iter().copied().collect());
    (x, condition)
}

/// Ordinary least-squares line fit; returns `(slope, intercept)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
