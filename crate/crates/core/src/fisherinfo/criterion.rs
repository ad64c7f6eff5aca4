use alloc::vec::Vec;

use libm::log;

use super::density::max_abs_diff;
use super::qfi::{classical_fi_matrix, derivative, qfi_matrix, qfi_with_step, ParamFamily};
use crate::error::{Error, Result};

/// Symmetry tolerance `‖ρ(s) − ρ(−s)‖_max`.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Tolerance on the exponent window `1 < k ≤ 2`.
pub const EXPONENT_TOL: f64 = 0.05;
/// Eigenvalue threshold for regularity of a Fisher matrix.
pub const REGULARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    /// Scaling exponent of the smallest eigenvalue that moves with `s`;
    /// `None` when the spectrum does not depend on `s` at all.
    pub exponent: Option<f64>,
    /// QFI extrapolated to `s → 0⁺`.
    pub limit_fi: f64,
    /// Log-log slope of the QFI between the two smallest grid points.
    pub fi_slope: f64,
    /// QFI at every grid point.
    pub fi: Vec<f64>,
    pub verdict: bool,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Log-spaced grid of `n` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (log(lo), log(hi));
    (0..n)
        .map(|k| libm::exp(a + (b - a) * k as f64 / (n - 1).max(1) as f64))
        .collect()
}

/// Checks whether the separation parameter `sep_idx` can be estimated with
/// finite information as it goes to zero.
///
/// The exponent is the log-log slope of the smallest eigenvalue that varies
/// over the grid. The limiting information is the QFI at the smallest grid
/// point when the QFI is flat there (|slope| ≤ 0.1), 0 when it falls with
/// `s`, and infinite when it grows as `s → 0`.
pub fn superres_criterion<P: ParamFamily + ?Sized>(
    family: &P,
    theta: &[f64],
    sep_idx: usize,
    grid: &[f64],
) -> Result<CriterionReport> {
    if grid.len() < 2 || grid.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::input("grid", "need at least two strictly positive separations"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("grid", "must be increasing"));
    }
    if sep_idx >= family.n_params() || theta.len() != family.n_params() {
        return Err(Error::input("sep_idx", "out of range for this family"));
    }
    let at = |s: f64| {
        let mut t = theta.to_vec();
        t[sep_idx] = s;
        t
    };

    let mut spectra: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    let mut fi = Vec::with_capacity(grid.len());
    for &s in grid {
        let plus = family.evaluate(&at(s))?;
        let minus = family.evaluate(&at(-s))?;
        let asym = max_abs_diff(plus.matrix(), minus.matrix());
        if asym > SYMMETRY_TOL {
            return Err(Error::Precondition(alloc::format!(
                "family is not symmetric in parameter {sep_idx}: ‖ρ(s) − ρ(−s)‖ = {asym:.3e} at s = {s:.3e}"
            )));
        }
        let mut vals = plus.spectrum().values;
        vals.reverse();
        spectra.push(vals);
        // keep the difference step well inside the current separation
        let h = family.fd_step(sep_idx).min(1e-2 * s);
        fi.push(qfi_with_step(family, &at(s), sep_idx, h)?);
    }

    let dim = spectra[0].len();
    let mut exponent = None;
    for j in 0..dim {
        let series: Vec<f64> = spectra.iter().map(|v| v[j]).collect();
        let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
        if hi - lo <= 1e-12 * hi.abs().max(1e-300) || lo <= 0.0 {
            continue;
        }
        let xs: Vec<f64> = grid.iter().map(|&s| log(s)).collect();
        let ys: Vec<f64> = series.iter().map(|&v| log(v)).collect();
        exponent = Some(ls_slope(&xs, &ys));
        break;
    }

    let fi_slope = if fi[0] > 0.0 && fi[1] > 0.0 {
        (log(fi[1]) - log(fi[0])) / (log(grid[1]) - log(grid[0]))
    } else {
        f64::INFINITY
    };
    let limit_fi = if fi_slope.abs() <= 0.1 {
        fi[0]
    } else if fi_slope > 0.1 {
        0.0
    } else {
        f64::INFINITY
    };
    let verdict = match exponent {
        Some(k) => k > 1.0 - EXPONENT_TOL && k <= 2.0 + EXPONENT_TOL && limit_fi > 0.0,
        None => false,
    };
    Ok(CriterionReport {
        exponent,
        limit_fi,
        fi_slope,
        fi,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateReport {
    /// Regularity from the problematic block of the classical matrix.
    pub regular: bool,
    pub c22_min_eig: f64,
    /// Regularity of the full QFI matrix, for cross-checking.
    pub full_regular: bool,
    pub full_min_eig: f64,
}

impl MultivariateReport {
    pub fn consistent(&self) -> bool {
        self.regular == self.full_regular
    }
}

/// Block test for regularity of the QFI matrix when the problematic
/// parameters have vanishing `∂ρ/∂θ` at the evaluation point.
pub fn multivariate_criterion<P: ParamFamily + ?Sized>(
    family: &P,
    theta: &[f64],
    problematic: &[usize],
) -> Result<MultivariateReport> {
    if problematic.is_empty() {
        return Err(Error::input("problematic", "need at least one index"));
    }
    for &i in problematic {
        let d = derivative(family, theta, i)?;
        let norm = d.iter().map(crate::cabs).fold(0.0, f64::max);
        if norm > 1e-6 {
            return Err(Error::Precondition(alloc::format!(
                "∂ρ/∂θ_{i} has norm {norm:.3e} > 1e-6 at the evaluation point"
            )));
        }
    }
    let c = classical_fi_matrix(family, theta)?;
    let c22_min_eig = c.block(problematic).min_eigenvalue();
    let full_min_eig = qfi_matrix(family, theta)?.min_eigenvalue();
    Ok(MultivariateReport {
        regular: c22_min_eig > REGULARITY_TOL,
        c22_min_eig,
        full_regular: full_min_eig > REGULARITY_TOL,
        full_min_eig,
    })
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::analytics::Convention;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn ramsey(delta: f64) -> RamseyFamily {
        RamseyFamily::new(
            &[RamseyParam::OmegaR],
            RamseyPoint::new(1e-3, delta, 1.0),
            Convention::Physical,
        )
    }

    #[test]
    fn ramsey_resonant_verdict() {
        let f = ramsey(2.0 * PI);
        let r = superres_criterion(&f, &[0.0], 0, &log_grid(1e-4, 1e-2, 9)).unwrap();
        assert_relative_eq!(r.exponent.unwrap(), 2.0, epsilon = 0.05);
        assert!(r.verdict);
        assert_relative_eq!(r.limit_fi, 8.0 / PI.powi(4), max_relative = 0.01);
    }

    #[test]
    fn ramsey_off_resonance_verdict() {
        let f = ramsey(1.8 * PI);
        let r = superres_criterion(&f, &[0.0], 0, &log_grid(1e-4, 1e-2, 9)).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.limit_fi, 0.0);
    }

    #[test]
    fn pure_symmetric_family_fails() {
        let f = FnFamily::new(alloc::vec![1e-6], |t: &[f64]| {
            let a = t[0] * t[0];
            let psi = nalgebra::DVector::from_vec(alloc::vec![
                crate::C64::new(libm::cos(a), 0.0),
                crate::C64::new(libm::sin(a), 0.0)
            ]);
            DensityMatrix::pure(&psi)
        });
        let r = superres_criterion(&f, &[0.0], 0, &log_grid(1e-4, 1e-2, 7)).unwrap();
        assert!(r.exponent.is_none());
        assert!(!r.verdict);
    }

    #[test]
    fn asymmetric_family_rejected() {
        let f = FnFamily::new(alloc::vec![1e-6], |t: &[f64]| {
            let p = 0.3 + 0.1 * t[0];
            DensityMatrix::diagonal(&[p, 1.0 - p])
        });
        assert!(matches!(
            superres_criterion(&f, &[0.0], 0, &log_grid(1e-4, 1e-2, 5)),
            Err(Error::Precondition(_))
        ));
    }

    fn three_setting(first: f64) -> MultiSettingRamsey {
        let params = [RamseyParam::OmegaR, RamseyParam::OmegaS, RamseyParam::Sigma];
        MultiSettingRamsey::new(
            &params,
            RamseyPoint::new(1e-6, 0.0, 5.0),
            &[first, 1.35 * PI, 1.6 * PI],
            Convention::Physical,
        )
        .with_steps(alloc::vec![1e-8, 1e-5, 1e-5])
    }

    #[test]
    fn block_test_agrees_with_full_matrix() {
        let f = three_setting(2.0 * PI);
        let r = multivariate_criterion(&f, &f.theta0(), &[0]).unwrap();
        assert!(r.regular && r.consistent(), "{r:?}");
        let f = three_setting(1.8 * PI);
        let r = multivariate_criterion(&f, &f.theta0(), &[0]).unwrap();
        assert!(!r.regular && r.consistent(), "{r:?}");
    }

    #[test]
    fn duplicated_parameter_is_singular() {
        let f = FnFamily::new(alloc::vec![1e-8, 1e-8], |t: &[f64]| {
            let p = crate::analytics::p_detuned(2.0 * PI, t[0] + t[1], 5.0, Convention::Physical)?;
            DensityMatrix::diagonal(&[1.0 - p, p])
        });
        let r = multivariate_criterion(&f, &[2e-7, 2e-7], &[0, 1]).unwrap();
        assert!(!r.regular && r.consistent());
    }

    #[test]
    fn precondition_names_index() {
        let f = ramsey(2.0 * PI);
        let e = multivariate_criterion(&f, &[0.1], &[0]).unwrap_err();
        assert!(alloc::format!("{e}").contains("θ_0"));
    }
}
