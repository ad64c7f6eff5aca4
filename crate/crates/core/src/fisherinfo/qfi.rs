use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use super::density::{max_abs_diff, sqrt_psd, CMatrix, DensityMatrix, Spectrum};
use crate::error::{Error, Result};

/// Pairs with `p_i + p_j` below this are skipped when dividing.
pub const EIGEN_FLOOR: f64 = 1e-14;
/// Eigenvalues closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A parametrized family `θ ↦ ρ(θ)`.
pub trait ParamFamily {
    fn n_params(&self) -> usize;
    /// Central-difference step for parameter `idx` (same units as θ).
    fn fd_step(&self, idx: usize) -> f64;
    fn evaluate(&self, theta: &[f64]) -> Result<DensityMatrix>;
}

impl<T: ParamFamily + ?Sized> ParamFamily for &T {
    fn n_params(&self) -> usize {
        (**self).n_params()
    }
    fn fd_step(&self, idx: usize) -> f64 {
        (**self).fd_step(idx)
    }
    fn evaluate(&self, theta: &[f64]) -> Result<DensityMatrix> {
        (**self).evaluate(theta)
    }
}

/// A family built from a closure.
pub struct FnFamily<F> {
    steps: Vec<f64>,
    f: F,
}

impl<F> FnFamily<F>
where
    F: Fn(&[f64]) -> Result<DensityMatrix>,
{
    pub fn new(steps: Vec<f64>, f: F) -> Self {
        FnFamily { steps, f }
    }
}

impl<F> ParamFamily for FnFamily<F>
where
    F: Fn(&[f64]) -> Result<DensityMatrix>,
{
    fn n_params(&self) -> usize {
        self.steps.len()
    }
    fn fd_step(&self, idx: usize) -> f64 {
        self.steps[idx]
    }
    fn evaluate(&self, theta: &[f64]) -> Result<DensityMatrix> {
        (self.f)(theta)
    }
}

/// Real symmetric Fisher-information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    pub entries: DMatrix<f64>,
}

impl FisherMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.entries)
    }

    /// Principal submatrix on `idx`.
    pub fn block(&self, idx: &[usize]) -> FisherMatrix {
        let k = idx.len();
        FisherMatrix {
            entries: DMatrix::from_fn(k, k, |a, b| self.entries[(idx[a], idx[b])]),
        }
    }
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

fn check_theta<P: ParamFamily + ?Sized>(family: &P, theta: &[f64], idx: Option<usize>) -> Result<()> {
    if theta.len() != family.n_params() {
        return Err(Error::input(
            "theta",
            "length differs from the family's parameter count",
        ));
    }
    if let Some(i) = idx {
        if i >= family.n_params() {
            return Err(Error::input("idx", "parameter index out of range"));
        }
    }
    for (i, &v) in theta.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Domain { index: i, value: v });
        }
    }
    Ok(())
}

/// `∂ρ/∂θ_idx` by central difference with step `h`.
pub(crate) fn derivative_with_step<P: ParamFamily + ?Sized>(
    family: &P,
    theta: &[f64],
    idx: usize,
    h: f64,
) -> Result<CMatrix> {
    let mut tp = theta.to_vec();
    let mut tm = theta.to_vec();
    tp[idx] += h;
    tm[idx] -= h;
    let rp = family.evaluate(&tp)?;
    let rm = family.evaluate(&tm)?;
    Ok((rp.matrix() - rm.matrix()) / crate::C64::new(2.0 * h, 0.0))
}

pub fn derivative<P: ParamFamily + ?Sized>(family: &P, theta: &[f64], idx: usize) -> Result<CMatrix> {
    check_theta(family, theta, Some(idx))?;
    derivative_with_step(family, theta, idx, family.fd_step(idx))
}

/// `V† D V`.
fn in_eigenbasis(spec: &Spectrum, d: &CMatrix) -> CMatrix {
    spec.vectors.adjoint() * d * &spec.vectors
}

/// Which eigenvalue pairs enter a sum.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Pairs {
    All,
    Degenerate,
}

fn fisher_from(spec: &Spectrum, ds: &[CMatrix], pairs: Pairs) -> DMatrix<f64> {
    let k = ds.len();
    let p = &spec.values;
    let n = p.len();
    let mut out = DMatrix::zeros(k, k);
    for i in 0..n {
        for j in 0..n {
            let s = p[i] + p[j];
            if s < EIGEN_FLOOR {
                continue;
            }
            if pairs == Pairs::Degenerate && (p[i] - p[j]).abs() >= DEGENERACY_TOL {
                continue;
            }
            for a in 0..k {
                for b in a..k {
                    let v = 2.0 * (ds[a][(i, j)] * ds[b][(j, i)]).re / s;
                    out[(a, b)] += v;
                    if a != b {
                        out[(b, a)] += v;
                    }
                }
            }
        }
    }
    out
}

fn all_derivatives<P: ParamFamily + ?Sized>(family: &P, theta: &[f64], spec: &Spectrum) -> Result<Vec<CMatrix>> {
    (0..family.n_params())
        .map(|i| {
            Ok(in_eigenbasis(
                spec,
                &derivative_with_step(family, theta, i, family.fd_step(i))?,
            ))
        })
        .collect()
}

pub(crate) fn qfi_with_step<P: ParamFamily + ?Sized>(family: &P, theta: &[f64], idx: usize, h: f64) -> Result<f64> {
    let spec = family.evaluate(theta)?.spectrum();
    let d = in_eigenbasis(&spec, &derivative_with_step(family, theta, idx, h)?);
    Ok(fisher_from(&spec, &[d], Pairs::All)[(0, 0)].max(0.0))
}

/// Quantum Fisher information about `θ_idx`.
pub fn qfi<P: ParamFamily + ?Sized>(family: &P, theta: &[f64], idx: usize) -> Result<f64> {
    check_theta(family, theta, Some(idx))?;
    qfi_with_step(family, theta, idx, family.fd_step(idx))
}

/// Full QFI matrix.
pub fn qfi_matrix<P: ParamFamily + ?Sized>(family: &P, theta: &[f64]) -> Result<FisherMatrix> {
    check_theta(family, theta, None)?;
    let spec = family.evaluate(theta)?.spectrum();
    let ds = all_derivatives(family, theta, &spec)?;
    Ok(FisherMatrix {
        entries: fisher_from(&spec, &ds, Pairs::All),
    })
}

/// Eigenvalue-only (classical) part of the QFI matrix.
pub fn classical_fi_matrix<P: ParamFamily + ?Sized>(family: &P, theta: &[f64]) -> Result<FisherMatrix> {
    check_theta(family, theta, None)?;
    let spec = family.evaluate(theta)?.spectrum();
    let ds = all_derivatives(family, theta, &spec)?;
    Ok(FisherMatrix {
        entries: fisher_from(&spec, &ds, Pairs::Degenerate),
    })
}

/// `tr[(d√ρ/dθ)²]`, which brackets the QFI: `2·v ≤ QFI ≤ 4·v`.
pub fn sqrt_rho_deriv_trace<P: ParamFamily + ?Sized>(family: &P, theta: &[f64], idx: usize) -> Result<f64> {
    check_theta(family, theta, Some(idx))?;
    let h = family.fd_step(idx);
    let mut tp = theta.to_vec();
    let mut tm = theta.to_vec();
    tp[idx] += h;
    tm[idx] -= h;
    let sp = sqrt_psd(family.evaluate(&tp)?.matrix());
    let sm = sqrt_psd(family.evaluate(&tm)?.matrix());
    let m = (sp - sm) / crate::C64::new(2.0 * h, 0.0);
    // M is Hermitian, so tr(M²) = Σ |M_ij|²
    Ok(m.iter().map(|z| z.norm_sqr()).sum())
}

/// Largest element of `ρ(θ) − ρ(θ')`.
pub fn family_distance<P: ParamFamily + ?Sized>(family: &P, a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(max_abs_diff(family.evaluate(a)?.matrix(), family.evaluate(b)?.matrix()))
}

#[cfg(test)]
mod tests {
    use super::super::families::*;
    use super::*;
    use crate::analytics::Convention;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn diag_family() -> impl ParamFamily {
        FnFamily::new(alloc::vec![1e-5], |t: &[f64]| {
            let p = 0.3 + 0.2 * libm::sin(t[0]);
            DensityMatrix::diagonal(&[p, 1.0 - p])
        })
    }

    #[test]
    fn pure_unitary_family_has_unit_qfi() {
        let f = UnitaryQubitFamily;
        assert_relative_eq!(qfi(&f, &[0.4], 0).unwrap(), 1.0, max_relative = 1e-8);
        let c = classical_fi_matrix(&f, &[0.4]).unwrap();
        assert!(c.get(0, 0).abs() < 1e-8);
        assert_relative_eq!(sqrt_rho_deriv_trace(&f, &[0.4], 0).unwrap(), 0.5, max_relative = 1e-6);
    }

    #[test]
    fn diagonal_family_is_classical() {
        let f = diag_family();
        let th = 0.7;
        let p = 0.3 + 0.2 * libm::sin(th);
        let dp = 0.2 * libm::cos(th);
        let want = dp * dp / (p * (1.0 - p));
        assert_relative_eq!(qfi(&f, &[th], 0).unwrap(), want, max_relative = 1e-8);
        let c = classical_fi_matrix(&f, &[th]).unwrap();
        assert_relative_eq!(c.get(0, 0), want, max_relative = 1e-8);
        assert_relative_eq!(
            sqrt_rho_deriv_trace(&f, &[th], 0).unwrap(),
            want / 4.0,
            max_relative = 1e-6
        );
    }

    #[test]
    fn constant_family_has_nothing() {
        let f = FnFamily::new(alloc::vec![1e-5], |_: &[f64]| DensityMatrix::diagonal(&[0.2, 0.8]));
        assert_eq!(qfi(&f, &[0.1], 0).unwrap(), 0.0);
        assert_eq!(sqrt_rho_deriv_trace(&f, &[0.1], 0).unwrap(), 0.0);
    }

    #[test]
    fn matrix_diagonal_matches_qfi_and_unused_parameter_is_zero() {
        let f = FnFamily::new(alloc::vec![1e-5, 1e-5], |t: &[f64]| {
            let p = 0.4 + 0.1 * libm::sin(t[0]);
            DensityMatrix::diagonal(&[p, 1.0 - p])
        });
        let m = qfi_matrix(&f, &[0.3, 0.9]).unwrap();
        assert_relative_eq!(m.get(0, 0), qfi(&f, &[0.3, 0.9], 0).unwrap(), max_relative = 1e-8);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn ramsey_resonant_qfi() {
        let f = RamseyFamily::new(
            &[RamseyParam::OmegaR],
            RamseyPoint::new(1e-3, 2.0 * PI, 1.0),
            Convention::Physical,
        );
        let v = qfi(&f, &f.theta0(), 0).unwrap();
        assert_relative_eq!(v, 8.0 / PI.powi(4), max_relative = 0.01);
    }

    #[test]
    fn ramsey_block_structure() {
        let params = [RamseyParam::OmegaR, RamseyParam::OmegaS, RamseyParam::Sigma];
        let f = RamseyFamily::new(&params, RamseyPoint::new(1e-3, 2.0 * PI, 5.0), Convention::Physical);
        let m = qfi_matrix(&f, &f.theta0()).unwrap();
        let ir = m.get(0, 0);
        assert!(m.get(0, 1).abs() < 1e-3 * ir);
        assert!(m.get(0, 2).abs() < 1e-3 * ir);
    }

    #[test]
    fn wrong_theta_length_rejected() {
        let f = UnitaryQubitFamily;
        assert!(qfi(&f, &[0.1, 0.2], 0).is_err());
        assert!(matches!(qfi(&f, &[f64::NAN], 0), Err(Error::Domain { .. })));
    }
}
