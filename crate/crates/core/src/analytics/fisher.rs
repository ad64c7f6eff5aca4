use core::f64::consts::PI;

use libm::tan;

use crate::error::{nonnegative, positive, Error, Result};
use crate::optimize::golden_section;
use crate::signal::{PulsePlan, TwoToneSignal};

use super::{p_detuned, p_two_tone, Convention, Labeled};

/// `(dp/dθ)²/(p(1−p))`, the Fisher information of one binary outcome.
pub fn binary_fisher(p: f64, dp: f64) -> Result<f64> {
    if !(p.is_finite() && dp.is_finite()) {
        return Err(Error::input("p", "must be finite"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input("p", "must lie in [0, 1]"));
    }
    if p == 0.0 || p == 1.0 {
        return Err(Error::Singular { p });
    }
    Ok(dp * dp / (p * (1.0 - p)))
}

/// Limit of [`binary_fisher`] for `p = c s²`, `dp = 2cs` as `s → 0`.
pub fn binary_fisher_quadratic_limit(c: f64) -> f64 {
    4.0 * c
}

/// Fisher information about `ω_r` for a Gaussian two-tone signal under a
/// pulse plan. The derivative is a central difference with step `ω_r·1e-3`.
pub fn fisher_r(signal: &TwoToneSignal, plan: &PulsePlan, convention: Convention) -> Result<Labeled> {
    let r = signal.omega_r;
    if r == 0.0 {
        return Err(Error::input(
            "omega_r",
            "must be nonzero; the information is evaluated as ω_r → 0⁺",
        ));
    }
    let h = r.abs() * 1e-3;
    let p = p_two_tone(signal, plan, convention)?;
    let pp = p_two_tone(&signal.with_omega_r(r + h), plan, convention)?;
    let pm = p_two_tone(&signal.with_omega_r(r - h), plan, convention)?;
    let v = binary_fisher(p, (pp - pm) / (2.0 * h))?;
    Ok(Labeled::new(v, convention))
}

/// Scalar version of [`fisher_r`] in units of `t²`, using the convention's
/// fixed gain.
pub fn fisher_r_detuned(delta_s_t: f64, omega_r_t: f64, sigma_t: f64, convention: Convention) -> Result<Labeled> {
    if omega_r_t == 0.0 {
        return Err(Error::input("omega_r_t", "must be nonzero"));
    }
    let h = omega_r_t.abs() * 1e-3;
    let p = p_detuned(delta_s_t, omega_r_t, sigma_t, convention)?;
    let pp = p_detuned(delta_s_t, omega_r_t + h, sigma_t, convention)?;
    let pm = p_detuned(delta_s_t, omega_r_t - h, sigma_t, convention)?;
    Ok(Labeled::new(binary_fisher(p, (pp - pm) / (2.0 * h))?, convention))
}

/// Resonant value `8σ²tan²(ω_sτ/2) t²/ω_s²` for a general pulse spacing.
pub fn fisher_r_resonance(sigma: f64, omega_s: f64, tau: f64, t: f64) -> Result<Labeled> {
    positive("omega_s", omega_s)?;
    let g = tan(omega_s * tau / 2.0);
    Ok(Labeled::new(
        8.0 * sigma * sigma * g * g * t * t / (omega_s * omega_s),
        Convention::Physical,
    ))
}

/// Optimal resonant information in units of `t²`: `8(σt)²/π⁴` (Physical)
/// or `2(σt)²/π²` (Effective).
pub fn fisher_r_optimal(sigma_t: f64, convention: Convention) -> Labeled {
    let g = convention.gain();
    let gs = g * sigma_t;
    Labeled::new(2.0 * gs * gs / (PI * PI), convention)
}

/// Information about `ω_r` when a constant `eps` is added to the
/// small-splitting probability `p = c(ω_r t)²`, `c = (σt)²/(2π²)` (times
/// `4/π²` in the Physical convention). Units of `t²`.
pub fn fisher_with_floor(sigma_t: f64, omega_r_t: f64, eps: f64, convention: Convention) -> Result<Labeled> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::input("eps", "must lie in [0, 0.5)"));
    }
    nonnegative("sigma_t", sigma_t)?;
    let c = floor_curvature(sigma_t, convention);
    if omega_r_t == 0.0 && eps == 0.0 {
        return Ok(Labeled::new(binary_fisher_quadratic_limit(c), convention));
    }
    let p = c * omega_r_t * omega_r_t + eps;
    let dp = 2.0 * c * omega_r_t;
    Ok(Labeled::new(binary_fisher(p, dp)?, convention))
}

/// `c` in `p ≈ c (ω_r t)²` on resonance.
pub fn floor_curvature(sigma_t: f64, convention: Convention) -> f64 {
    let s = sigma_t * convention.gain();
    s * s / (2.0 * PI * PI)
}

/// Largest average information any control sequence can give:
/// `16σ²t⁴/π²`.
pub fn fisher_upper_bound(sigma_t: f64, t: f64) -> f64 {
    16.0 * sigma_t * sigma_t * t * t / (PI * PI)
}

/// Information about σ in units of `t²` (i.e. about `σt`).
pub fn fisher_sigma(delta_s_t: f64, sigma_t: f64, omega_r_t: f64, convention: Convention) -> Result<Labeled> {
    positive("sigma_t", sigma_t)?;
    let h = sigma_t * 1e-5;
    let p = p_detuned(delta_s_t, omega_r_t, sigma_t, convention)?;
    let pp = p_detuned(delta_s_t, omega_r_t, sigma_t + h, convention)?;
    let pm = p_detuned(delta_s_t, omega_r_t, sigma_t - h, convention)?;
    Ok(Labeled::new(binary_fisher(p, (pp - pm) / (2.0 * h))?, convention))
}

/// Information about `ω_s` in units of `t²`. Moving `ω_s` up moves both
/// detunings down, so `∂p/∂ω_s = −∂p/∂δ_s`.
pub fn fisher_omega_s(delta_s_t: f64, sigma_t: f64, omega_r_t: f64, convention: Convention) -> Result<Labeled> {
    let h = 1e-5;
    let p = p_detuned(delta_s_t, omega_r_t, sigma_t, convention)?;
    let pp = p_detuned(delta_s_t + h, omega_r_t, sigma_t, convention)?;
    let pm = p_detuned(delta_s_t - h, omega_r_t, sigma_t, convention)?;
    Ok(Labeled::new(binary_fisher(p, -(pp - pm) / (2.0 * h))?, convention))
}

/// Nuisance parameter whose information is maximized by [`optimal_detuning`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nuisance {
    Sigma,
    OmegaS,
}

/// Maximizes the information about a nuisance parameter over
/// `δ_s t ∈ (π, 2π)` by golden-section search. Returns `(δ_s t, I)`.
pub fn optimal_detuning(
    which: Nuisance,
    sigma_t: f64,
    omega_r_t: f64,
    convention: Convention,
) -> Result<(f64, Labeled)> {
    positive("sigma_t", sigma_t)?;
    let fi = |d: f64| -> f64 {
        let r = match which {
            Nuisance::Sigma => fisher_sigma(d, sigma_t, omega_r_t, convention),
            Nuisance::OmegaS => fisher_omega_s(d, sigma_t, omega_r_t, convention),
        };
        r.map(|l| l.value).unwrap_or(0.0)
    };
    // coarse scan first: the curve is flat near both ends
    let n = 200;
    let (lo, hi) = (PI * (1.0 + 1e-6), 2.0 * PI * (1.0 - 1e-6));
    let step = (hi - lo) / n as f64;
    let best = (0..=n)
        .map(|k| lo + step * k as f64)
        .max_by(|a, b| fi(*a).total_cmp(&fi(*b)))
        .unwrap_or(lo);
    let (a, b) = ((best - step).max(lo), (best + step).min(hi));
    let (d, neg) = golden_section(|d| -fi(d), a, b, 1e-10, 1.0);
    if !(neg < 0.0) {
        return Err(Error::Numerical("nuisance information vanishes on (π, 2π)".into()));
    }
    Ok((d, Labeled::new(-neg, convention)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn binary_fisher_examples() {
        assert_eq!(binary_fisher(0.5, 0.0).unwrap(), 0.0);
        assert_relative_eq!(binary_fisher(0.3, 0.1).unwrap(), 0.01 / 0.21, max_relative = 1e-14);
        assert!(matches!(binary_fisher(0.0, 0.1), Err(Error::Singular { .. })));
        assert!(binary_fisher(1.0, 0.1).is_err());
        let (sigma, t, ws) = (1.3, 0.7, 20.0);
        let c = 2.0 * sigma * sigma * t * t / (ws * ws);
        assert_relative_eq!(
            binary_fisher_quadratic_limit(c),
            8.0 * sigma * sigma * t * t / (ws * ws)
        );
    }

    #[test]
    fn resonant_detuned_values() {
        let v = fisher_r_detuned(2.0 * PI, 1e-3, 1.0, Convention::Physical).unwrap();
        assert_relative_eq!(v.value, 8.0 / PI.powi(4), max_relative = 1e-3);
        assert_eq!(v.convention, Convention::Physical);
        let v = fisher_r_detuned(2.0 * PI, 1e-3, 1.0, Convention::Effective).unwrap();
        assert_relative_eq!(v.value, 2.0 / (PI * PI), max_relative = 1e-3);
    }

    #[test]
    fn off_resonance_information_vanishes() {
        let v = fisher_r_detuned(1.8 * PI, 1e-3, 1.0, Convention::Physical).unwrap();
        assert!(v.value < 1e-4);
    }

    #[test]
    fn floor_half_maximum() {
        let (s, r) = (1.0, 1e-3);
        let full = fisher_with_floor(s, r, 0.0, Convention::Effective).unwrap().value;
        assert_relative_eq!(full, 2.0 / (PI * PI), max_relative = 1e-5);
        let eps = s * s * r * r / (2.0 * PI * PI);
        let half = fisher_with_floor(s, r, eps, Convention::Effective).unwrap().value;
        assert_relative_eq!(half, full / 2.0, max_relative = 1e-5);
        let a = fisher_with_floor(s, r, 1e-3, Convention::Effective).unwrap().value;
        let b = fisher_with_floor(s, r, 2e-3, Convention::Effective).unwrap().value;
        assert_relative_eq!(a / b, 2.0, max_relative = 1e-2);
        assert!(fisher_with_floor(s, r, 0.5, Convention::Effective).is_err());
    }

    #[test]
    fn upper_bound_ratio() {
        assert_relative_eq!(fisher_upper_bound(1.0, 1.0), 16.0 / (PI * PI));
        let ratio = fisher_upper_bound(1.0, 1.0) / fisher_r_optimal(1.0, Convention::Physical).value;
        assert_relative_eq!(ratio, 2.0 * PI * PI, max_relative = 1e-12);
        assert_eq!(fisher_upper_bound(0.0, 1.0), 0.0);
    }

    #[test]
    fn sigma_information_peak() {
        let (d, v) = optimal_detuning(Nuisance::Sigma, 5.0, 0.0, Convention::Physical).unwrap();
        assert!(d > PI && d < 2.0 * PI);
        // σ = 5 in t = 1 units
        assert_relative_eq!(v.value * 25.0, 0.63, max_relative = 0.1);
        let (d10, _) = optimal_detuning(Nuisance::Sigma, 10.0, 0.0, Convention::Physical).unwrap();
        assert!((2.0 * PI - d10) < (2.0 * PI - d));
    }

    #[test]
    fn zero_splitting_sensitivities() {
        let p = |r: f64| p_detuned(1.7 * PI, r, 2.0, Convention::Physical).unwrap();
        let dr = (p(1e-6) - p(-1e-6)) / 2e-6;
        assert!(dr.abs() < 1e-9);
        assert!(fisher_sigma(1.7 * PI, 2.0, 0.0, Convention::Physical).unwrap().value > 1e-3);
    }

    #[test]
    fn plan_fisher_matches_general_resonance_formula() {
        let n = 40;
        let omega_s = 130.0;
        let plan = PulsePlan::with_detuning(omega_s, 2.0 * PI, n).unwrap();
        let s = TwoToneSignal::gaussian(omega_s, 1e-4, 0.9).unwrap();
        let v = fisher_r(&s, &plan, Convention::Physical).unwrap().value;
        let want = fisher_r_resonance(0.9, omega_s, plan.tau, plan.total_time())
            .unwrap()
            .value;
        assert_relative_eq!(v, want, max_relative = 1e-3);
    }
}
