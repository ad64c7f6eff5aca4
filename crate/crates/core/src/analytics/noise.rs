use core::f64::consts::PI;

use libm::{exp, expm1, sqrt};

use crate::error::{nonnegative, positive, Error, Result};

use super::{binary_fisher, p_detuned, Convention};

/// Probability floor `σ_n² t³/π²` from intra-shot OU drift of the
/// quadratures at `ω_s t = 2π`. Leading order in `γt`.
pub fn ou_noise_floor(sigma_n: f64, gamma: f64, t: f64) -> Result<f64> {
    nonnegative("sigma_n", sigma_n)?;
    nonnegative("gamma", gamma)?;
    nonnegative("t", t)?;
    let eps = sigma_n * sigma_n * t * t * t / (PI * PI);
    if eps >= 0.5 {
        return Err(Error::input(
            "sigma_n",
            "floor σ_n²t³/π² leaves the probability range [0, 0.5)",
        ));
    }
    Ok(eps)
}

/// The floor formula is only leading order; above `γt = 0.1` it should be
/// treated as a rough guide.
pub fn ou_floor_is_reliable(gamma: f64, t: f64) -> bool {
    gamma * t <= 0.1
}

/// `ω_r/γ`. With stationary variance `σ² = σ_n²/(2γ)` the floor condition
/// reduces to this ratio exceeding 1.
pub fn fourier_limit_ratio(omega_r: f64, gamma: f64) -> f64 {
    omega_r / gamma
}

/// Resonant probability with Markovian probe dephasing (Effective
/// convention): `½(1 − exp(−(σt)²(ω_r t)²/π² − 2κt))`.
pub fn p_dephasing(sigma_t: f64, omega_r_t: f64, kappa_t: f64) -> Result<f64> {
    nonnegative("sigma_t", sigma_t)?;
    nonnegative("kappa_t", kappa_t)?;
    let u = sigma_t * omega_r_t / PI;
    let x = u * u + 2.0 * kappa_t;
    Ok(-0.5 * expm1(-x))
}

/// Closed-form `I_r = 4(ω_r t)²(σt)⁴/(π⁴[exp(4κt + 2(ω_r t)²(σt)²/π²) − 1])`
/// in units of `t²`.
pub fn fisher_dephasing(sigma_t: f64, omega_r_t: f64, kappa_t: f64) -> Result<f64> {
    nonnegative("sigma_t", sigma_t)?;
    nonnegative("kappa_t", kappa_t)?;
    let u = omega_r_t * sigma_t / PI;
    let y = 4.0 * kappa_t + 2.0 * u * u;
    if y == 0.0 {
        return Ok(2.0 * sigma_t * sigma_t / (PI * PI));
    }
    let s2 = sigma_t * sigma_t / (PI * PI);
    Ok(4.0 * omega_r_t * omega_r_t * s2 * s2 / expm1(y))
}

/// Same quantity from [`binary_fisher`] and a numeric derivative.
pub fn fisher_dephasing_numeric(sigma_t: f64, omega_r_t: f64, kappa_t: f64) -> Result<f64> {
    let h = omega_r_t.abs() * 1e-4;
    let p = p_dephasing(sigma_t, omega_r_t, kappa_t)?;
    let dp =
        (p_dephasing(sigma_t, omega_r_t + h, kappa_t)? - p_dephasing(sigma_t, omega_r_t - h, kappa_t)?) / (2.0 * h);
    binary_fisher(p, dp)
}

/// `I_r(κ)/I_r(0)` at fixed `σ`, `ω_r`, `κ` and total time `t`.
pub fn dephasing_ratio(sigma: f64, omega_r: f64, kappa: f64, t: f64) -> Result<f64> {
    nonnegative("sigma", sigma)?;
    nonnegative("kappa", kappa)?;
    positive("t", t)?;
    // expm1(y0)/expm1(y0 + 4κt), rearranged so large y0 cannot overflow
    let u = omega_r * t * sigma * t / PI;
    let y0 = 2.0 * u * u;
    let k = 4.0 * kappa * t;
    if y0 == 0.0 {
        return Ok(if k == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(expm1(-y0) / expm1(-y0 - k) * exp(-k))
}

/// Time scale `κ^(1/3) σ^(−2/3) ω_r^(−2/3)` below which dephasing ruins the
/// resolution.
pub fn dephasing_minimal_time(sigma: f64, omega_r: f64, kappa: f64) -> f64 {
    libm::cbrt(kappa / (sigma * sigma * omega_r * omega_r))
}

/// Readout flips with probability `ε′`: `p ↦ (1−ε′)p + ε′(1−p)`.
pub fn p_readout(p_ideal: f64, eps_prime: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&eps_prime) {
        return Err(Error::input("eps_prime", "must lie in [0, 0.5)"));
    }
    if !(0.0..=1.0).contains(&p_ideal) {
        return Err(Error::input("p_ideal", "must lie in [0, 1]"));
    }
    Ok((1.0 - eps_prime) * p_ideal + eps_prime * (1.0 - p_ideal))
}

/// Splitting `ω_r t = √ε′/(σt)` beyond which readout errors stop
/// masking the signal.
pub fn readout_resolution_threshold(eps_prime: f64, sigma_t: f64) -> f64 {
    sqrt(eps_prime) / sigma_t
}

/// Fisher information about `ω_r` on resonance with readout errors, from
/// the small-splitting probability `p = c(ω_r t)²` (units of `t²`).
pub fn fisher_readout(sigma_t: f64, omega_r_t: f64, eps_prime: f64, convention: Convention) -> Result<f64> {
    let c = super::floor_curvature(sigma_t, convention);
    let ideal = c * omega_r_t * omega_r_t;
    let p = p_readout(ideal, eps_prime)?;
    let dp = (1.0 - 2.0 * eps_prime) * 2.0 * c * omega_r_t;
    binary_fisher(p, dp)
}

/// Which shot-count threshold [`sample_complexity`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    Resonant,
    OffResonant,
}

fn on_resonance(delta_s_t: f64) -> bool {
    let n = libm::round(delta_s_t / (2.0 * PI));
    n != 0.0 && (delta_s_t - 2.0 * PI * n).abs() < 1e-6
}

/// Shots needed to resolve the splitting (Physical convention).
///
/// Resonant: `1/p`. Off resonance: `p(1−p)/((∂²p/∂ω_r²)² ω_r⁴)`, the
/// point where the quadratic change in `p` exceeds one binomial standard
/// error.
pub fn sample_complexity(regime: Regime, sigma_t: f64, omega_r_t: f64, delta_s_t: f64) -> Result<f64> {
    let conv = Convention::Physical;
    match regime {
        Regime::Resonant => {
            if !on_resonance(delta_s_t) {
                return Err(Error::input("delta_s_t", "resonant regime needs δ_s t = 2πn"));
            }
            let p = p_detuned(delta_s_t, omega_r_t, sigma_t, conv)?;
            if p == 0.0 {
                return Err(Error::input("omega_r_t", "zero splitting needs infinitely many shots"));
            }
            Ok(1.0 / p)
        }
        Regime::OffResonant => {
            if on_resonance(delta_s_t) {
                return Err(Error::input("delta_s_t", "off-resonant regime needs δ_s t ≠ 2πn"));
            }
            let p = p_detuned(delta_s_t, omega_r_t, sigma_t, conv)?;
            let h = 1e-3;
            let f = |r: f64| p_detuned(delta_s_t, r, sigma_t, conv);
            let d2 = (f(h)? - 2.0 * f(0.0)? + f(-h)?) / (h * h);
            let r2 = omega_r_t * omega_r_t;
            Ok(p * (1.0 - p) / (d2 * d2 * r2 * r2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ou_floor_examples() {
        assert_eq!(ou_noise_floor(0.0, 0.01, 1.0).unwrap(), 0.0);
        assert_relative_eq!(ou_noise_floor(0.5, 0.01, 1.0).unwrap(), 0.25 / (PI * PI));
        assert!(ou_noise_floor(PI, 0.01, 1.0).is_err());
        assert!(ou_noise_floor(-1.0, 0.01, 1.0).is_err());
        assert!(!ou_floor_is_reliable(0.5, 1.0));
    }

    #[test]
    fn dephasing_closed_form_matches_numeric() {
        for &(s, r, k) in &[(1.0, 0.01, 0.0), (5.0, 0.02, 0.01), (2.0, 0.3, 0.2)] {
            let a = fisher_dephasing(s, r, k).unwrap();
            let b = fisher_dephasing_numeric(s, r, k).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
        assert_relative_eq!(
            fisher_dephasing(1.0, 1e-5, 0.0).unwrap(),
            2.0 / (PI * PI),
            max_relative = 1e-6
        );
    }

    #[test]
    fn dephasing_small_kappa_recovers_noiseless() {
        let r = dephasing_ratio(10.0, 10.0, 1e-3, 1.0).unwrap();
        assert!(r > 0.99);
    }

    #[test]
    fn readout_examples() {
        assert_eq!(p_readout(0.3, 0.0).unwrap(), 0.3);
        assert_relative_eq!(p_readout(0.0, 0.01).unwrap(), 0.01);
        assert_relative_eq!(readout_resolution_threshold(0.01, 1.0), 0.1);
        assert!(p_readout(0.1, 0.5).is_err());
    }

    #[test]
    fn sample_complexity_examples() {
        let n = sample_complexity(Regime::Resonant, 1.0, 0.01, 2.0 * PI).unwrap();
        assert_relative_eq!(n, PI.powi(4) / (2.0 * 0.01f64.powi(2)), max_relative = 1e-3);
        let n2 = sample_complexity(Regime::Resonant, 1.0, 0.02, 2.0 * PI).unwrap();
        assert_relative_eq!(n / n2, 4.0, max_relative = 1e-3);
        let off = sample_complexity(Regime::OffResonant, 1.0, 0.01, 1.8 * PI).unwrap();
        assert!(off > 1e8 / 3.0 && off < 3e8, "{off}");
        assert!(sample_complexity(Regime::Resonant, 1.0, 0.01, 1.8 * PI).is_err());
        assert!(sample_complexity(Regime::OffResonant, 1.0, 0.01, 2.0 * PI).is_err());
    }
}
