use libm::{expm1, sin, tan};

use crate::error::{finite, nonnegative, Result};
use crate::signal::{AmplitudeModel, PulsePlan, TwoToneSignal};

use super::Convention;

/// `sin²(x/2)/x²`, with its Taylor series near 0.
pub fn sin2_half_over_sq(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        0.25 - x * x / 48.0
    } else {
        let s = sin(x / 2.0);
        s * s / (x * x)
    }
}

/// `sin(x/2)/x`, with its Taylor series near 0.
fn sin_half_over(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        0.5 - x * x / 48.0
    } else {
        sin(x / 2.0) / x
    }
}

/// Variance of the accumulated phase for Gaussian quadratures:
/// `Var φ = 4 Σ_i (σ_i t)² sin²(δ_i t/2)/(δ_i t)²`.
pub fn phase_variance_gaussian(delta_t: [f64; 2], sigma_t: [f64; 2]) -> f64 {
    4.0 * (0..2)
        .map(|i| sigma_t[i] * sigma_t[i] * sin2_half_over_sq(delta_t[i]))
        .sum::<f64>()
}

/// `p = ½(1 − exp(−2 Var φ))` with per-tone amplitudes.
pub fn p_gaussian_tones(delta_t: [f64; 2], sigma_t: [f64; 2]) -> Result<f64> {
    for i in 0..2 {
        finite("delta_t", delta_t[i])?;
        nonnegative("sigma_t", sigma_t[i])?;
    }
    let x = 2.0 * phase_variance_gaussian(delta_t, sigma_t);
    Ok(-0.5 * expm1(-x))
}

/// Averaged transition probability for Gaussian quadratures,
/// `p = ½(1 − exp(−8 Σ σ²/δ_i² sin²(δ_i t/2)))`.
pub fn p_gaussian(delta1_t: f64, delta2_t: f64, sigma_t: f64) -> Result<f64> {
    p_gaussian_tones([delta1_t, delta2_t], [sigma_t, sigma_t])
}

/// Argument `4Ωt·sin(δt/2)/(δt)` of the Bessel factor.
pub fn bessel_argument(omega_t: f64, delta_t: f64) -> f64 {
    4.0 * omega_t * sin_half_over(delta_t)
}

/// Fixed-amplitude, uniform-phase model with per-tone amplitudes.
pub fn p_bessel_tones(delta_t: [f64; 2], omega_t: [f64; 2]) -> Result<f64> {
    for i in 0..2 {
        finite("delta_t", delta_t[i])?;
        nonnegative("omega_t", omega_t[i])?;
    }
    let j = libm::j0(bessel_argument(omega_t[0], delta_t[0])) * libm::j0(bessel_argument(omega_t[1], delta_t[1]));
    Ok(0.5 * (1.0 - j))
}

/// `p = ½(1 − J₀(4Ω/δ₁ sin(δ₁t/2)) J₀(4Ω/δ₂ sin(δ₂t/2)))`.
pub fn p_bessel(delta1_t: f64, delta2_t: f64, omega_t: f64) -> Result<f64> {
    p_bessel_tones([delta1_t, delta2_t], [omega_t, omega_t])
}

/// Exact per-tone gain `tan(ω_i τ/2)·δ_i/ω_i` of a pulse plan, or 1 in the
/// effective convention.
pub fn tone_gains(signal: &TwoToneSignal, plan: &PulsePlan, convention: Convention) -> Result<[f64; 2]> {
    match convention {
        Convention::Effective => Ok([1.0, 1.0]),
        Convention::Physical => {
            let mut g = [0.0; 2];
            for (i, w) in signal.tones().into_iter().enumerate() {
                plan.check_spacing(w)?;
                g[i] = tan(w * plan.tau / 2.0) * plan.detuning_t(w) / (w * plan.total_time());
            }
            Ok(g)
        }
    }
}

/// Averaged transition probability of a two-tone signal under a pulse plan.
pub fn p_two_tone(signal: &TwoToneSignal, plan: &PulsePlan, convention: Convention) -> Result<f64> {
    signal.validate()?;
    plan.validate()?;
    let t = plan.total_time();
    let dt = plan.detunings_t(signal);
    let g = tone_gains(signal, plan, convention)?;
    let s = signal.amplitude.scale() * t;
    let amp = [g[0].abs() * s, g[1].abs() * s];
    match signal.amplitude {
        AmplitudeModel::GaussianIid { .. } => p_gaussian_tones(dt, amp),
        AmplitudeModel::FixedAmplitude { .. } => p_bessel_tones(dt, amp),
    }
}

/// Gaussian probability at mean detuning `δ_s t` and splitting `ω_r t`,
/// with the convention's fixed gain. Tone `i` sits at `δ_s ∓ ω_r`.
pub fn p_detuned(delta_s_t: f64, omega_r_t: f64, sigma_t: f64, convention: Convention) -> Result<f64> {
    let s = sigma_t * convention.gain();
    p_gaussian(delta_s_t - omega_r_t, delta_s_t + omega_r_t, s)
}
