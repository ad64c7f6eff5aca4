//! Two-tone signal, phase accumulation with and without π-pulse control.
//!
//! The signal Hamiltonian is
//! `H = Σ_i (A_i cos ω_i t + B_i sin ω_i t) σ_z / 2` with `ω_{1,2} = ω_s ± ω_r`.
//! A Ramsey probe accumulates the phase `φ = ∫ H(t) h(t) dt` where `h` is the
//! square wave generated by the π-pulses (`h ≡ 1` without control).

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, sin, tan};
use nalgebra::DMatrix;

use crate::error::{finite, positive, Error, Result};

/// Distribution of the four quadratures, redrawn every shot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum AmplitudeModel {
    /// `A_i, B_i ~ N(0, σ)` independently.
    GaussianIid { sigma: f64 },
    /// `A_i = Ω cos θ_i`, `B_i = Ω sin θ_i` with uniform phases.
    FixedAmplitude { omega_amp: f64 },
}

impl AmplitudeModel {
    /// Amplitude scale (σ or Ω).
    pub fn scale(&self) -> f64 {
        match *self {
            AmplitudeModel::GaussianIid { sigma } => sigma,
            AmplitudeModel::FixedAmplitude { omega_amp } => omega_amp,
        }
    }

    /// Same model with a different scale.
    pub fn with_scale(&self, s: f64) -> Self {
        match self {
            AmplitudeModel::GaussianIid { .. } => AmplitudeModel::GaussianIid { sigma: s },
            AmplitudeModel::FixedAmplitude { .. } => AmplitudeModel::FixedAmplitude { omega_amp: s },
        }
    }
}

/// Two tones at `ω_s ± ω_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoToneSignal {
    pub omega_s: f64,
    pub omega_r: f64,
    pub amplitude: AmplitudeModel,
}

impl TwoToneSignal {
    pub fn new(omega_s: f64, omega_r: f64, amplitude: AmplitudeModel) -> Result<Self> {
        let s = TwoToneSignal {
            omega_s,
            omega_r,
            amplitude,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn gaussian(omega_s: f64, omega_r: f64, sigma: f64) -> Result<Self> {
        Self::new(omega_s, omega_r, AmplitudeModel::GaussianIid { sigma })
    }

    pub fn validate(&self) -> Result<()> {
        positive("omega_s", self.omega_s)?;
        finite("omega_r", self.omega_r)?;
        if self.omega_r.abs() >= self.omega_s {
            return Err(Error::input("omega_r", "|omega_r| must be below omega_s"));
        }
        let s = self.amplitude.scale();
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::input("amplitude", "scale must be nonnegative and finite"));
        }
        Ok(())
    }

    /// `[ω_1, ω_2] = [ω_s + ω_r, ω_s − ω_r]`.
    pub fn tones(&self) -> [f64; 2] {
        [self.omega_s + self.omega_r, self.omega_s - self.omega_r]
    }

    pub fn with_omega_r(&self, omega_r: f64) -> Self {
        TwoToneSignal { omega_r, ..*self }
    }

    pub fn with_omega_s(&self, omega_s: f64) -> Self {
        TwoToneSignal { omega_s, ..*self }
    }

    pub fn with_scale(&self, s: f64) -> Self {
        TwoToneSignal {
            amplitude: self.amplitude.with_scale(s),
            ..*self
        }
    }
}

/// One draw of the quadratures `(A_1, B_1, A_2, B_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quadratures {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Quadratures {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Self {
        Quadratures { a1, b1, a2, b2 }
    }

    /// `(A_i, B_i)` of tone `i ∈ {0, 1}`.
    pub fn tone(&self, i: usize) -> (f64, f64) {
        if i == 0 {
            (self.a1, self.b1)
        } else {
            (self.a2, self.b2)
        }
    }

    pub fn swapped(&self) -> Self {
        Quadratures::new(self.a2, self.b2, self.a1, self.b1)
    }

    pub fn negated(&self) -> Self {
        Quadratures::new(-self.a1, -self.b1, -self.a2, -self.b2)
    }
}

/// Equally spaced π-pulses: spacing `tau`, `n_pulses` intervals, total
/// time `t = n_pulses · tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulsePlan {
    pub tau: f64,
    pub n_pulses: u32,
}

/// Relative tolerance for `ωτ` hitting an odd multiple of π.
pub const SINGULAR_SPACING_TOL: f64 = 1e-6;

impl PulsePlan {
    pub fn new(tau: f64, n_pulses: u32) -> Result<Self> {
        let p = PulsePlan { tau, n_pulses };
        p.validate()?;
        Ok(p)
    }

    /// Plan whose total time is `n_pulses · tau` and whose mean detuning
    /// from `omega_s` satisfies `δ_s t = delta_s_t`.
    ///
    /// From `δ_s = π/τ − ω_s` and `t = nτ`: `τ = (nπ − δ_s t)/(n ω_s)`.
    pub fn with_detuning(omega_s: f64, delta_s_t: f64, n_pulses: u32) -> Result<Self> {
        positive("omega_s", omega_s)?;
        finite("delta_s_t", delta_s_t)?;
        if n_pulses == 0 {
            return Err(Error::input("n_pulses", "must be at least 1"));
        }
        let n = n_pulses as f64;
        let tau = (n * PI - delta_s_t) / (n * omega_s);
        Self::new(tau, n_pulses)
    }

    pub fn validate(&self) -> Result<()> {
        positive("tau", self.tau)?;
        if self.n_pulses == 0 {
            return Err(Error::input("n_pulses", "must be at least 1"));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.n_pulses as f64 * self.tau
    }

    /// Pulse angular frequency `π/τ`.
    pub fn pulse_frequency(&self) -> f64 {
        PI / self.tau
    }

    /// `δ = π/τ − ω`.
    pub fn detuning(&self, omega: f64) -> f64 {
        PI / self.tau - omega
    }

    /// `δ t` evaluated as `nπ − ω t`, which keeps its accuracy when
    /// `ω t` is large.
    pub fn detuning_t(&self, omega: f64) -> f64 {
        self.n_pulses as f64 * PI - omega * self.total_time()
    }

    /// Per-tone `[δ_1 t, δ_2 t]`.
    pub fn detunings_t(&self, signal: &TwoToneSignal) -> [f64; 2] {
        let [w1, w2] = signal.tones();
        [self.detuning_t(w1), self.detuning_t(w2)]
    }

    /// `δ_s t` with `δ_s = (δ_1 + δ_2)/2`.
    pub fn delta_s_t(&self, omega_s: f64) -> f64 {
        self.detuning_t(omega_s)
    }

    /// Errors if `ωτ` sits on an odd multiple of π.
    pub fn check_spacing(&self, omega: f64) -> Result<()> {
        let x = omega * self.tau;
        let k = libm::round((x / PI - 1.0) / 2.0);
        let odd = (2.0 * k + 1.0) * PI;
        if (x - odd).abs() < SINGULAR_SPACING_TOL * PI {
            Err(Error::SingularSpacing { omega_tau: x })
        } else {
            Ok(())
        }
    }

    /// Square-wave sign `h(t)`: +1 on `[0, τ)`, −1 on `[τ, 2τ)`, ...
    pub fn h(&self, t: f64) -> f64 {
        let k = libm::floor(t / self.tau) as i64;
        if k % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Phase accumulated without control over `[0, t]`.
pub fn accumulated_phase_free(q: &Quadratures, signal: &TwoToneSignal, t: f64) -> Result<f64> {
    positive("t", t)?;
    signal.validate()?;
    let mut phi = 0.0;
    for (i, w) in signal.tones().into_iter().enumerate() {
        let (a, b) = q.tone(i);
        phi += free_tone_phase(a, b, w, t);
    }
    Ok(phi)
}

/// `∫_0^t (a cos ωs + b sin ωs) ds`.
pub(crate) fn free_tone_phase(a: f64, b: f64, omega: f64, t: f64) -> f64 {
    let x = omega * t;
    if x.abs() < 1e-8 {
        // sin x / ω → t, (1 − cos x)/ω → ω t²/2
        return a * t + b * omega * t * t / 2.0;
    }
    let half = sin(x / 2.0);
    a * sin(x) / omega + b * 2.0 * half * half / omega
}

/// Phase from a single quadrature pair under the pulse train, for the
/// Hamiltonian `A sin ωt + B cos ωt`:
/// `φ = [A sin δt + B (1 − cos δt)] tan(ωτ/2)/ω`.
pub fn accumulated_phase_pulsed(ab: (f64, f64), omega: f64, plan: &PulsePlan) -> Result<f64> {
    plan.validate()?;
    positive("omega", omega)?;
    plan.check_spacing(omega)?;
    let (a, b) = ab;
    let dt = plan.detuning_t(omega);
    let g = tan(omega * plan.tau / 2.0) / omega;
    let half = sin(dt / 2.0);
    Ok((a * sin(dt) + b * 2.0 * half * half) * g)
}

/// Two-tone phase under the pulse train.
///
/// Each tone contributes `∫ (a cos ω_i s + b sin ω_i s) h(s) ds`, which is
/// [`accumulated_phase_pulsed`] with the pair passed as `(b, a)`.
pub fn two_tone_phase_pulsed(q: &Quadratures, signal: &TwoToneSignal, plan: &PulsePlan) -> Result<f64> {
    signal.validate()?;
    let mut phi = 0.0;
    for (i, w) in signal.tones().into_iter().enumerate() {
        let (a, b) = q.tone(i);
        phi += accumulated_phase_pulsed((b, a), w, plan)?;
    }
    Ok(phi)
}

/// Amplitude prefactor `tan(ωτ/2)·δ/ω` picked up under the pulse train.
pub fn effective_prefactor(omega: f64, tau: f64) -> Result<f64> {
    positive("omega", omega)?;
    positive("tau", tau)?;
    let plan = PulsePlan { tau, n_pulses: 1 };
    plan.check_spacing(omega)?;
    let delta = plan.detuning(omega);
    Ok(tan(omega * tau / 2.0) * delta / omega)
}

/// Parameters of the near-degenerate expansion
/// `f(t) = a sin(ω_s t + α) + b ω_r t sin(ω_s t + β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateParams {
    pub omega_s: f64,
    pub omega_r: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl DegenerateParams {
    /// `∂f/∂(ω_s, ω_r, a, b, α, β)` at time `t`.
    pub fn gradient(&self, t: f64) -> [f64; 6] {
        let DegenerateParams {
            omega_s,
            omega_r,
            a,
            b,
            alpha,
            beta,
        } = *self;
        let (sa, ca) = (sin(omega_s * t + alpha), cos(omega_s * t + alpha));
        let (sb, cb) = (sin(omega_s * t + beta), cos(omega_s * t + beta));
        [
            a * t * ca + b * omega_r * t * t * cb,
            b * t * sb,
            sa,
            omega_r * t * sb,
            a * ca,
            b * omega_r * t * cb,
        ]
    }
}

/// Numerical rank of `span{∇f(t_k)}`: singular values above
/// `1e-10 × largest` are counted.
pub fn gradient_span_rank(params: &DegenerateParams, times: &[f64]) -> Result<usize> {
    if times.len() < 6 {
        return Err(Error::input("times", "need at least 6 sample times"));
    }
    let cols: Vec<f64> = times.iter().flat_map(|&t| params.gradient(t)).collect();
    let m = DMatrix::from_column_slice(6, times.len(), &cols);
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > 1e-10 * top).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Piecewise Simpson integration of the sign-flipped integrand.
    fn brute_pulsed(a: f64, b: f64, omega: f64, plan: &PulsePlan) -> f64 {
        let steps = 4000;
        let mut total = 0.0;
        for k in 0..plan.n_pulses {
            let t0 = k as f64 * plan.tau;
            let h = plan.tau / steps as f64;
            let f = |s: f64| a * cos(omega * s) + b * sin(omega * s);
            let mut acc = f(t0) + f(t0 + plan.tau);
            for j in 1..steps {
                let w = if j % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(t0 + j as f64 * h);
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * acc * h / 3.0;
        }
        total
    }

    #[test]
    fn free_phase_vanishes_on_full_period() {
        let s = TwoToneSignal::gaussian(2.0 * PI, 0.0, 1.0).unwrap();
        let q = Quadratures::new(0.3, -1.2, 0.8, 0.1);
        assert!(accumulated_phase_free(&q, &s, 1.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn free_phase_first_order_in_omega_r() {
        let s = TwoToneSignal::gaussian(2.0 * PI, 0.01, 1.0).unwrap();
        let q = Quadratures::new(1.0, 0.0, -1.0, 0.0);
        let phi = accumulated_phase_free(&q, &s, 1.0).unwrap();
        let first = 2.0 * 0.01 / (2.0 * PI);
        assert_relative_eq!(phi, first, max_relative = 1e-4);
    }

    #[test]
    fn free_phase_even_in_omega_r_for_equal_quadratures() {
        let q = Quadratures::new(0.4, 0.9, 0.4, 0.9);
        let p = TwoToneSignal::gaussian(3.0, 0.2, 1.0).unwrap();
        let m = p.with_omega_r(-0.2);
        let a = accumulated_phase_free(&q, &p, 1.7).unwrap();
        let b = accumulated_phase_free(&q, &m, 1.7).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-15);
    }

    #[test]
    fn pulsed_phase_matches_piecewise_integration() {
        for &(a, b, omega, tau, n) in &[
            (0.7, -1.3, 10.0, 0.29, 7u32),
            (1.0, 0.5, 31.0, 0.1, 10),
            (-0.2, 2.0, 3.0, 0.9, 3),
        ] {
            let plan = PulsePlan::new(tau, n).unwrap();
            let phi = accumulated_phase_pulsed((b, a), omega, &plan).unwrap();
            assert!((phi - brute_pulsed(a, b, omega, &plan)).abs() < 1e-9);
        }
    }

    #[test]
    fn pulsed_phase_zero_on_resonance() {
        // δt = 2π
        let plan = PulsePlan::with_detuning(50.0, 2.0 * PI, 20).unwrap();
        let phi = accumulated_phase_pulsed((1.3, -0.4), 50.0, &plan).unwrap();
        assert!(phi.abs() < 1e-12);
    }

    #[test]
    fn pulsed_phase_zero_when_signal_completes_cycles() {
        // ωτ = 2π
        let plan = PulsePlan::new(1.0, 5).unwrap();
        let phi = accumulated_phase_pulsed((1.0, 1.0), 2.0 * PI, &plan).unwrap();
        assert!(phi.abs() < 1e-12);
    }

    #[test]
    fn singular_spacing_rejected() {
        let plan = PulsePlan::new(1.0, 4).unwrap();
        assert!(matches!(
            accumulated_phase_pulsed((1.0, 0.0), 3.0 * PI, &plan),
            Err(Error::SingularSpacing { .. })
        ));
        assert!(effective_prefactor(PI, 1.0).is_err());
    }

    #[test]
    fn prefactor_limits() {
        // δ/ω = 0.01
        let omega = 100.0;
        let tau = PI / (omega * 1.01);
        let g = effective_prefactor(omega, tau).unwrap();
        assert_relative_eq!(g, 2.0 / PI, max_relative = 0.01);
        // δ ≫ ω
        let g = effective_prefactor(1e-4, PI / 1.0).unwrap();
        assert_relative_eq!(g, PI / 2.0, max_relative = 1e-3);
        assert!(effective_prefactor(2.0 * PI, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn prefactor_monotone_towards_two_over_pi() {
        let omega = 1.0;
        let mut last = f64::INFINITY;
        for k in 0..20 {
            let r = 0.1 * libm::pow(10.0, -(k as f64) / 20.0);
            let g = effective_prefactor(omega, PI / (omega * (1.0 + r))).unwrap();
            let gap = (g - 2.0 / PI).abs();
            assert!(gap < last);
            last = gap;
        }
    }

    #[test]
    fn tone_exchange_symmetry() {
        let s = TwoToneSignal::gaussian(40.0, 0.3, 1.0).unwrap();
        let plan = PulsePlan::with_detuning(40.0, 5.0, 15).unwrap();
        let q = Quadratures::new(0.2, -0.7, 1.1, 0.5);
        let a = two_tone_phase_pulsed(&q, &s, &plan).unwrap();
        let b = two_tone_phase_pulsed(&q.swapped(), &s.with_omega_r(-0.3), &plan).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_rank() {
        let times: Vec<f64> = (0..24).map(|k| 0.37 * k as f64).collect();
        let mut p = DegenerateParams {
            omega_s: 3.0,
            omega_r: 0.05,
            a: 1.0,
            b: 0.8,
            alpha: 0.3,
            beta: 1.1,
        };
        assert_eq!(gradient_span_rank(&p, &times).unwrap(), 5);
        p.omega_r = 0.0;
        assert_eq!(gradient_span_rank(&p, &times).unwrap(), 4);
        p.b = 0.0;
        assert!(gradient_span_rank(&p, &times).unwrap() <= 4);
        assert!(gradient_span_rank(&p, &times[..5]).is_err());
    }
}
