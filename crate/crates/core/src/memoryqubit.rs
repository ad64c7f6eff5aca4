//! Sampling-based schemes with memory qubits: a Fourier-basis measurement
//! of a phase-encoded register, and single-memory correlation spectroscopy.
//!
//! The register holds `(1/√N) Σ_j e^{iφ_j}|j⟩` with `φ_j = τ H(t_j)`,
//! `t_j = jτ`, `τ = 2π/(nω_s)`, `N = n·m`. Without `ω_r` the phase is
//! periodic with period `n` samples, so the Fourier weight sits on indices
//! `≡ 0 mod m`; weight elsewhere signals two distinct frequencies.

use alloc::vec::Vec;

use libm::{cos, sin, sqrt};
use rand::Rng;

use crate::error::{positive, Error, Result};
use crate::montecarlo::{derive_seed, draw_quadratures, RunSeed};
use crate::signal::{Quadratures, TwoToneSignal};
use crate::C64;

use core::f64::consts::PI;

/// Largest register size.
pub const MAX_DIM: usize = 1 << 16;

/// Sampling grid of a register: `n` samples per signal period, `m` periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sampling {
    pub n: usize,
    pub m: usize,
}

impl Sampling {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::input("n", "need at least 3 samples per period"));
        }
        if m < 2 {
            return Err(Error::input("m", "need at least 2 periods"));
        }
        if n.checked_mul(m).map_or(true, |d| d > MAX_DIM) {
            return Err(Error::input("n·m", "register larger than 2^16"));
        }
        Ok(Sampling { n, m })
    }

    pub fn dim(&self) -> usize {
        self.n * self.m
    }

    pub fn tau(&self, omega_s: f64) -> f64 {
        2.0 * PI / (self.n as f64 * omega_s)
    }

    pub fn total_time(&self, omega_s: f64) -> f64 {
        self.m as f64 * 2.0 * PI / omega_s
    }
}

/// Normalized phase-encoded register.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub amplitudes: Vec<C64>,
    pub sampling: Sampling,
    pub tau: f64,
}

impl PhaseState {
    pub fn norm(&self) -> f64 {
        sqrt(self.amplitudes.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `T = τ N`.
    pub fn total_time(&self) -> f64 {
        self.tau * self.sampling.dim() as f64
    }
}

fn signal_value(q: &Quadratures, tones: [f64; 2], t: f64) -> f64 {
    let mut h = 0.0;
    for (i, w) in tones.into_iter().enumerate() {
        let (a, b) = q.tone(i);
        h += a * cos(w * t) + b * sin(w * t);
    }
    h
}

/// Encodes one quadrature draw into a register.
pub fn build_phase_state(q: &Quadratures, signal: &TwoToneSignal, sampling: Sampling) -> Result<PhaseState> {
    signal.validate()?;
    let sampling = Sampling::new(sampling.n, sampling.m)?;
    let tau = sampling.tau(signal.omega_s);
    let dim = sampling.dim();
    let norm = 1.0 / sqrt(dim as f64);
    let tones = signal.tones();
    let amplitudes = (0..dim)
        .map(|j| {
            let phi = tau * signal_value(q, tones, j as f64 * tau);
            C64::new(norm * cos(phi), norm * sin(phi))
        })
        .collect();
    Ok(PhaseState {
        amplitudes,
        sampling,
        tau,
    })
}

/// Outcome probabilities of a measurement in the Fourier basis:
/// `|(1/√N) Σ_j ψ_j e^{−2πijk/N}|²`.
#[cfg(feature = "std")]
pub fn dft_spectrum(state: &PhaseState) -> Vec<f64> {
    let dim = state.amplitudes.len();
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> = state
        .amplitudes
        .iter()
        .map(|z| rustfft::num_complex::Complex::new(z.re, z.im))
        .collect();
    rustfft::FftPlanner::new().plan_fft_forward(dim).process(&mut buf);
    buf.iter().map(|z| z.norm_sqr() / dim as f64).collect()
}

/// Outcome probabilities of a measurement in the Fourier basis (direct
/// O(N²) sum; enable `std` for the fast transform).
#[cfg(not(feature = "std"))]
pub fn dft_spectrum(state: &PhaseState) -> Vec<f64> {
    let dim = state.amplitudes.len();
    (0..dim)
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, z) in state.amplitudes.iter().enumerate() {
                let x = -2.0 * PI * ((j * k) % dim) as f64 / dim as f64;
                acc += z * C64::new(cos(x), sin(x));
            }
            acc.norm_sqr() / dim as f64
        })
        .collect()
}

/// Total weight of a spectrum off the harmonic indices `k ≡ 0 mod m`.
pub fn nonharmonic_probability(spectrum: &[f64], m: usize) -> f64 {
    spectrum
        .iter()
        .enumerate()
        .filter(|(k, _)| k % m != 0)
        .map(|(_, p)| p)
        .sum()
}

/// Same quantity straight from the state, without a transform and without
/// the cancellation in `1 − harmonic weight`.
///
/// The harmonic weight is `(1/m) Σ_r |Σ_q ψ_{r+qn}|²`, so the remainder is
/// the within-residue spread `Σ_r Σ_q |ψ_{r+qn} − mean_r|²`.
pub fn nonharmonic_probability_direct(state: &PhaseState) -> f64 {
    let Sampling { n, m } = state.sampling;
    let psi = &state.amplitudes;
    let mut total = 0.0;
    for r in 0..n {
        let mut mean = C64::new(0.0, 0.0);
        for q in 0..m {
            mean += psi[r + q * n];
        }
        mean /= m as f64;
        for q in 0..m {
            total += (psi[r + q * n] - mean).norm_sqr();
        }
    }
    total
}

/// Monte Carlo mean of the nonharmonic probability over `draws` quadrature
/// draws. Draw `k` uses its own seed, so the result is order-independent.
pub fn mean_nonharmonic_probability(signal: &TwoToneSignal, sampling: Sampling, draws: u64, seed: u64) -> Result<f64> {
    if draws == 0 {
        return Err(Error::input("draws", "need at least one draw"));
    }
    let mut sum = 0.0;
    for k in 0..draws {
        let mut rng = RunSeed::new(derive_seed(seed, 0, k), 0).rng();
        let q = draw_quadratures(&signal.amplitude, &mut rng);
        sum += nonharmonic_probability_direct(&build_phase_state(&q, signal, sampling)?);
    }
    Ok(sum / draws as f64)
}

/// Small-`ω_r` mean `(1/6) ω_r² T² (στ)²` for Gaussian quadratures.
pub fn qft_nonharmonic_closed(sigma: f64, tau: f64, total_time: f64, omega_r: f64) -> f64 {
    let x = omega_r * total_time * sigma * tau;
    x * x / 6.0
}

/// Information about `ω_r` at `ω_r = 0`: `(2/3)(στ)² T²`.
pub fn qft_fisher(sigma: f64, tau: f64, total_time: f64) -> f64 {
    2.0 / 3.0 * sigma * sigma * tau * tau * total_time * total_time
}

fn check_multiple(omega_s: f64, total_time: f64) -> Result<f64> {
    positive("omega_s", omega_s)?;
    positive("T", total_time)?;
    let k = total_time * omega_s / (2.0 * PI);
    if (k - libm::round(k)).abs() > 1e-9 * k.max(1.0) || libm::round(k) < 1.0 {
        return Err(Error::input("T", "must be an integer multiple of 2π/ω_s"));
    }
    Ok(k)
}

/// Mean correlation-scheme probability `2σ²τ²ω_r²T²` (Gaussian model).
pub fn correlation_probability(sigma: f64, tau: f64, total_time: f64, omega_s: f64, omega_r: f64) -> Result<f64> {
    check_multiple(omega_s, total_time)?;
    let x = sigma * tau * omega_r * total_time;
    Ok(2.0 * x * x)
}

/// Information about `ω_r` at `ω_r = 0`: `8(στ)²T²`.
pub fn correlation_fisher(sigma: f64, tau: f64, total_time: f64, omega_s: f64) -> Result<f64> {
    check_multiple(omega_s, total_time)?;
    Ok(8.0 * sigma * sigma * tau * tau * total_time * total_time)
}

/// One shot of the correlation scheme: the memory picks up `τH(0)`, then
/// `−τH(T)`; the readout flips with probability `sin²` of the difference.
pub fn correlation_shot_probability(q: &Quadratures, signal: &TwoToneSignal, tau: f64, total_time: f64) -> Result<f64> {
    signal.validate()?;
    positive("tau", tau)?;
    check_multiple(signal.omega_s, total_time)?;
    let tones = signal.tones();
    let d = tau * (signal_value(q, tones, total_time) - signal_value(q, tones, 0.0));
    let s = sin(d);
    Ok(s * s)
}

/// Monte Carlo mean of [`correlation_shot_probability`] over `draws`
/// quadrature draws.
pub fn mean_correlation_probability(
    signal: &TwoToneSignal,
    tau: f64,
    total_time: f64,
    draws: u64,
    seed: u64,
) -> Result<f64> {
    if draws == 0 {
        return Err(Error::input("draws", "need at least one draw"));
    }
    let mut rng = RunSeed::new(seed, 0).rng();
    let mut sum = 0.0;
    for _ in 0..draws {
        let q = draw_quadratures(&signal.amplitude, &mut rng);
        sum += correlation_shot_probability(&q, signal, tau, total_time)?;
    }
    Ok(sum / draws as f64)
}

/// Draws a random quadrature set (exposed for callers that sample their own
/// states).
pub fn draw<R: Rng + ?Sized>(signal: &TwoToneSignal, rng: &mut R) -> Quadratures {
    draw_quadratures(&signal.amplitude, rng)
}
