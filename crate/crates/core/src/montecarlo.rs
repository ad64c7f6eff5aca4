//! Seeded simulation of measurement records.
//!
//! A batch of `n` shots is cut into chunks of [`CHUNK_SHOTS`]; chunk `k`
//! draws from the ChaCha stream `k` of the master seed. Counts therefore do
//! not depend on how chunks are scheduled across threads.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, sin, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::analytics::{p_gaussian_tones, p_two_tone, Convention};
use crate::error::{nonnegative, positive, Error, Result};
use crate::signal::{
    accumulated_phase_free, two_tone_phase_pulsed, AmplitudeModel, PulsePlan, Quadratures, TwoToneSignal,
};
use crate::C64;

/// Shots per RNG stream.
pub const CHUNK_SHOTS: u64 = 1 << 16;

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunSeed {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RunSeed {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RunSeed {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.master_seed);
        r.set_stream(self.stream_index);
        r
    }
}

/// Mixes `(master, a, b)` into a fresh 64-bit seed (SplitMix64 finalizer).
/// Used to give every replicate of a study its own master seed.
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut z = master ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// How the probe is controlled during one shot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Control {
    /// Plain Ramsey evolution for time `t`.
    Free { t: f64 },
    /// π-pulse train.
    Pulsed(PulsePlan),
}

impl Control {
    pub fn total_time(&self) -> f64 {
        match self {
            Control::Free { t } => *t,
            Control::Pulsed(p) => p.total_time(),
        }
    }
}

/// Intra-shot Ornstein–Uhlenbeck drift of the quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OuParams {
    pub gamma: f64,
    pub sigma_n: f64,
}

impl OuParams {
    /// Stationary standard deviation `σ_n/√(2γ)`.
    pub fn stationary_std(&self) -> f64 {
        self.sigma_n / sqrt(2.0 * self.gamma)
    }
}

/// Noise sources applied on top of the shot-to-shot quadrature noise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct NoiseSpec {
    pub ou: Option<OuParams>,
    /// Probe dephasing rate κ.
    pub kappa: f64,
    /// Readout flip probability ε′.
    pub readout_eps: f64,
    /// Additive probability floor ε, applied as `p ↦ ε + (1 − ε)p`.
    pub floor_eps: f64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        nonnegative("kappa", self.kappa)?;
        if !(0.0..0.5).contains(&self.readout_eps) {
            return Err(Error::input("readout_eps", "must lie in [0, 0.5)"));
        }
        if !(0.0..0.5).contains(&self.floor_eps) {
            return Err(Error::input("floor_eps", "must lie in [0, 0.5)"));
        }
        if let Some(ou) = self.ou {
            positive("ou.gamma", ou.gamma)?;
            nonnegative("ou.sigma_n", ou.sigma_n)?;
        }
        Ok(())
    }

    /// Maps the noiseless transition probability through dephasing, the
    /// additive floor and readout errors. `cos2phi` is `⟨cos 2φ⟩`.
    pub fn apply(&self, cos2phi: f64, t: f64) -> f64 {
        let p = 0.5 * (1.0 - exp(-2.0 * self.kappa * t) * cos2phi);
        let p = self.floor_eps + (1.0 - self.floor_eps) * p;
        (1.0 - self.readout_eps) * p + self.readout_eps * (1.0 - p)
    }
}

/// Everything that defines the outcome distribution of one batch.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BatchSettings {
    pub signal: TwoToneSignal,
    pub control: Control,
    #[cfg_attr(feature = "serde", serde(default))]
    pub noise: NoiseSpec,
    pub convention: Convention,
}

impl BatchSettings {
    pub fn pulsed(signal: TwoToneSignal, plan: PulsePlan, convention: Convention) -> Self {
        BatchSettings {
            signal,
            control: Control::Pulsed(plan),
            noise: NoiseSpec::default(),
            convention,
        }
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.signal.validate()?;
        self.noise.validate()?;
        match self.control {
            Control::Free { t } => {
                positive("t", t)?;
            }
            Control::Pulsed(p) => {
                p.validate()?;
                for w in self.signal.tones() {
                    p.check_spacing(w)?;
                }
            }
        }
        Ok(())
    }
}

/// A measurement record: `n_ones` transitions out of `n_shots`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShotBatch {
    pub n_shots: u64,
    pub n_ones: u64,
    pub settings: BatchSettings,
}

impl ShotBatch {
    pub fn new(n_shots: u64, n_ones: u64, settings: BatchSettings) -> Result<Self> {
        if n_ones > n_shots {
            return Err(Error::input("n_ones", "cannot exceed n_shots"));
        }
        Ok(ShotBatch {
            n_shots,
            n_ones,
            settings,
        })
    }

    pub fn frequency(&self) -> f64 {
        self.n_ones as f64 / self.n_shots as f64
    }
}

/// Draws one set of quadratures.
pub fn draw_quadratures<R: Rng + ?Sized>(model: &AmplitudeModel, rng: &mut R) -> Quadratures {
    match *model {
        AmplitudeModel::GaussianIid { sigma } => {
            let mut n = || -> f64 { sigma * rng.sample::<f64, _>(StandardNormal) };
            Quadratures::new(n(), n(), n(), n())
        }
        AmplitudeModel::FixedAmplitude { omega_amp } => {
            let t1 = 2.0 * PI * rng.random::<f64>();
            let t2 = 2.0 * PI * rng.random::<f64>();
            Quadratures::new(
                omega_amp * cos(t1),
                omega_amp * sin(t1),
                omega_amp * cos(t2),
                omega_amp * sin(t2),
            )
        }
    }
}

/// Phase of one tone under the effective Hamiltonian
/// `a sin δs + b cos δs`, i.e. the pulsed phase with the prefactor removed.
fn effective_tone_phase(a: f64, b: f64, delta_t: f64, t: f64) -> f64 {
    if delta_t.abs() < 1e-8 {
        return b * t + a * delta_t * t / 2.0;
    }
    let h = sin(delta_t / 2.0);
    t * (b * sin(delta_t) + a * 2.0 * h * h) / delta_t
}

/// Static-quadrature phase of one shot.
pub fn shot_phase(q: &Quadratures, settings: &BatchSettings) -> Result<f64> {
    match (settings.control, settings.convention) {
        (Control::Free { t }, _) => accumulated_phase_free(q, &settings.signal, t),
        (Control::Pulsed(plan), Convention::Physical) => two_tone_phase_pulsed(q, &settings.signal, &plan),
        (Control::Pulsed(plan), Convention::Effective) => {
            let t = plan.total_time();
            let dt = plan.detunings_t(&settings.signal);
            Ok((0..2)
                .map(|i| {
                    let (a, b) = q.tone(i);
                    effective_tone_phase(a, b, dt[i], t)
                })
                .sum())
        }
    }
}

/// The phase is linear in the quadratures; these are its coefficients.
fn phase_weights(settings: &BatchSettings) -> Result<[f64; 4]> {
    let mut w = [0.0; 4];
    for (k, wk) in w.iter_mut().enumerate() {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        *wk = shot_phase(&Quadratures::new(e[0], e[1], e[2], e[3]), settings)?;
    }
    Ok(w)
}

/// Closed-form mean transition probability of a batch (no OU drift).
pub fn analytic_probability(settings: &BatchSettings) -> Result<f64> {
    settings.validate()?;
    if settings.noise.ou.is_some() {
        return Err(Error::input("noise.ou", "no closed form with intra-shot drift"));
    }
    let s = &settings.signal;
    let t = settings.control.total_time();
    let p0 = match settings.control {
        Control::Pulsed(plan) => p_two_tone(s, &plan, settings.convention)?,
        Control::Free { t } => {
            let [w1, w2] = s.tones();
            let a = s.amplitude.scale() * t;
            match s.amplitude {
                AmplitudeModel::GaussianIid { .. } => p_gaussian_tones([w1 * t, w2 * t], [a, a])?,
                AmplitudeModel::FixedAmplitude { .. } => crate::analytics::p_bessel_tones([w1 * t, w2 * t], [a, a])?,
            }
        }
    };
    Ok(settings.noise.apply(1.0 - 2.0 * p0, t))
}

/// Runs `n` shots on one stream and returns the number of transitions.
pub fn simulate_stream(settings: &BatchSettings, n: u64, seed: RunSeed) -> Result<u64> {
    settings.validate()?;
    let mut rng = seed.rng();
    let t = settings.control.total_time();
    let mut ones = 0u64;
    if let Some(ou) = settings.noise.ou {
        let dt = default_dt(settings.signal.omega_s);
        for _ in 0..n {
            let phi = simulate_ou_shot(
                &settings.signal,
                &ou,
                &settings.control,
                settings.convention,
                dt,
                &mut rng,
            )?;
            let p = settings.noise.apply(cos(2.0 * phi), t);
            if rng.random::<f64>() < p {
                ones += 1;
            }
        }
        return Ok(ones);
    }
    let w = phase_weights(settings)?;
    for _ in 0..n {
        let q = draw_quadratures(&settings.signal.amplitude, &mut rng);
        let phi = w[0] * q.a1 + w[1] * q.b1 + w[2] * q.a2 + w[3] * q.b2;
        let p = settings.noise.apply(cos(2.0 * phi), t);
        if rng.random::<f64>() < p {
            ones += 1;
        }
    }
    Ok(ones)
}

/// `(stream_index, shots)` for every chunk of an `n_shots` batch.
pub fn chunk_plan(n_shots: u64) -> Vec<(u64, u64)> {
    let full = n_shots / CHUNK_SHOTS;
    let rest = n_shots % CHUNK_SHOTS;
    let mut v: Vec<(u64, u64)> = (0..full).map(|k| (k, CHUNK_SHOTS)).collect();
    if rest > 0 {
        v.push((full, rest));
    }
    v
}

/// Simulates a full batch sequentially. See the module docs for how
/// streams are assigned.
pub fn simulate_batch(settings: &BatchSettings, n_shots: u64, master_seed: u64) -> Result<ShotBatch> {
    if n_shots == 0 {
        return Err(Error::input("n_shots", "must be at least 1"));
    }
    let mut ones = 0;
    for (k, n) in chunk_plan(n_shots) {
        ones += simulate_stream(settings, n, RunSeed::new(master_seed, k))?;
    }
    ShotBatch::new(n_shots, ones, *settings)
}

/// Draws the count of a batch directly from `Binomial(n, p̄)` with the
/// closed-form mean probability. Shots are i.i.d., so this has exactly the
/// distribution of [`simulate_batch`]'s count, at O(1) cost.
pub fn sample_batch_binomial(settings: &BatchSettings, n_shots: u64, seed: RunSeed) -> Result<ShotBatch> {
    let p = analytic_probability(settings)?;
    let mut rng = seed.rng();
    let ones = Binomial::new(n_shots, p.clamp(0.0, 1.0))
        .map_err(|_| Error::Numerical("binomial parameters out of range".into()))?
        .sample(&mut rng);
    ShotBatch::new(n_shots, ones, *settings)
}

/// Default OU step: 100 steps per signal period.
pub fn default_dt(omega_s: f64) -> f64 {
    2.0 * PI / omega_s / 100.0
}

/// Per-step weights for `∫_0^h g(u) e^{iωu} du` with `g` linear between
/// its end values: returns `(W0, W1)` so the integral is `g0 W0 + g1 W1`.
fn linear_weights(omega: f64, h: f64) -> (C64, C64) {
    let th = omega * h;
    let (i0, i1) = if th.abs() < 1e-3 {
        let z = C64::new(0.0, th);
        let i0 = C64::new(h, 0.0) * (C64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0);
        let i1 = C64::new(h * h, 0.0) * (C64::new(0.5, 0.0) + z / 3.0 + z * z / 8.0 + z * z * z / 30.0);
        (i0, i1)
    } else {
        let e = crate::polar(1.0, th);
        let iw = C64::new(0.0, omega);
        let i0 = (e - 1.0) / iw;
        let i1 = e * h / iw + (e - 1.0) / (omega * omega);
        (i0, i1)
    };
    (i0 - i1 / h, i1 / h)
}

/// One shot with OU-drifting quadratures started from their stationary
/// distribution. Returns the accumulated phase.
pub fn simulate_ou_shot<R: Rng + ?Sized>(
    signal: &TwoToneSignal,
    ou: &OuParams,
    control: &Control,
    convention: Convention,
    dt: f64,
    rng: &mut R,
) -> Result<f64> {
    positive("ou.gamma", ou.gamma)?;
    let s = ou.stationary_std();
    let mut n = || -> f64 { s * rng.sample::<f64, _>(StandardNormal) };
    let q0 = Quadratures::new(n(), n(), n(), n());
    Ok(ou_path(q0, signal, ou, control, convention, dt, rng)?.0)
}

/// Integrates the phase along one OU path started at `q0`. Returns the
/// phase and the quadratures at the final time.
///
/// Each step uses the exact OU transition; the integral treats the
/// amplitudes as linear within a step and the oscillation exactly, so a
/// frozen path (`σ_n = 0`, `γ → 0`) reproduces the static phase to rounding.
pub fn ou_path<R: Rng + ?Sized>(
    q0: Quadratures,
    signal: &TwoToneSignal,
    ou: &OuParams,
    control: &Control,
    convention: Convention,
    dt: f64,
    rng: &mut R,
) -> Result<(f64, Quadratures)> {
    signal.validate()?;
    nonnegative("ou.gamma", ou.gamma)?;
    nonnegative("ou.sigma_n", ou.sigma_n)?;
    positive("dt", dt)?;
    if dt > 2.0 * PI / signal.omega_s / 50.0 {
        return Err(Error::input("dt", "must be at most (2π/ω_s)/50"));
    }

    // Segments of constant sign and the frequencies integrated against.
    // Tone i contributes ∫(a_i cos ν_i s + b_i sin ν_i s)·h(s) ds; for the
    // effective picture ν_i = δ_i and the roles of (a, b) swap with a sign
    // on the sine part (a sin δs + b cos δs).
    let (seg_len, n_seg, freqs, effective) = match (*control, convention) {
        (Control::Free { t }, _) => (t, 1u32, signal.tones(), false),
        (Control::Pulsed(p), Convention::Physical) => {
            for w in signal.tones() {
                p.check_spacing(w)?;
            }
            (p.tau, p.n_pulses, signal.tones(), false)
        }
        (Control::Pulsed(p), Convention::Effective) => {
            let t = p.total_time();
            let d = p.detunings_t(signal);
            (t, 1u32, [d[0] / t, d[1] / t], true)
        }
    };
    let k = libm::ceil(seg_len / dt).max(1.0) as u64;
    let h = seg_len / k as f64;
    let weights = [linear_weights(freqs[0], h), linear_weights(freqs[1], h)];

    let decay = exp(-ou.gamma * h);
    let kick = if ou.gamma > 0.0 {
        ou.sigma_n * sqrt(-libm::expm1(-2.0 * ou.gamma * h) / (2.0 * ou.gamma))
    } else {
        ou.sigma_n * sqrt(h)
    };

    let mut q = [q0.a1, q0.b1, q0.a2, q0.b2];
    let mut phi = 0.0;
    for seg in 0..n_seg {
        let sign = if seg % 2 == 0 { 1.0 } else { -1.0 };
        let t_start = seg as f64 * seg_len;
        for step in 0..k {
            let t0 = t_start + step as f64 * h;
            let mut next = q;
            for v in next.iter_mut() {
                *v = *v * decay + kick * rng.sample::<f64, _>(StandardNormal);
            }
            for i in 0..2 {
                let (w0, w1) = weights[i];
                let rot = crate::polar(1.0, freqs[i] * t0);
                let (a0, b0, a1, b1) = (q[2 * i], q[2 * i + 1], next[2 * i], next[2 * i + 1]);
                // ∫ g e^{iνs}: Re → cos part, Im → sin part
                let ca = rot * (w0 * a0 + w1 * a1);
                let cb = rot * (w0 * b0 + w1 * b1);
                let contrib = if effective { ca.im + cb.re } else { ca.re + cb.im };
                phi += sign * contrib;
            }
            q = next;
        }
    }
    Ok((phi, Quadratures::new(q[0], q[1], q[2], q[3])))
}
