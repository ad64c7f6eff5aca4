use alloc::vec::Vec;

use libm::log;

use crate::error::{Error, Result};
use crate::montecarlo::{analytic_probability, ShotBatch};
use crate::signal::TwoToneSignal;

/// Probabilities are clamped to `[P_CLAMP, 1 − P_CLAMP]` inside logs.
pub const P_CLAMP: f64 = 1e-12;

/// Signal parameters an estimator can fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Param {
    OmegaR,
    OmegaS,
    Sigma,
}

/// A full parameter point `(ω_r, ω_s, σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Theta {
    pub omega_r: f64,
    pub omega_s: f64,
    pub sigma: f64,
}

impl Theta {
    pub fn of(signal: &TwoToneSignal) -> Self {
        Theta {
            omega_r: signal.omega_r,
            omega_s: signal.omega_s,
            sigma: signal.amplitude.scale(),
        }
    }

    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::OmegaR => self.omega_r,
            Param::OmegaS => self.omega_s,
            Param::Sigma => self.sigma,
        }
    }

    pub fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::OmegaR => self.omega_r = v,
            Param::OmegaS => self.omega_s = v,
            Param::Sigma => self.sigma = v,
        }
    }

    /// `signal` with this point's parameters (amplitude model kept).
    pub fn apply(&self, signal: &TwoToneSignal) -> TwoToneSignal {
        TwoToneSignal {
            omega_s: self.omega_s,
            omega_r: self.omega_r,
            amplitude: signal.amplitude.with_scale(self.sigma),
        }
    }
}

/// Free parameters with box bounds plus fixed values for the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodModel {
    pub free: Vec<Param>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub fixed: Theta,
}

impl LikelihoodModel {
    pub fn new(free: Vec<Param>, lower: Vec<f64>, upper: Vec<f64>, fixed: Theta) -> Result<Self> {
        if free.len() != lower.len() || free.len() != upper.len() {
            return Err(Error::input(
                "bounds",
                "one lower and one upper bound per free parameter",
            ));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::input("bounds", "lower bound above upper bound"));
        }
        Ok(LikelihoodModel {
            free,
            lower,
            upper,
            fixed,
        })
    }

    pub fn theta(&self, x: &[f64]) -> Theta {
        let mut t = self.fixed;
        for (p, &v) in self.free.iter().zip(x) {
            t.set(*p, v);
        }
        t
    }

    /// Model probability of a batch's outcome at `theta`.
    pub fn probability(&self, batch: &ShotBatch, theta: &Theta) -> Result<f64> {
        batch_probability(batch, theta)
    }
}

/// Closed-form probability of `batch`'s settings with the signal replaced
/// by `theta`.
pub fn batch_probability(batch: &ShotBatch, theta: &Theta) -> Result<f64> {
    let mut s = batch.settings;
    s.signal = theta.apply(&s.signal);
    analytic_probability(&s)
}

/// Binomial log-likelihood of one count.
pub fn binomial_loglik(n_ones: f64, n_shots: f64, p: f64) -> f64 {
    let p = p.clamp(P_CLAMP, 1.0 - P_CLAMP);
    let mut v = 0.0;
    if n_ones > 0.0 {
        v += n_ones * log(p);
    }
    if n_shots > n_ones {
        v += (n_shots - n_ones) * libm::log1p(-p);
    }
    v
}

/// `Σ_b [n_b log p_b + (N_b − n_b) log(1 − p_b)]` at a full parameter point.
pub fn log_likelihood_at(batches: &[ShotBatch], theta: &Theta) -> Result<f64> {
    if batches.is_empty() {
        return Err(Error::input("batches", "need at least one batch"));
    }
    let mut v = 0.0;
    for b in batches {
        let p = batch_probability(b, theta)?;
        v += binomial_loglik(b.n_ones as f64, b.n_shots as f64, p);
    }
    Ok(v)
}

/// Log-likelihood at the model's free-parameter vector `x`.
pub fn log_likelihood(batches: &[ShotBatch], model: &LikelihoodModel, x: &[f64]) -> Result<f64> {
    log_likelihood_at(batches, &model.theta(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::Convention;
    use crate::montecarlo::BatchSettings;
    use crate::signal::PulsePlan;
    use approx::assert_relative_eq;

    fn batch(n_ones: u64) -> ShotBatch {
        let plan = PulsePlan::with_detuning(60.0, 5.0, 20).unwrap();
        let s = TwoToneSignal::gaussian(60.0, 0.2, 1.0).unwrap();
        ShotBatch::new(1000, n_ones, BatchSettings::pulsed(s, plan, Convention::Physical)).unwrap()
    }

    #[test]
    fn binomial_maximum_at_frequency() {
        let best = binomial_loglik(30.0, 100.0, 0.3);
        assert!(best > binomial_loglik(30.0, 100.0, 0.29));
        assert!(best > binomial_loglik(30.0, 100.0, 0.31));
        assert_eq!(binomial_loglik(0.0, 100.0, 0.0), 100.0 * libm::log1p(-P_CLAMP));
    }

    #[test]
    fn independent_batches_add() {
        let b = batch(123);
        let th = Theta::of(&b.settings.signal);
        let one = log_likelihood_at(&[b], &th).unwrap();
        let two = log_likelihood_at(&[b, b], &th).unwrap();
        assert_relative_eq!(two, 2.0 * one, max_relative = 1e-15);
        assert!(log_likelihood_at(&[], &th).is_err());
    }
}
