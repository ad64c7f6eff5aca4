use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use super::likelihood::{batch_probability, log_likelihood_at, Param, Theta};
use crate::error::{Error, Result};
use crate::montecarlo::ShotBatch;
use crate::optimize::golden_section;

/// Grid size of the coarse 1-D search.
pub const GRID_POINTS: usize = 512;

/// Result of a fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateReport {
    pub params: Vec<Param>,
    pub estimates: Vec<f64>,
    /// `1/√(expected information)` at the estimate; NaN where the
    /// information is singular.
    pub std_errors: Vec<f64>,
    pub log_likelihood: f64,
    /// The optimum sits on a bound or the likelihood is flat.
    pub at_boundary: bool,
    /// Filled in by replicate studies.
    pub rmse: Option<Vec<f64>>,
}

impl EstimateReport {
    pub fn get(&self, p: Param) -> Option<f64> {
        self.params.iter().position(|&q| q == p).map(|i| self.estimates[i])
    }
}

/// Expected information about `ω_r` in one batch at `theta`.
pub(crate) fn batch_information_r(batch: &ShotBatch, theta: &Theta) -> Option<f64> {
    let r = theta.omega_r;
    let h = (r.abs() * 1e-3).max(1e-9);
    let at = |v: f64| {
        let mut t = *theta;
        t.omega_r = v;
        batch_probability(batch, &t)
    };
    let p = at(r).ok()?;
    let dp = if r - h < 0.0 {
        // one-sided at the boundary; p is even in ω_r
        (at(r + h).ok()? - at((r - h).abs()).ok()?) / (2.0 * h)
    } else {
        (at(r + h).ok()? - at(r - h).ok()?) / (2.0 * h)
    };
    if p <= 0.0 || p >= 1.0 {
        return None;
    }
    Some(batch.n_shots as f64 * dp * dp / (p * (1.0 - p)))
}

/// MLE of `ω_r ∈ [lower, upper]` from one batch with `ω_s` and `σ` taken
/// from the batch settings.
///
/// A 512-point log-spaced grid (plus `lower`) locates the best cell, then
/// golden-section search refines it to relative `1e-6`.
pub fn mle_1d(batch: &ShotBatch, lower: f64, upper: f64) -> Result<EstimateReport> {
    if !(lower >= 0.0 && upper > lower && upper.is_finite()) {
        return Err(Error::input("bounds", "need 0 ≤ lower < upper < ∞"));
    }
    let base = Theta::of(&batch.settings.signal);
    let ll = |r: f64| -> f64 {
        let mut t = base;
        t.omega_r = r;
        log_likelihood_at(core::slice::from_ref(batch), &t).unwrap_or(f64::NEG_INFINITY)
    };

    let lo_grid = lower.max(upper * 1e-6);
    let ratio = upper / lo_grid;
    let mut grid: Vec<f64> = Vec::with_capacity(GRID_POINTS + 1);
    if lower < lo_grid {
        grid.push(lower);
    }
    for k in 0..GRID_POINTS {
        grid.push(lo_grid * libm::pow(ratio, k as f64 / (GRID_POINTS - 1) as f64));
    }
    let vals: Vec<f64> = grid.iter().map(|&r| ll(r)).collect();
    let (best, _) = vals.iter().enumerate().fold(
        (0usize, f64::NEG_INFINITY),
        |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
    );
    let vmax = vals[best];
    let vmin = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let flat = (vmax - vmin).abs() <= 1e-9 * vmax.abs().max(1.0);

    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let (mut r, mut v) = golden_section(|x| -ll(x), a, b, 1e-6, upper * 1e-9);
    v = -v;
    if vmax >= v {
        r = grid[best];
        v = vmax;
    }
    let span = upper - lower;
    let at_boundary = flat || (r - lower) <= 1e-9 * span || (upper - r) <= 1e-9 * span;
    if flat {
        r = lower;
        v = ll(lower);
    }
    let mut theta = base;
    theta.omega_r = r;
    let se = batch_information_r(batch, &theta)
        .map(|i| 1.0 / sqrt(i))
        .unwrap_or(f64::NAN);
    Ok(EstimateReport {
        params: vec![Param::OmegaR],
        estimates: vec![r],
        std_errors: vec![se],
        log_likelihood: v,
        at_boundary,
        rmse: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::Convention;
    use crate::montecarlo::{simulate_batch, BatchSettings};
    use crate::signal::{PulsePlan, TwoToneSignal};
    use core::f64::consts::PI;

    fn settings(omega_r: f64, delta_s_t: f64) -> BatchSettings {
        let n = 2000;
        let omega_s = n as f64 * PI - 2.0 * PI;
        let plan = PulsePlan::with_detuning(omega_s, delta_s_t, n).unwrap();
        BatchSettings::pulsed(
            TwoToneSignal::gaussian(omega_s, omega_r, 5.0).unwrap(),
            plan,
            Convention::Physical,
        )
    }

    #[test]
    fn zero_counts_hit_the_lower_bound() {
        let b = simulate_batch(&settings(0.0, 2.0 * PI), 100_000, 4).unwrap();
        assert_eq!(b.n_ones, 0);
        let r = mle_1d(&b, 0.0, 0.5).unwrap();
        assert_eq!(r.estimates[0], 0.0);
        assert!(r.at_boundary);
    }

    #[test]
    fn resonant_estimate_close_to_truth() {
        let b = simulate_batch(&settings(0.01, 2.0 * PI), 1_000_000, 5).unwrap();
        let r = mle_1d(&b, 0.0, 0.5).unwrap();
        assert!((r.estimates[0] - 0.01).abs() < 4.0 * r.std_errors[0], "{r:?}");
        assert!(!r.at_boundary);
    }

    #[test]
    fn deterministic() {
        let b = simulate_batch(&settings(0.01, 2.0 * PI), 200_000, 6).unwrap();
        assert_eq!(mle_1d(&b, 0.0, 0.5).unwrap(), mle_1d(&b, 0.0, 0.5).unwrap());
    }

    #[test]
    fn bad_bounds_rejected() {
        let b = simulate_batch(&settings(0.01, 2.0 * PI), 10, 6).unwrap();
        assert!(mle_1d(&b, 0.5, 0.1).is_err());
        assert!(mle_1d(&b, -1.0, 0.1).is_err());
    }
}
