use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use libm::{log, sqrt};
use rand_distr::{Binomial, Distribution};

use super::likelihood::binomial_loglik;
use crate::analytics::{p_detuned, Convention};
use crate::error::{positive, Error, Result};
use crate::montecarlo::RunSeed;
use crate::optimize::{nelder_mead, NelderMead};
use crate::signal::TwoToneSignal;

/// One point of a pulse-frequency scan.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanPoint {
    /// Pulse frequency `π/τ`.
    pub omega_p: f64,
    /// Observed transition frequency.
    pub p_hat: f64,
    /// Shots behind `p_hat`.
    pub weight: f64,
}

/// Rough `(ω_s, σ, ω_r)` from a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanFit {
    pub omega_s: f64,
    pub sigma: f64,
    pub omega_r: f64,
    pub log_likelihood: f64,
}

/// Scan model: Gaussian probability at `δ_s = ω_p − ω_s` with the
/// convention's fixed gain.
pub fn scan_probability(omega_p: f64, t: f64, omega_s: f64, sigma: f64, omega_r: f64, convention: Convention) -> f64 {
    p_detuned((omega_p - omega_s) * t, omega_r * t, sigma * t, convention).unwrap_or(f64::NAN)
}

/// Simulates a scan: the count at each pulse frequency is a binomial draw
/// from the scan model. `delta_grid` holds `δ_s t` values around the true
/// `ω_s`.
pub fn simulate_scan(
    truth: &TwoToneSignal,
    t: f64,
    delta_grid: &[f64],
    shots_per_point: u64,
    seed: u64,
    convention: Convention,
) -> Result<Vec<ScanPoint>> {
    truth.validate()?;
    positive("t", t)?;
    let sigma = truth.amplitude.scale();
    delta_grid
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let omega_p = truth.omega_s + d / t;
            let p = scan_probability(omega_p, t, truth.omega_s, sigma, truth.omega_r, convention);
            let mut rng = RunSeed::new(seed, k as u64).rng();
            let n = Binomial::new(shots_per_point, p.clamp(0.0, 1.0))
                .map_err(|_| Error::Numerical("invalid scan probability".into()))?
                .sample(&mut rng);
            Ok(ScanPoint {
                omega_p,
                p_hat: n as f64 / shots_per_point as f64,
                weight: shots_per_point as f64,
            })
        })
        .collect()
}

/// Maximum-likelihood fit of `(ω_s, σ, ω_r)` to a scan by Nelder–Mead from
/// eight starts; the best start wins.
///
/// Fails when the scan never dips (`min p̂ > 0.4`) or its contrast is below
/// five binomial standard errors.
pub fn fit_scan(points: &[ScanPoint], t: f64, convention: Convention) -> Result<ScanFit> {
    positive("t", t)?;
    if points.len() < 5 {
        return Err(Error::input("delta_grid", "need at least 5 scan points"));
    }
    let min_p = points.iter().map(|p| p.p_hat).fold(f64::INFINITY, f64::min);
    let max_p = points.iter().map(|p| p.p_hat).fold(f64::NEG_INFINITY, f64::max);
    if min_p > 0.4 {
        return Err(Error::ScanFailed(format!("no resonance dip: smallest p̂ = {min_p:.3}")));
    }
    let w_min = points.iter().map(|p| p.weight).fold(f64::INFINITY, f64::min);
    let se = sqrt(0.25 / w_min);
    if max_p - min_p < 5.0 * se {
        return Err(Error::ScanFailed(format!(
            "scan is flat: contrast {:.3e} below 5 standard errors",
            max_p - min_p
        )));
    }

    // The profile is even about ω_s, with its main lobe centred there.
    let peak = points
        .iter()
        .copied()
        .fold(points[0], |a, b| if b.p_hat > a.p_hat { b } else { a });
    let w0 = peak.omega_p;
    let g = convention.gain();
    let s0 = sqrt(-log((1.0 - 2.0 * peak.p_hat.min(0.49)).max(1e-12)) / 4.0) / (g * t);

    let nll = |x: &[f64]| -> f64 {
        let (ws, s, r) = (w0 + x[0] / t, x[1] / t, x[2] / t);
        let mut v = 0.0;
        for p in points {
            let q = scan_probability(p.omega_p, t, ws, s, r, convention);
            v -= binomial_loglik(p.p_hat * p.weight, p.weight, q);
        }
        v
    };

    let span = (points.iter().map(|p| p.omega_p).fold(f64::NEG_INFINITY, f64::max)
        - points.iter().map(|p| p.omega_p).fold(f64::INFINITY, f64::min))
        * t;
    let mut opts = NelderMead::unbounded(vec![0.2, 0.2 * s0 * t, 0.1]);
    opts.lower = vec![-span / 2.0, 1e-6, 0.0];
    opts.upper = vec![span / 2.0, 100.0 * s0 * t.max(1.0) + 10.0, core::f64::consts::PI];
    opts.x_tol = 1e-9;
    opts.f_tol = 1e-10;
    opts.max_evals = 6000;

    let starts: [[f64; 3]; 8] = [
        [0.0, s0 * t, 0.05],
        [0.0, s0 * t, 0.3],
        [0.0, s0 * t, 1.0],
        [0.0, 0.7 * s0 * t, 0.1],
        [0.0, 1.4 * s0 * t, 0.1],
        [0.3, s0 * t, 0.2],
        [-0.3, s0 * t, 0.2],
        [0.0, s0 * t, 2.0],
    ];
    let best = starts
        .iter()
        .map(|x0| {
            let m = nelder_mead(nll, x0, &opts);
            // restart once from the optimum to shake off a collapsed simplex
            nelder_mead(nll, &m.x, &opts)
        })
        .min_by(|a, b| a.f.total_cmp(&b.f))
        .ok_or_else(|| Error::Numerical("no scan start converged".into()))?;
    if !best.f.is_finite() {
        return Err(Error::Numerical("scan likelihood is not finite".into()));
    }
    Ok(ScanFit {
        omega_s: w0 + best.x[0] / t,
        sigma: best.x[1] / t,
        omega_r: best.x[2] / t,
        log_likelihood: -best.f,
    })
}

/// Simulates a scan of `truth` and fits it.
pub fn preliminary_scan(
    truth: &TwoToneSignal,
    t: f64,
    delta_grid: &[f64],
    shots_per_point: u64,
    seed: u64,
    convention: Convention,
) -> Result<ScanFit> {
    if shots_per_point < 1000 {
        return Err(Error::input("shots_per_point", "need at least 1000 shots per point"));
    }
    let pts = simulate_scan(truth, t, delta_grid, shots_per_point, seed, convention)?;
    fit_scan(&pts, t, convention)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn grid() -> Vec<f64> {
        (0..61).map(|k| -3.0 * PI + 6.0 * PI * k as f64 / 60.0).collect()
    }

    #[test]
    fn noise_free_scan_recovers_truth() {
        let truth = TwoToneSignal::gaussian(40.0 * PI, 0.01, 1.0).unwrap();
        let pts: Vec<ScanPoint> = grid()
            .into_iter()
            .map(|d| {
                let wp = truth.omega_s + d;
                ScanPoint {
                    omega_p: wp,
                    p_hat: scan_probability(wp, 1.0, truth.omega_s, 1.0, 0.01, Convention::Physical),
                    weight: 2e4,
                }
            })
            .collect();
        let fit = fit_scan(&pts, 1.0, Convention::Physical).unwrap();
        assert!((fit.omega_s - truth.omega_s).abs() < 1e-5, "{fit:?}");
        assert!((fit.sigma - 1.0).abs() < 1e-4, "{fit:?}");
    }

    #[test]
    fn far_grid_fails() {
        // σt large enough that everything off resonance saturates
        let truth = TwoToneSignal::gaussian(40.0 * PI, 0.01, 20.0).unwrap();
        let g: Vec<f64> = (0..20).map(|k| 0.5 + 0.05 * k as f64).collect();
        let r = preliminary_scan(&truth, 1.0, &g, 20_000, 3, Convention::Physical);
        assert!(matches!(r, Err(Error::ScanFailed(_))), "{r:?}");
    }
}
