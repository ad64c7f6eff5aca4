use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;
use nalgebra::DMatrix;

use super::likelihood::{batch_probability, log_likelihood_at, Param, Theta};
use super::mle::EstimateReport;
use super::study::{replicate_seed, MIN_REPLICATES};
use crate::analytics::{optimal_detuning, Convention, Nuisance};
use crate::error::{Error, Result};
use crate::montecarlo::{sample_batch_binomial, BatchSettings, RunSeed, ShotBatch};
use crate::optimize::{nelder_mead, NelderMead};
use crate::signal::{PulsePlan, TwoToneSignal};

/// Parameter order used throughout this module.
pub const JOINT_PARAMS: [Param; 3] = [Param::OmegaR, Param::OmegaS, Param::Sigma];

/// The three measurement detunings `δ_s t`: resonance for `ω_r`, then the
/// maximizers of the `ω_s` and `σ` information.
pub fn multiparam_design(sigma_t: f64, omega_r_t: f64, convention: Convention) -> Result<[f64; 3]> {
    let (d_ws, _) = optimal_detuning(Nuisance::OmegaS, sigma_t, omega_r_t, convention)?;
    let (d_sig, _) = optimal_detuning(Nuisance::Sigma, sigma_t, omega_r_t, convention)?;
    Ok([2.0 * core::f64::consts::PI, d_ws, d_sig])
}

/// Batch settings for each detuning, all with `n_pulses` pulses.
pub fn design_settings(
    signal: &TwoToneSignal,
    detunings: &[f64],
    n_pulses: u32,
    convention: Convention,
) -> Result<Vec<BatchSettings>> {
    detunings
        .iter()
        .map(|&d| {
            let plan = PulsePlan::with_detuning(signal.omega_s, d, n_pulses)?;
            let s = BatchSettings::pulsed(*signal, plan, convention);
            s.validate()?;
            Ok(s)
        })
        .collect()
}

fn fd_steps(theta: &Theta, t: f64) -> [f64; 3] {
    [
        (theta.omega_r.abs() * 1e-3).max(1e-7 / t),
        1e-5 / t,
        (theta.sigma.abs() * 1e-5).max(1e-12),
    ]
}

fn grad_p(batch: &ShotBatch, theta: &Theta) -> Result<[f64; 3]> {
    let t = batch.settings.control.total_time();
    let h = fd_steps(theta, t);
    let mut g = [0.0; 3];
    for (k, p) in JOINT_PARAMS.iter().enumerate() {
        let v = theta.get(*p);
        let mut up = *theta;
        let mut dn = *theta;
        up.set(*p, v + h[k]);
        // p is even in ω_r, so reflect instead of stepping below zero
        dn.set(
            *p,
            if *p == Param::OmegaR {
                (v - h[k]).abs()
            } else {
                v - h[k]
            },
        );
        g[k] = (batch_probability(batch, &up)? - batch_probability(batch, &dn)?) / (2.0 * h[k]);
    }
    Ok(g)
}

/// Expected Fisher matrix `Σ_b N_b ∇p_b ∇p_bᵀ / (p_b(1−p_b))` over
/// `(ω_r, ω_s, σ)`.
pub fn fisher_matrix_batches(batches: &[ShotBatch], theta: &Theta) -> Result<DMatrix<f64>> {
    if batches.is_empty() {
        return Err(Error::input("batches", "need at least one batch"));
    }
    let mut f = DMatrix::zeros(3, 3);
    for b in batches {
        let p = batch_probability(b, theta)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Singular { p });
        }
        let g = grad_p(b, theta)?;
        let w = b.n_shots as f64 / (p * (1.0 - p));
        for i in 0..3 {
            for j in 0..3 {
                f[(i, j)] += w * g[i] * g[j];
            }
        }
    }
    Ok(f)
}

/// Inverse of the Fisher matrix, or an error when the settings cannot
/// identify all three parameters.
pub fn fisher_inverse(f: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    // compare eigenvalues after unit-diagonal scaling so units don't matter
    let d: Vec<f64> = (0..f.nrows()).map(|i| f[(i, i)]).collect();
    if d.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Numerical(
            "Fisher matrix is singular: a parameter carries no information".into(),
        ));
    }
    let scaled = DMatrix::from_fn(f.nrows(), f.ncols(), |i, j| f[(i, j)] / sqrt(d[i] * d[j]));
    let eig = scaled.clone().symmetric_eigen().eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if lo < 1e-9 {
        return Err(Error::Numerical(alloc::format!(
            "Fisher matrix is singular (scaled min eigenvalue {lo:.3e}); the settings do not identify all parameters"
        )));
    }
    let inv = scaled
        .try_inverse()
        .ok_or_else(|| Error::Numerical("Fisher matrix is singular".into()))?;
    Ok(DMatrix::from_fn(f.nrows(), f.ncols(), |i, j| {
        inv[(i, j)] / sqrt(d[i] * d[j])
    }))
}

/// Joint MLE of `(ω_r, ω_s, σ)` from batches at different detunings.
///
/// Bounded Nelder–Mead in coordinates scaled by the Cramér–Rao errors at
/// `guess`, restarted from a few `ω_r` values. `lower`/`upper` are in
/// parameter order `(ω_r, ω_s, σ)`; `lower[0]` must be ≥ 0.
pub fn mle_multiparam(
    batches: &[ShotBatch],
    guess: &Theta,
    lower: [f64; 3],
    upper: [f64; 3],
) -> Result<EstimateReport> {
    if batches.len() < 3 {
        return Err(Error::input("batches", "need at least three batches"));
    }
    if !(lower[0] >= 0.0) || lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
        return Err(Error::input("bounds", "need 0 ≤ lower < upper for each parameter"));
    }
    // information is computed where ω_r is nonzero so its diagonal is usable
    let mut probe = *guess;
    if probe.omega_r <= 0.0 {
        probe.omega_r = 0.5 * (lower[0] + upper[0]).min(upper[0] * 0.1);
    }
    let finv = fisher_inverse(&fisher_matrix_batches(batches, &probe)?)?;
    let scale: Vec<f64> = (0..3).map(|k| sqrt(finv[(k, k)])).collect();
    let origin = [guess.omega_r, guess.omega_s, guess.sigma];

    let to_theta = |x: &[f64]| -> Theta {
        let mut t = *guess;
        for k in 0..3 {
            t.set(JOINT_PARAMS[k], origin[k] + scale[k] * x[k]);
        }
        t
    };
    let nll = |x: &[f64]| -> f64 { -log_likelihood_at(batches, &to_theta(x)).unwrap_or(f64::NEG_INFINITY) };

    let mut opts = NelderMead::unbounded(vec![1.0; 3]);
    opts.lower = (0..3).map(|k| (lower[k] - origin[k]) / scale[k]).collect();
    opts.upper = (0..3).map(|k| (upper[k] - origin[k]) / scale[k]).collect();
    opts.f_tol = 1e-9;
    opts.x_tol = 1e-6;
    opts.max_evals = 3000;

    let r_starts = [
        origin[0],
        origin[0] + 2.0 * scale[0],
        (origin[0] - 2.0 * scale[0]).max(lower[0]),
    ];
    let best = r_starts
        .iter()
        .map(|&r0| {
            let x0 = [(r0 - origin[0]) / scale[0], 0.0, 0.0];
            let m = nelder_mead(nll, &x0, &opts);
            nelder_mead(nll, &m.x, &opts)
        })
        .min_by(|a, b| a.f.total_cmp(&b.f))
        .ok_or_else(|| Error::Numerical("no start converged".into()))?;
    let th = to_theta(&best.x);
    let est: Vec<f64> = JOINT_PARAMS.iter().map(|p| th.get(*p)).collect();
    let at_boundary = (0..3).any(|k| {
        let span = upper[k] - lower[k];
        (est[k] - lower[k]) <= 1e-9 * span || (upper[k] - est[k]) <= 1e-9 * span
    });
    let se = fisher_matrix_batches(batches, &th)
        .and_then(|f| fisher_inverse(&f))
        .map(|inv| (0..3).map(|k| sqrt(inv[(k, k)])).collect())
        .unwrap_or_else(|_| vec![f64::NAN; 3]);
    Ok(EstimateReport {
        params: JOINT_PARAMS.to_vec(),
        estimates: est,
        std_errors: se,
        log_likelihood: -best.f,
        at_boundary,
        rmse: None,
    })
}

/// `√(3/(I_r N_total))`: the resonant single-parameter error with a third
/// of the shots.
pub fn predicted_delta_omega_r(i_r: f64, n_total: u64) -> f64 {
    sqrt(3.0 / (i_r * n_total as f64))
}

/// One replicate record: a binomial count per setting, setting `k` on
/// stream `k` of `seed`.
pub fn replicate_batches(settings: &[BatchSettings], n_per_setting: u64, seed: u64) -> Result<Vec<ShotBatch>> {
    settings
        .iter()
        .enumerate()
        .map(|(k, s)| sample_batch_binomial(s, n_per_setting, RunSeed::new(seed, k as u64)))
        .collect()
}

/// Summary of replicate estimates against the truth, order `(ω_r, ω_s, σ)`.
pub fn summarize_joint(truth: &Theta, n_per_setting: u64, estimates: &[Vec<f64>]) -> MultiparamStudy {
    let tv = [truth.omega_r, truth.omega_s, truth.sigma];
    let m = estimates.len() as f64;
    let mut rmse = vec![0.0; 3];
    let mut mean = vec![0.0; 3];
    for e in estimates {
        for k in 0..3 {
            rmse[k] += (e[k] - tv[k]) * (e[k] - tv[k]) / m;
            mean[k] += e[k] / m;
        }
    }
    MultiparamStudy {
        n_per_setting,
        rmse: rmse.into_iter().map(sqrt).collect(),
        mean,
        replicates: estimates.len(),
    }
}

/// Replicate study of the joint estimator with equal shots per setting.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MultiparamStudy {
    pub n_per_setting: u64,
    /// Per-parameter RMSE in the order `(ω_r, ω_s, σ)`.
    pub rmse: Vec<f64>,
    pub mean: Vec<f64>,
    pub replicates: usize,
}

/// Simulates `replicates` records at `settings` (binomial counts) and fits
/// each jointly, starting from the truth.
pub fn multiparam_study(
    settings: &[BatchSettings],
    n_per_setting: u64,
    lower: [f64; 3],
    upper: [f64; 3],
    replicates: usize,
    master_seed: u64,
    level: u64,
) -> Result<MultiparamStudy> {
    if replicates < MIN_REPLICATES {
        return Err(Error::input("replicates", "need at least 200 replicates"));
    }
    let truth = Theta::of(&settings[0].signal);
    let est = (0..replicates as u64)
        .map(|r| {
            let batches = replicate_batches(settings, n_per_setting, replicate_seed(master_seed, level, r))?;
            Ok(mle_multiparam(&batches, &truth, lower, upper)?.estimates)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_joint(&truth, n_per_setting, &est))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::fisher_r;
    use core::f64::consts::PI;

    const N: u32 = 2000;

    fn truth() -> TwoToneSignal {
        TwoToneSignal::gaussian(N as f64 * PI - 2.0 * PI, 0.01, 5.0).unwrap()
    }

    fn expected_batches(settings: &[BatchSettings], n: u64) -> Vec<ShotBatch> {
        settings
            .iter()
            .map(|s| {
                let p = crate::montecarlo::analytic_probability(s).unwrap();
                ShotBatch::new(n, (p * n as f64).round() as u64, *s).unwrap()
            })
            .collect()
    }

    #[test]
    fn design_uses_three_distinct_detunings() {
        let d = multiparam_design(5.0, 0.01, Convention::Physical).unwrap();
        assert_eq!(d[0], 2.0 * PI);
        assert!(d[1] > PI && d[1] < 2.0 * PI && d[2] > PI && d[2] < 2.0 * PI);
        assert!((d[1] - d[2]).abs() > 1e-3);
    }

    #[test]
    fn equal_detunings_are_not_identifiable() {
        let s = design_settings(&truth(), &[2.0 * PI; 3], N, Convention::Physical).unwrap();
        let b = expected_batches(&s, 300_000);
        let f = fisher_matrix_batches(&b, &Theta::of(&truth())).unwrap();
        assert!(fisher_inverse(&f).is_err());
        let lo = [0.0, truth().omega_s - 1.0, 1.0];
        let hi = [0.5, truth().omega_s + 1.0, 10.0];
        assert!(mle_multiparam(&b, &Theta::of(&truth()), lo, hi).is_err());
    }

    #[test]
    fn likelihood_is_stationary_at_truth_for_expected_counts() {
        let d = multiparam_design(5.0, 0.01, Convention::Physical).unwrap();
        let s = design_settings(&truth(), &d, N, Convention::Physical).unwrap();
        let b = expected_batches(&s, 1_000_000_000);
        let th = Theta::of(&truth());
        let lo = [0.0, th.omega_s - 1.0, 1.0];
        let hi = [0.5, th.omega_s + 1.0, 10.0];
        let rep = mle_multiparam(&b, &th, lo, hi).unwrap();
        // rounding the counts moves the optimum by far less than one SE
        for (k, p) in JOINT_PARAMS.iter().enumerate() {
            assert!(
                (rep.estimates[k] - th.get(*p)).abs() < 0.05 * rep.std_errors[k],
                "{rep:?}"
            );
        }
    }

    #[test]
    fn predicted_error_is_root_three_larger() {
        let s = truth();
        let plan = PulsePlan::with_detuning(s.omega_s, 2.0 * PI, N).unwrap();
        let i_r = fisher_r(&s, &plan, Convention::Physical).unwrap().value;
        let single = 1.0 / sqrt(i_r * 900_000.0);
        assert!((predicted_delta_omega_r(i_r, 900_000) / single - sqrt(3.0)).abs() < 1e-12);
    }
}
