use alloc::vec::Vec;

use libm::{log, sqrt};

use super::mle::mle_1d;
use crate::error::{Error, Result};
use crate::fisherinfo::ls_slope;
use crate::montecarlo::{derive_seed, sample_batch_binomial, simulate_batch, BatchSettings, RunSeed, ShotBatch};

/// Minimum replicate count for a study.
pub const MIN_REPLICATES: usize = 200;

/// How replicate records are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Sampling {
    /// Shot-by-shot simulation.
    PerShot,
    /// One binomial draw with the closed-form mean probability.
    Binomial,
}

/// A single-parameter (`ω_r`) replicate study.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudyConfig {
    /// Truth; `ω_s` and `σ` are treated as known.
    pub settings: BatchSettings,
    pub lower: f64,
    pub upper: f64,
    pub sampling: Sampling,
}

/// Replicate outcome at one shot count.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudyPoint {
    pub n_shots: u64,
    pub estimates: Vec<f64>,
    pub rmse: f64,
    pub mean: f64,
}

impl StudyPoint {
    pub fn from_estimates(n_shots: u64, truth: f64, estimates: Vec<f64>) -> Self {
        let m = estimates.len() as f64;
        let mean = estimates.iter().sum::<f64>() / m;
        let rmse = sqrt(estimates.iter().map(|e| (e - truth) * (e - truth)).sum::<f64>() / m);
        StudyPoint {
            n_shots,
            estimates,
            rmse,
            mean,
        }
    }
}

/// Seed of replicate `rep` at shot-count index `level`.
pub fn replicate_seed(master_seed: u64, level: u64, rep: u64) -> u64 {
    derive_seed(master_seed, level, rep)
}

/// Simulates one replicate record.
pub fn replicate_batch(cfg: &StudyConfig, n_shots: u64, seed: u64) -> Result<ShotBatch> {
    match cfg.sampling {
        Sampling::PerShot => simulate_batch(&cfg.settings, n_shots, seed),
        Sampling::Binomial => sample_batch_binomial(&cfg.settings, n_shots, RunSeed::new(seed, 0)),
    }
}

/// Simulates one replicate record and returns its `ω_r` estimate.
pub fn replicate_estimate(cfg: &StudyConfig, n_shots: u64, seed: u64) -> Result<f64> {
    Ok(mle_1d(&replicate_batch(cfg, n_shots, seed)?, cfg.lower, cfg.upper)?.estimates[0])
}

/// Runs `replicates` independent records at one shot count.
pub fn study_point(
    cfg: &StudyConfig,
    n_shots: u64,
    level: u64,
    replicates: usize,
    master_seed: u64,
) -> Result<StudyPoint> {
    if replicates < MIN_REPLICATES {
        return Err(Error::input("replicates", "need at least 200 replicates"));
    }
    let est = (0..replicates as u64)
        .map(|r| replicate_estimate(cfg, n_shots, replicate_seed(master_seed, level, r)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(StudyPoint::from_estimates(n_shots, cfg.settings.signal.omega_r, est))
}

/// Log-log fit of RMSE against shot count.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingReport {
    pub points: Vec<StudyPoint>,
    pub slope: f64,
    /// `RMSE ≈ prefactor · N^slope`.
    pub prefactor: f64,
}

/// Least-squares slope and prefactor of `log RMSE` vs `log N`.
pub fn fit_scaling(points: Vec<StudyPoint>) -> Result<ScalingReport> {
    if points.len() < 2 {
        return Err(Error::input("n_list", "need at least two shot counts"));
    }
    let lo = points.iter().map(|p| p.n_shots).min().unwrap_or(1) as f64;
    let hi = points.iter().map(|p| p.n_shots).max().unwrap_or(1) as f64;
    if log(hi / lo) / core::f64::consts::LN_10 < 1.5 {
        return Err(Error::input("n_list", "shot counts must span at least 1.5 decades"));
    }
    if points.iter().any(|p| !(p.rmse > 0.0)) {
        return Err(Error::Numerical(
            "zero replicate spread; the scaling exponent is undefined".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| log(p.n_shots as f64)).collect();
    let ys: Vec<f64> = points.iter().map(|p| log(p.rmse)).collect();
    let slope = ls_slope(&xs, &ys);
    let n = xs.len() as f64;
    let intercept = ys.iter().sum::<f64>() / n - slope * xs.iter().sum::<f64>() / n;
    Ok(ScalingReport {
        points,
        slope,
        prefactor: libm::exp(intercept),
    })
}

/// RMSE at each shot count, then the log-log slope.
pub fn scaling_study(cfg: &StudyConfig, n_list: &[u64], replicates: usize, master_seed: u64) -> Result<ScalingReport> {
    let points = n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| study_point(cfg, n, i as u64, replicates, master_seed))
        .collect::<Result<Vec<_>>>()?;
    fit_scaling(points)
}

/// Off-resonance prediction `RMSE ≈ (p(1−p))^¼/√(∂²p/∂ω_r²) · N^(−¼)` with
/// `p` and the curvature taken at `ω_r = 0`.
pub fn off_resonant_rmse_prediction(settings: &BatchSettings, n_shots: u64) -> Result<f64> {
    let mut s = *settings;
    let f = |r: f64, s: &mut BatchSettings| {
        s.signal.omega_r = r;
        crate::montecarlo::analytic_probability(s)
    };
    let h = 1e-3 / settings.control.total_time();
    let p0 = f(0.0, &mut s)?;
    let d2 = (f(h, &mut s)? - 2.0 * p0 + f(-h, &mut s)?) / (h * h);
    Ok(sqrt(sqrt(p0 * (1.0 - p0))) / sqrt(d2.abs()) * libm::pow(n_shots as f64, -0.25))
}
