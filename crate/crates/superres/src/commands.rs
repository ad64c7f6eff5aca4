//! One function per subcommand. Each resolves its section against the
//! defaults, runs, and returns a table, a JSON summary and every count it
//! simulated (for records).

use std::f64::consts::PI;

use serde_json::{json, Value};
use superres_core::analytics::{dephasing_minimal_time, dephasing_ratio};
use superres_core::analytics::{
    fisher_omega_s, fisher_r, fisher_r_detuned, fisher_readout, fisher_sigma, fisher_upper_bound, fisher_with_floor,
    floor_curvature, optimal_detuning, ou_noise_floor, readout_resolution_threshold, Convention, Nuisance,
};
use superres_core::estimation::{
    design_settings, fit_scaling, mle_1d, mle_multiparam, multiparam_design, predicted_delta_omega_r, replicate_batch,
    replicate_batches, replicate_seed, summarize_joint, Sampling, StudyConfig, StudyPoint, Theta, MIN_REPLICATES,
};
use superres_core::fisherinfo::{
    log_grid, multivariate_criterion, superres_criterion, RamseyFamily, RamseyParam, RamseyPoint, RandomBlockFamily,
};
use superres_core::memoryqubit::{
    build_phase_state, correlation_fisher, correlation_probability, correlation_shot_probability, dft_spectrum,
    nonharmonic_probability_direct, qft_fisher, qft_nonharmonic_closed, Sampling as Register,
};
use superres_core::montecarlo::{
    analytic_probability, derive_seed, draw_quadratures, BatchSettings, Control, NoiseSpec, OuParams, RunSeed,
};
use superres_core::signal::{AmplitudeModel, PulsePlan, TwoToneSignal};

use crate::config::*;
use crate::error::{CliError, CliResult};
use crate::grid::Grid;
use crate::parallel::{par_indexed, simulate_batch_par};
use crate::record::CountRecord;
use crate::table::{Cell, Table};

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub seed: Option<u64>,
}

impl Context {
    fn seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| {
            CliError::config("seed: this run is stochastic; pass --seed or set `seed` in the config (runs are never seeded from the clock)")
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub summary: Value,
    pub counts: Vec<CountRecord>,
}

impl Outcome {
    fn new(table: Table, summary: Value) -> Self {
        Outcome {
            table,
            summary,
            counts: Vec::new(),
        }
    }
}

fn need<T>(v: Option<T>, field: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::config(format!("{field}: missing value")))
}

fn positive(v: f64, field: &str) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!(
            "{field}: must be positive and finite, got {v}"
        )))
    }
}

fn nonnegative(v: f64, field: &str) -> CliResult<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!(
            "{field}: must be non-negative and finite, got {v}"
        )))
    }
}

/// Signal carrier `ω_s = nπ − 2π`, so `δ_s t = 2π` means `t = 1`.
pub fn carrier(n_pulses: u32) -> f64 {
    n_pulses as f64 * PI - 2.0 * PI
}

fn pulsed(signal: TwoToneSignal, delta_s_t: f64, n_pulses: u32, conv: Convention) -> CliResult<BatchSettings> {
    let plan = PulsePlan::with_detuning(signal.omega_s, delta_s_t, n_pulses)?;
    let s = BatchSettings::pulsed(signal, plan, conv);
    s.validate()?;
    Ok(s)
}

fn conv(c: Option<ConventionArg>) -> Convention {
    c.map(Convention::from).unwrap_or(Convention::Physical)
}

fn local_maxima(x: &[f64], y: &[f64]) -> Vec<f64> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .map(|i| x[i])
        .collect()
}

pub fn prob_scan(a: &ProbScanArgs, ctx: &Context) -> CliResult<Outcome> {
    let sigma_t = nonnegative(a.sigma_t.unwrap_or(1.0), "sigma_t")?;
    let r = nonnegative(a.omega_r_t.unwrap_or(0.01), "omega_r_t")?;
    let grid = a
        .delta_grid
        .unwrap_or(Grid::new(4.5, 8.0, 351).expect("valid default grid"));
    let n = a.n_pulses.unwrap_or(2000);
    let c = conv(a.convention);
    let amplitude = match a.model.unwrap_or(AmplitudeArg::Gaussian) {
        AmplitudeArg::Gaussian => AmplitudeModel::GaussianIid { sigma: sigma_t },
        AmplitudeArg::Bessel => AmplitudeModel::FixedAmplitude { omega_amp: sigma_t },
    };
    let signal = TwoToneSignal::new(carrier(n), r, amplitude)?;
    let shots = a.shots.filter(|&s| s > 0);
    let seed = match shots {
        Some(_) => Some(ctx.seed()?),
        None => None,
    };
    let xs = grid.values();
    let rows = par_indexed(xs.len(), |k| {
        let s = pulsed(signal, xs[k], n, c)?;
        let p = analytic_probability(&s)?;
        let batch = match (shots, seed) {
            (Some(m), Some(seed)) => Some(simulate_batch_par(&s, m, derive_seed(seed, k as u64, 0))?),
            _ => None,
        };
        Ok((p, batch))
    })?;
    let mut table = if shots.is_some() {
        Table::new(&["delta_s_t", "p", "n_shots", "n_ones", "p_hat"])
    } else {
        Table::new(&["delta_s_t", "p"])
    };
    let mut counts = Vec::new();
    for (x, (p, b)) in xs.iter().zip(&rows) {
        match b {
            Some(b) => {
                table.push(vec![
                    (*x).into(),
                    (*p).into(),
                    b.n_shots.into(),
                    b.n_ones.into(),
                    b.frequency().into(),
                ]);
                counts.push(CountRecord::new(format!("delta_s_t={x:?}"), b));
            }
            None => table.push(vec![(*x).into(), (*p).into()]),
        }
    }
    let ps: Vec<f64> = rows.iter().map(|r| r.0).collect();
    Ok(Outcome {
        table,
        summary: json!({ "maxima": local_maxima(&xs, &ps) }),
        counts,
    })
}

pub fn fisher_scan(a: &FisherScanArgs) -> CliResult<Outcome> {
    let sigma_t = positive(a.sigma_t.unwrap_or(5.0), "sigma_t")?;
    let r = nonnegative(a.omega_r_t.unwrap_or(0.01), "omega_r_t")?;
    let grid = a
        .delta_grid
        .unwrap_or(Grid::new(4.5, 8.0, 400).expect("valid default grid"));
    let c = conv(a.convention);
    let param = a.param.unwrap_or(FisherParam::OmegaR);
    let xs = grid.values();
    let ys = xs
        .iter()
        .map(|&d| {
            Ok(match param {
                FisherParam::OmegaR => fisher_r_detuned(d, r, sigma_t, c)?,
                FisherParam::OmegaS => fisher_omega_s(d, sigma_t, r, c)?,
                FisherParam::Sigma => fisher_sigma(d, sigma_t, r, c)?,
            }
            .value)
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let mut table = Table::new(&["delta_s_t", "fisher"]);
    for (x, y) in xs.iter().zip(&ys) {
        table.push(vec![(*x).into(), (*y).into()]);
    }
    Ok(Outcome::new(
        table,
        json!({ "maxima": local_maxima(&xs, &ys), "units": "t^2", "convention": format!("{c:?}").to_lowercase() }),
    ))
}

fn histogram(xs: &[f64], bins: usize) -> Value {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = bins.max(1);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0u64; bins];
    for &x in xs {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();
    json!({ "edges": edges, "counts": counts })
}

fn shot_levels(shots: Option<u64>, n_list: &Option<Vec<u64>>, default: u64) -> CliResult<Vec<u64>> {
    let v = match n_list {
        Some(l) if !l.is_empty() => l.clone(),
        _ => vec![shots.unwrap_or(default)],
    };
    if v.contains(&0) {
        return Err(CliError::config("shots: must be positive"));
    }
    Ok(v)
}

pub fn mle(a: &MleArgs, ctx: &Context) -> CliResult<Outcome> {
    let seed = ctx.seed()?;
    let sigma_t = positive(a.sigma_t.unwrap_or(5.0), "sigma_t")?;
    let r = nonnegative(a.omega_r_t.unwrap_or(0.01), "omega_r_t")?;
    let detunings = a.detunings.clone().unwrap_or(vec![2.0 * PI, 1.8 * PI]);
    let levels = shot_levels(a.shots, &a.n_list, 1_000_000)?;
    let replicates = a.replicates.unwrap_or(MIN_REPLICATES);
    if replicates < MIN_REPLICATES {
        return Err(CliError::config(format!("replicates: need at least {MIN_REPLICATES}")));
    }
    let sampling = match a.sampling.unwrap_or(SamplingArg::Binomial) {
        SamplingArg::Binomial => Sampling::Binomial,
        SamplingArg::PerShot => Sampling::PerShot,
    };
    let lower = nonnegative(a.lower.unwrap_or(0.0), "lower")?;
    let upper = positive(a.upper.unwrap_or(0.5), "upper")?;
    if upper <= lower {
        return Err(CliError::config("upper: must exceed lower"));
    }
    let n = a.n_pulses.unwrap_or(2000);
    let bins = a.bins.unwrap_or(40);
    let signal = TwoToneSignal::gaussian(carrier(n), r, sigma_t)?;

    let mut table = Table::new(&["delta_s_t", "n_shots", "replicate", "n_ones", "estimate"]);
    let mut counts = Vec::new();
    let mut summary = Vec::new();
    for (di, &d) in detunings.iter().enumerate() {
        let cfg = StudyConfig {
            settings: pulsed(signal, d, n, Convention::Physical)?,
            lower,
            upper,
            sampling,
        };
        let plan = match cfg.settings.control {
            Control::Pulsed(p) => p,
            Control::Free { .. } => unreachable!("pulsed settings"),
        };
        let i_r = if r > 0.0 {
            fisher_r(&signal, &plan, Convention::Physical).ok().map(|l| l.value)
        } else {
            None
        };
        let mut points = Vec::new();
        let mut per_level = Vec::new();
        for (li, &shots) in levels.iter().enumerate() {
            let level = ((di as u64) << 32) | li as u64;
            let reps = par_indexed(replicates, |k| {
                let b = replicate_batch(&cfg, shots, replicate_seed(seed, level, k as u64))?;
                let e = mle_1d(&b, lower, upper)?;
                Ok((b, e.estimates[0]))
            })?;
            for (k, (b, e)) in reps.iter().enumerate() {
                table.push(vec![d.into(), shots.into(), k.into(), b.n_ones.into(), (*e).into()]);
                counts.push(CountRecord::new(format!("delta_s_t={d:?};n={shots};rep={k}"), b));
            }
            let est: Vec<f64> = reps.iter().map(|x| x.1).collect();
            let pt = StudyPoint::from_estimates(shots, r, est);
            per_level.push(json!({
                "n_shots": shots,
                "rmse": pt.rmse,
                "mean": pt.mean,
                "crb": i_r.map(|i| 1.0 / (i * shots as f64).sqrt()),
                "resolved": pt.rmse < r,
                "histogram": histogram(&pt.estimates, bins),
            }));
            points.push(pt);
        }
        let scaling = if points.len() >= 2 {
            let f = fit_scaling(points)?;
            json!({ "slope": f.slope, "prefactor": f.prefactor })
        } else {
            Value::Null
        };
        summary.push(json!({ "delta_s_t": d, "fisher_r": i_r, "levels": per_level, "scaling": scaling }));
    }
    Ok(Outcome {
        table,
        summary: json!({ "omega_r": r, "sigma_t": sigma_t, "replicates": replicates, "detunings": summary }),
        counts,
    })
}

pub fn multiparam(a: &MultiparamArgs, ctx: &Context) -> CliResult<Outcome> {
    let seed = ctx.seed()?;
    let sigma_t = positive(a.sigma_t.unwrap_or(5.0), "sigma_t")?;
    let r = positive(a.omega_r_t.unwrap_or(0.01), "omega_r_t")?;
    let levels = shot_levels(a.shots, &a.n_list, 300_000)?;
    let replicates = a.replicates.unwrap_or(MIN_REPLICATES);
    if replicates < MIN_REPLICATES {
        return Err(CliError::config(format!("replicates: need at least {MIN_REPLICATES}")));
    }
    let n = a.n_pulses.unwrap_or(2000);
    let ws = carrier(n);
    let signal = TwoToneSignal::gaussian(ws, r, sigma_t)?;
    let c = Convention::Physical;
    let design = multiparam_design(sigma_t, r, c)?;
    let settings = design_settings(&signal, &design, n, c)?;
    let truth = Theta::of(&signal);
    let lo = [0.0, ws - 1.0, sigma_t / 5.0];
    let hi = [(10.0 * r).max(0.5), ws + 1.0, 5.0 * sigma_t];
    let i_r = fisher_r(&signal, &PulsePlan::with_detuning(ws, 2.0 * PI, n)?, c)?.value;
    let (_, i_sigma) = optimal_detuning(Nuisance::Sigma, sigma_t, r, c)?;

    let mut table = Table::new(&[
        "n_shots",
        "replicate",
        "n_ones_r",
        "n_ones_s",
        "n_ones_sigma",
        "omega_r",
        "omega_s",
        "sigma",
    ]);
    let mut counts = Vec::new();
    let mut studies = Vec::new();
    for (li, &shots) in levels.iter().enumerate() {
        let reps = par_indexed(replicates, |k| {
            let b = replicate_batches(&settings, shots, replicate_seed(seed, li as u64, k as u64))?;
            let e = mle_multiparam(&b, &truth, lo, hi)?;
            Ok((b, e.estimates))
        })?;
        for (k, (b, e)) in reps.iter().enumerate() {
            let mut row: Vec<Cell> = vec![shots.into(), k.into()];
            row.extend(b.iter().map(|x| Cell::from(x.n_ones)));
            row.extend(e.iter().map(|&x| Cell::from(x)));
            table.push(row);
            for (j, x) in b.iter().enumerate() {
                counts.push(CountRecord::new(format!("n={shots};rep={k};setting={j}"), x));
            }
        }
        let est: Vec<Vec<f64>> = reps.into_iter().map(|x| x.1).collect();
        studies.push(summarize_joint(&truth, shots, &est));
    }
    let slopes = if levels.len() >= 2 {
        let x: Vec<f64> = levels.iter().map(|&n| (n as f64).ln()).collect();
        (0..3)
            .map(|k| {
                let y: Vec<f64> = studies.iter().map(|s| s.rmse[k].ln()).collect();
                superres_core::fisherinfo::ls_slope(&x, &y)
            })
            .collect::<Vec<_>>()
    } else {
        Vec::new()
    };
    let per_level: Vec<Value> = studies
        .iter()
        .map(|s| {
            let pred = predicted_delta_omega_r(i_r, 3 * s.n_per_setting);
            json!({
                "n_per_setting": s.n_per_setting,
                "rmse": { "omega_r": s.rmse[0], "omega_s": s.rmse[1], "sigma": s.rmse[2] },
                "mean": { "omega_r": s.mean[0], "omega_s": s.mean[1], "sigma": s.mean[2] },
                "predicted_delta_omega_r": pred,
                "omega_r_over_rmse": r / s.rmse[0],
            })
        })
        .collect();
    Ok(Outcome {
        table,
        summary: json!({
            "detunings": design,
            "fisher_r": i_r,
            "sigma_information_max_times_sigma2": i_sigma.value * sigma_t * sigma_t,
            "levels": per_level,
            "slopes": slopes,
        }),
        counts,
    })
}

pub fn noise_sweep(a: &NoiseSweepArgs, ctx: &Context) -> CliResult<Outcome> {
    let kind = need(a.kind, "kind")?;
    let c = conv(a.convention);
    let sigma_t = positive(a.sigma_t.unwrap_or(5.0), "sigma_t")?;
    let r = nonnegative(a.omega_r_t.unwrap_or(0.01), "omega_r_t")?;
    match kind {
        NoiseKind::Floor => {
            let grid = a
                .grid
                .unwrap_or(Grid::new(0.0, 0.002, 101).expect("valid default grid"));
            let mut table = Table::new(&["eps", "fisher"]);
            for e in grid.values() {
                table.push(vec![e.into(), fisher_with_floor(sigma_t, r, e, c)?.value.into()]);
            }
            Ok(Outcome::new(
                table,
                json!({ "half_max_eps_predicted": floor_curvature(sigma_t, c) * r * r, "fisher_noiseless": fisher_with_floor(sigma_t, r, 0.0, c)?.value }),
            ))
        }
        NoiseKind::Readout => {
            let grid = a.grid.unwrap_or(Grid::new(0.0, 0.01, 101).expect("valid default grid"));
            let mut table = Table::new(&["eps_prime", "fisher", "threshold_omega_r_t"]);
            for e in grid.values() {
                table.push(vec![
                    e.into(),
                    fisher_readout(sigma_t, r, e, c)?.into(),
                    readout_resolution_threshold(e, sigma_t).into(),
                ]);
            }
            Ok(Outcome::new(table, json!({ "omega_r_t": r, "sigma_t": sigma_t })))
        }
        NoiseKind::Dephasing => {
            let kappa = nonnegative(a.kappa.unwrap_or(0.1), "kappa")?;
            let grid = a.grid.unwrap_or(Grid::new(0.1, 10.0, 100).expect("valid default grid"));
            // sigma_t and omega_r_t are read as σ and ω_r at t = 1
            let t_min = dephasing_minimal_time(sigma_t, r, kappa);
            let mut table = Table::new(&["t", "ratio", "t_over_t_min"]);
            for t in grid.values() {
                let t = positive(t, "grid")?;
                table.push(vec![
                    t.into(),
                    dephasing_ratio(sigma_t, r, kappa, t)?.into(),
                    (t / t_min).into(),
                ]);
            }
            Ok(Outcome::new(table, json!({ "t_min": t_min })))
        }
        NoiseKind::Ou => {
            let seed = ctx.seed()?;
            let gamma = positive(a.gamma_t.unwrap_or(0.01), "gamma_t")?;
            let shots = a.shots.unwrap_or(200_000);
            let grid = a.grid.unwrap_or(Grid::new(0.5, 2.0, 4).expect("valid default grid"));
            let xs = grid.values();
            // free evolution over one signal period, no splitting: only the
            // drift inside the shot moves the probability off zero
            let rows = par_indexed(xs.len(), |k| {
                let sigma_n = nonnegative(xs[k], "grid")?;
                let s = BatchSettings {
                    signal: TwoToneSignal::gaussian(2.0 * PI, 0.0, sigma_t)?,
                    control: Control::Free { t: 1.0 },
                    noise: NoiseSpec {
                        ou: Some(OuParams { gamma, sigma_n }),
                        ..NoiseSpec::default()
                    },
                    convention: c,
                };
                let b = simulate_batch_par(&s, shots, derive_seed(seed, k as u64, 0))?;
                Ok((sigma_n, b, ou_noise_floor(sigma_n, gamma, 1.0)?))
            })?;
            let mut table = Table::new(&["sigma_n", "n_shots", "n_ones", "p_hat", "floor_predicted"]);
            let mut counts = Vec::new();
            for (sn, b, f) in &rows {
                table.push(vec![
                    (*sn).into(),
                    b.n_shots.into(),
                    b.n_ones.into(),
                    b.frequency().into(),
                    (*f).into(),
                ]);
                counts.push(CountRecord::new(format!("sigma_n={sn:?}"), b));
            }
            Ok(Outcome {
                table,
                summary: json!({ "gamma_t": gamma }),
                counts,
            })
        }
    }
}

pub fn qft(a: &QftArgs, ctx: &Context) -> CliResult<Outcome> {
    let seed = ctx.seed()?;
    let reg = Register::new(a.n.unwrap_or(16), a.m.unwrap_or(32))?;
    let sigma_tau = nonnegative(a.sigma_tau.unwrap_or(1.0), "sigma_tau")?;
    let grid = a
        .grid
        .unwrap_or(Grid::new(0.005, 0.05, 10).expect("valid default grid"));
    let draws = a.draws.unwrap_or(20_000);
    if draws == 0 {
        return Err(CliError::config("draws: must be positive"));
    }
    let omega_s = 2.0 * PI;
    let tau = reg.tau(omega_s);
    let t_total = reg.total_time(omega_s);
    let sigma = sigma_tau / tau;
    let xs = grid.values();
    let fi = qft_fisher(sigma, tau, t_total);
    let bound = fisher_upper_bound(sigma * t_total, t_total);
    if a.spectrum.unwrap_or(false) {
        let s = TwoToneSignal::gaussian(omega_s, xs[0] / t_total, sigma)?;
        let mut rng = RunSeed::new(seed, 0).rng();
        let st = build_phase_state(&draw_quadratures(&s.amplitude, &mut rng), &s, reg)?;
        let mut table = Table::new(&["index", "harmonic_index", "probability"]);
        for (k, p) in dft_spectrum(&st).into_iter().enumerate() {
            table.push(vec![k.into(), (k % reg.m).into(), p.into()]);
        }
        return Ok(Outcome::new(table, json!({ "omega_r_T": xs[0], "qft_fisher": fi })));
    }
    let mut table = Table::new(&["omega_r_T", "mean_p", "closed_form", "ratio"]);
    for (gi, &x) in xs.iter().enumerate() {
        let s = TwoToneSignal::gaussian(omega_s, x / t_total, sigma)?;
        let ps = par_indexed(draws as usize, |k| {
            let mut rng = RunSeed::new(derive_seed(seed, gi as u64, k as u64), 0).rng();
            let st = build_phase_state(&draw_quadratures(&s.amplitude, &mut rng), &s, reg)?;
            Ok(nonharmonic_probability_direct(&st))
        })?;
        let mean = ps.iter().sum::<f64>() / draws as f64;
        let cf = qft_nonharmonic_closed(sigma, tau, t_total, s.omega_r);
        table.push(vec![x.into(), mean.into(), cf.into(), (mean / cf).into()]);
    }
    Ok(Outcome::new(
        table,
        json!({ "tau": tau, "T": t_total, "qft_fisher": fi, "fisher_upper_bound": bound }),
    ))
}

pub fn correlation(a: &CorrelationArgs, ctx: &Context) -> CliResult<Outcome> {
    let seed = ctx.seed()?;
    let sigma_tau = nonnegative(a.sigma_tau.unwrap_or(1.0), "sigma_tau")?;
    let tau = positive(a.tau.unwrap_or(0.01), "tau")?;
    let periods = a.periods.unwrap_or(10);
    if periods == 0 {
        return Err(CliError::config("periods: must be positive"));
    }
    let grid = a
        .grid
        .unwrap_or(Grid::new(0.005, 0.05, 10).expect("valid default grid"));
    let draws = a.draws.unwrap_or(100_000);
    if draws == 0 {
        return Err(CliError::config("draws: must be positive"));
    }
    let t_total = 1.0;
    let omega_s = 2.0 * PI * periods as f64;
    let sigma = sigma_tau / tau;
    let fi = correlation_fisher(sigma, tau, t_total, omega_s)?;
    let mut table = Table::new(&["omega_r_T", "mean_p", "closed_form", "ratio"]);
    for (gi, x) in grid.values().into_iter().enumerate() {
        let s = TwoToneSignal::gaussian(omega_s, x / t_total, sigma)?;
        let ps = par_indexed(draws as usize, |k| {
            let mut rng = RunSeed::new(derive_seed(seed, gi as u64, k as u64), 0).rng();
            Ok(correlation_shot_probability(
                &draw_quadratures(&s.amplitude, &mut rng),
                &s,
                tau,
                t_total,
            )?)
        })?;
        let mean = ps.iter().sum::<f64>() / draws as f64;
        let cf = correlation_probability(sigma, tau, t_total, omega_s, s.omega_r)?;
        table.push(vec![x.into(), mean.into(), cf.into(), (mean / cf).into()]);
    }
    Ok(Outcome::new(
        table,
        json!({
            "correlation_fisher": fi,
            "qft_fisher": qft_fisher(sigma, tau, t_total),
            "fisher_upper_bound": fisher_upper_bound(sigma * t_total, t_total),
        }),
    ))
}

pub fn criterion(a: &CriterionArgs) -> CliResult<Outcome> {
    let family = a.family.unwrap_or(FamilyArg::Ramsey);
    let grid = log_grid(
        positive(a.s_min.unwrap_or(1e-4), "s_min")?,
        positive(a.s_max.unwrap_or(1e-2), "s_max")?,
        a.points.unwrap_or(9),
    );
    if grid.len() < 3 {
        return Err(CliError::config("points: need at least 3"));
    }
    let (report, extra) = match family {
        FamilyArg::Ramsey => {
            let d = a.delta_s_t.unwrap_or(2.0 * PI);
            let s = positive(a.sigma_t.unwrap_or(1.0), "sigma_t")?;
            let f = RamseyFamily::new(&[RamseyParam::OmegaR], RamseyPoint::new(0.0, d, s), conv(a.convention));
            (superres_criterion(&f, &[0.0], 0, &grid)?, Value::Null)
        }
        FamilyArg::BlockRegular | FamilyArg::BlockIrregular => {
            let regular = family == FamilyArg::BlockRegular;
            let mut rng = RunSeed::new(a.family_seed.unwrap_or(0), 0).rng();
            let f = RandomBlockFamily::generate(regular, &mut rng);
            let rep = superres_criterion(&f, &[0.0, 0.3], 0, &grid)?;
            let m = multivariate_criterion(&f, &[1e-6, 0.3], &[0])?;
            let extra = json!({
                "block_regular": m.regular,
                "c22_min_eig": m.c22_min_eig,
                "full_regular": m.full_regular,
                "full_min_eig": m.full_min_eig,
                "consistent": m.consistent(),
            });
            (rep, extra)
        }
    };
    let mut table = Table::new(&["s", "qfi"]);
    for (s, q) in grid.iter().zip(&report.fi) {
        table.push(vec![(*s).into(), (*q).into()]);
    }
    Ok(Outcome::new(
        table,
        json!({
            "exponent": report.exponent,
            "limit_fi": report.limit_fi,
            "fi_slope": report.fi_slope,
            "verdict": report.verdict,
            "multivariate": extra,
        }),
    ))
}
