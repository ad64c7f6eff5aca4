use core::f64::consts::PI;

use superres_core::analytics::{fisher_r, fisher_sigma, Convention};
use superres_core::estimation::{
    design_settings, mle_multiparam, multiparam_design, multiparam_study, off_resonant_rmse_prediction,
    predicted_delta_omega_r, preliminary_scan, scaling_study, study_point, Sampling, StudyConfig, Theta,
};
use superres_core::fisherinfo::ls_slope;
use superres_core::memoryqubit::{mean_nonharmonic_probability, qft_nonharmonic_closed, Sampling as Grid};
use superres_core::montecarlo::{sample_batch_binomial, BatchSettings, RunSeed};
use superres_core::signal::{PulsePlan, TwoToneSignal};

const PULSES: u32 = 2000;

fn omega_s() -> f64 {
    PULSES as f64 * PI - 2.0 * PI
}

fn study(delta_s_t: f64, sampling: Sampling) -> StudyConfig {
    let plan = PulsePlan::with_detuning(omega_s(), delta_s_t, PULSES).unwrap();
    StudyConfig {
        settings: BatchSettings::pulsed(
            TwoToneSignal::gaussian(omega_s(), 0.01, 5.0).unwrap(),
            plan,
            Convention::Physical,
        ),
        lower: 0.0,
        upper: 0.5,
        sampling,
    }
}

#[test]
fn resonance_resolves_and_off_resonance_does_not() {
    let on = study_point(&study(2.0 * PI, Sampling::Binomial), 1_000_000, 0, 200, 11).unwrap();
    let off = study_point(&study(1.8 * PI, Sampling::Binomial), 1_000_000, 0, 200, 12).unwrap();
    println!("rmse on {:.3e} off {:.3e}", on.rmse, off.rmse);
    assert!(on.rmse < 0.001);
    assert!(off.rmse > 0.01);
}

#[test]
fn scaling_exponents() {
    let cfg = study(2.0 * PI, Sampling::Binomial);
    let on = scaling_study(&cfg, &[300_000, 1_000_000, 3_000_000, 10_000_000], 200, 21).unwrap();
    let plan = match cfg.settings.control {
        superres_core::montecarlo::Control::Pulsed(p) => p,
        _ => unreachable!(),
    };
    let i_r = fisher_r(&cfg.settings.signal, &plan, Convention::Physical)
        .unwrap()
        .value;
    println!(
        "resonant slope {:.3} prefactor {:.3} vs {:.3}",
        on.slope,
        on.prefactor,
        1.0 / i_r.sqrt()
    );
    assert!((-0.55..=-0.45).contains(&on.slope));
    assert!((on.prefactor * i_r.sqrt() - 1.0).abs() < 0.2);

    let cfg = study(1.8 * PI, Sampling::Binomial);
    let off = scaling_study(&cfg, &[1_000, 10_000, 100_000], 200, 22).unwrap();
    let pred: Vec<f64> = off
        .points
        .iter()
        .map(|p| off_resonant_rmse_prediction(&cfg.settings, p.n_shots).unwrap())
        .collect();
    println!(
        "off slope {:.3}, rmse {:?} pred {:?}",
        off.slope,
        off.points.iter().map(|p| p.rmse).collect::<Vec<_>>(),
        pred
    );
    assert!((-0.30..=-0.20).contains(&off.slope));
    for (p, q) in off.points.iter().zip(&pred) {
        assert!((p.rmse / q - 1.0).abs() < 0.3);
    }
}

#[test]
fn scan_locates_the_signal_frequency() {
    let truth = TwoToneSignal::gaussian(40.0 * PI, 0.01, 1.0).unwrap();
    let grid: Vec<f64> = (0..61).map(|k| -3.0 * PI + 6.0 * PI * k as f64 / 60.0).collect();
    let fit = preliminary_scan(&truth, 1.0, &grid, 20_000, 5, Convention::Physical).unwrap();
    println!("{fit:?}");
    // usable once the signal-frequency error is below the splitting
    assert!((fit.omega_s - truth.omega_s).abs() < truth.omega_r);
    assert!((fit.sigma - 1.0).abs() < 0.05);
}

#[test]
fn joint_estimation_matches_root_three_prediction() {
    let truth = TwoToneSignal::gaussian(omega_s(), 0.01, 5.0).unwrap();
    let d = multiparam_design(5.0, 0.01, Convention::Physical).unwrap();
    let s = design_settings(&truth, &d, PULSES, Convention::Physical).unwrap();
    let lo = [0.0, omega_s() - 1.0, 1.0];
    let hi = [0.5, omega_s() + 1.0, 10.0];
    let st = multiparam_study(&s, 300_000, lo, hi, 200, 31, 0).unwrap();
    let plan = PulsePlan::with_detuning(omega_s(), 2.0 * PI, PULSES).unwrap();
    let i_r = fisher_r(&truth, &plan, Convention::Physical).unwrap().value;
    let pred = predicted_delta_omega_r(i_r, 900_000);
    println!(
        "design {d:?} rmse {:?} pred {pred:.3e} ratio {:.2}",
        st.rmse,
        0.01 / st.rmse[0]
    );
    assert!(st.rmse[0] > 0.01 / 7.5 / 1.5 && st.rmse[0] < 0.01 / 7.5 * 1.5);
    assert!((st.rmse[0] / pred - 1.0).abs() < 0.2);
}

#[test]
fn joint_errors_scale_as_inverse_root_n() {
    let truth = TwoToneSignal::gaussian(omega_s(), 0.01, 5.0).unwrap();
    let d = multiparam_design(5.0, 0.01, Convention::Physical).unwrap();
    let s = design_settings(&truth, &d, PULSES, Convention::Physical).unwrap();
    let lo = [0.0, omega_s() - 1.0, 1.0];
    let hi = [0.5, omega_s() + 1.0, 10.0];
    let ns = [1_000_000u64, 3_000_000, 10_000_000, 30_000_000];
    let studies: Vec<_> = ns
        .iter()
        .enumerate()
        .map(|(i, &n)| multiparam_study(&s, n, lo, hi, 200, 41, i as u64).unwrap())
        .collect();
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    for k in 0..3 {
        let y: Vec<f64> = studies.iter().map(|st| st.rmse[k].ln()).collect();
        let slope = ls_slope(&x, &y);
        println!(
            "parameter {k}: slope {slope:.3} {:?}",
            studies.iter().map(|s| (s.rmse[k], s.mean[k])).collect::<Vec<_>>()
        );
        assert!((slope + 0.5).abs() < 0.05, "parameter {k}: slope {slope}");
    }
}

#[test]
fn joint_fit_errors_on_identical_settings() {
    let truth = TwoToneSignal::gaussian(omega_s(), 0.01, 5.0).unwrap();
    let s = design_settings(&truth, &[2.0 * PI; 3], PULSES, Convention::Physical).unwrap();
    let b: Vec<_> = s
        .iter()
        .enumerate()
        .map(|(k, x)| sample_batch_binomial(x, 300_000, RunSeed::new(1, k as u64)).unwrap())
        .collect();
    let lo = [0.0, omega_s() - 1.0, 1.0];
    let hi = [0.5, omega_s() + 1.0, 10.0];
    assert!(mle_multiparam(&b, &Theta::of(&truth), lo, hi).is_err());
}

#[test]
fn sigma_information_peaks_near_point_six_three() {
    let d = multiparam_design(5.0, 0.01, Convention::Physical).unwrap();
    let i = fisher_sigma(d[2], 5.0, 0.01, Convention::Physical).unwrap().value;
    // units of t² → 1/σ² via (σt)²
    assert!((i * 25.0 / 0.63 - 1.0).abs() < 0.1, "{}", i * 25.0);
}

#[test]
fn nonharmonic_mean_follows_quadratic_law() {
    let grid = Grid::new(16, 32).unwrap();
    let omega_s = 2.0 * PI;
    let t_total = grid.total_time(omega_s);
    let tau = grid.tau(omega_s);
    let sigma = 1.0 / tau;
    let r = 0.05 / t_total;
    let s = TwoToneSignal::gaussian(omega_s, r, sigma).unwrap();
    let mc = mean_nonharmonic_probability(&s, grid, 100_000, 3).unwrap();
    let cf = qft_nonharmonic_closed(sigma, tau, t_total, r);
    println!("mc {mc:.4e} closed {cf:.4e}");
    assert!((mc / cf - 1.0).abs() < 0.05);

    let rs: Vec<f64> = [1e-3, 3e-3, 1e-2, 3e-2, 5e-2].iter().map(|x| x / t_total).collect();
    let ps: Vec<f64> = rs
        .iter()
        .map(|&r| {
            mean_nonharmonic_probability(&s.with_omega_r(r), grid, 2_000, 4)
                .unwrap()
                .ln()
        })
        .collect();
    let slope = ls_slope(&rs.iter().map(|r| r.ln()).collect::<Vec<_>>(), &ps);
    assert!((slope - 2.0).abs() < 0.05, "{slope}");
}
