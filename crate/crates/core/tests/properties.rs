use core::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use superres_core::analytics::{fisher_r_detuned, p_bessel, p_detuned, Convention};
use superres_core::estimation::binomial_loglik;
use superres_core::fisherinfo::{
    classical_fi_matrix, qfi, qfi_matrix, sqrt_rho_deriv_trace, FnFamily, ParamFamily, RandomBlockFamily, RandomFamily,
};
use superres_core::memoryqubit::{build_phase_state, dft_spectrum, Sampling};
use superres_core::signal::{accumulated_phase_free, two_tone_phase_pulsed, PulsePlan, Quadratures, TwoToneSignal};

fn conv() -> impl Strategy<Value = Convention> {
    prop_oneof![Just(Convention::Physical), Just(Convention::Effective)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn qfi_sandwiched_by_sqrt_derivative(seed in any::<u64>(), dim in 2usize..6, theta in -1.0f64..1.0) {
        let fam = RandomFamily::generate(dim, &mut ChaCha8Rng::seed_from_u64(seed));
        let q = qfi(&fam, &[theta], 0).unwrap();
        let s = sqrt_rho_deriv_trace(&fam, &[theta], 0).unwrap();
        prop_assert!(2.0 * s <= q * (1.0 + 1e-6), "2s = {} > qfi = {}", 2.0 * s, q);
        prop_assert!(q <= 4.0 * s * (1.0 + 1e-6), "qfi = {} > 4s = {}", q, 4.0 * s);
    }

    #[test]
    fn quantum_matrix_dominates_classical(seed in any::<u64>(), regular in any::<bool>(), u in -1.0f64..1.0) {
        let fam = RandomBlockFamily::generate(regular, &mut ChaCha8Rng::seed_from_u64(seed));
        let theta = [0.3, u];
        let q = qfi_matrix(&fam, &theta).unwrap();
        let c = classical_fi_matrix(&fam, &theta).unwrap();
        let diff = &q.entries - &c.entries;
        let lo = diff.symmetric_eigen().eigenvalues.min();
        prop_assert!(lo >= -1e-6 * q.entries.norm().max(1.0), "min eig {}", lo);
    }

    #[test]
    fn qfi_stable_under_step_halving(seed in any::<u64>(), theta in -1.0f64..1.0) {
        let fam = RandomFamily::generate(3, &mut ChaCha8Rng::seed_from_u64(seed));
        let coarse = FnFamily::new(vec![2e-5], |t: &[f64]| fam.evaluate(t));
        let fine = FnFamily::new(vec![1e-5], |t: &[f64]| fam.evaluate(t));
        let a = qfi(&coarse, &[theta], 0).unwrap();
        let b = qfi(&fine, &[theta], 0).unwrap();
        prop_assert!((a - b).abs() <= 1e-5 * b.abs().max(1e-3), "{} vs {}", a, b);
    }

    #[test]
    fn probabilities_stay_in_unit_interval(d in -20.0f64..20.0, r in 0.0f64..3.0, s in 0.0f64..20.0, c in conv()) {
        let p = p_detuned(d, r, s, c).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        let b = p_bessel(d - r, d + r, s).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
    }

    #[test]
    fn fisher_mirror_symmetric_in_detuning(d in 0.5f64..12.0, r in 1e-3f64..0.2, s in 0.2f64..6.0, c in conv()) {
        let a = fisher_r_detuned(d, r, s, c).unwrap().value;
        let b = fisher_r_detuned(-d, r, s, c).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12));
    }

    #[test]
    fn free_phase_invariant_under_tone_exchange(
        q in prop::array::uniform4(-3.0f64..3.0),
        ws in 1.0f64..50.0,
        r in 0.01f64..0.5,
        t in 0.1f64..3.0,
    ) {
        let q = Quadratures::new(q[0], q[1], q[2], q[3]);
        let s = TwoToneSignal::gaussian(ws, r, 1.0).unwrap();
        let a = accumulated_phase_free(&q, &s, t).unwrap();
        let b = accumulated_phase_free(&q.swapped(), &s.with_omega_r(-r), t).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn pulsed_phase_odd_in_quadratures(q in prop::array::uniform4(-3.0f64..3.0), r in 0.001f64..0.05) {
        let n = 200;
        let ws = n as f64 * PI - 2.0 * PI;
        let plan = PulsePlan::with_detuning(ws, 2.0 * PI, n).unwrap();
        let s = TwoToneSignal::gaussian(ws, r, 1.0).unwrap();
        let q = Quadratures::new(q[0], q[1], q[2], q[3]);
        let a = two_tone_phase_pulsed(&q, &s, &plan).unwrap();
        let b = two_tone_phase_pulsed(&q.negated(), &s, &plan).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn fourier_spectrum_is_normalized(q in prop::array::uniform4(-50.0f64..50.0), r in 0.0f64..2.0, n in 3usize..12, m in 2usize..12) {
        let s = TwoToneSignal::gaussian(2.0 * PI, r, 1.0).unwrap();
        let st = build_phase_state(&Quadratures::new(q[0], q[1], q[2], q[3]), &s, Sampling::new(n, m).unwrap()).unwrap();
        prop_assert!((st.norm() - 1.0).abs() < 1e-12);
        let total: f64 = dft_spectrum(&st).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_likelihood_peaks_at_frequency(k in 0u64..1000, n in 1000u64..5000, dp in -0.2f64..0.2) {
        let f = k as f64 / n as f64;
        let q = (f + dp).clamp(1e-6, 1.0 - 1e-6);
        prop_assert!(binomial_loglik(k as f64, n as f64, f) >= binomial_loglik(k as f64, n as f64, q) - 1e-9);
    }
}
