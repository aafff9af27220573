//! Property tests for the structural invariants.

use proptest::prelude::*;

use num_complex::Complex64;
use sspc_core::models;
use sspc_core::phase::PhasePoint;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn holomorphic_extension_restricts_to_real_evaluation(
        x in -6.0f64..6.0,
        xi in -3.9f64..3.9,
        amp in 0.1f64..3.0,
    ) {
        for sym in [
            models::circle_advection::<f64>(amp, None),
            models::circle_advection::<f64>(amp, Some(Complex64::new(0.0, amp))),
            models::torus_schrodinger::<f64>(amp),
            models::nsa_harmonic::<f64>(),
        ] {
            let rho = PhasePoint::new1(x, xi);
            let a = sym.eval(&rho);
            let b = sym.eval_complex(&rho.complexify());
            let scale = a.norm().max(1.0);
            prop_assert!((a - b).norm() <= 1e-14 * scale, "{}", sym.name());
        }
    }

    #[test]
    fn gradients_match_finite_differences(
        x in -5.0f64..5.0,
        xi in -3.0f64..3.0,
    ) {
        for sym in [
            models::circle_advection::<f64>(1.0, None),
            models::torus_schrodinger::<f64>(1.0),
            models::nsa_harmonic::<f64>(),
        ] {
            let worst = sym.verify_gradient(&PhasePoint::new1(x, xi), 1e-5);
            prop_assert!(worst < 1e-8, "{}: {}", sym.name(), worst);
        }
    }

    #[test]
    fn self_bracket_is_real_valued_combination(
        x in -3.0f64..3.0,
        xi in -3.0f64..3.0,
    ) {
        // the bracket comes out as a real scalar built from the gradient; it
        // must equal twice the imaginary part of dxi * conj(dx)
        let sym = models::nsa_harmonic::<f64>();
        let rho = PhasePoint::new1(x, xi);
        let v = sym.poisson_bracket_self(&rho).unwrap();
        prop_assert!((v - (-8.0 * x * xi)).abs() < 1e-10 * (1.0 + v.abs()));
    }

    #[test]
    fn power_law_fit_recovers_exponent(
        exponent in -2.0f64..4.0,
        constant in 0.1f64..10.0,
    ) {
        let xs: Vec<f64> = (1..=16).map(|i| i as f64 / 4.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| constant * x.powf(exponent)).collect();
        let fit = sspc_core::fit_power_law(&xs, &ys, (0.0, 5.0)).unwrap();
        prop_assert!((fit.exponent - exponent).abs() < 1e-9);
        prop_assert!((fit.constant - constant).abs() < 1e-9 * constant);
        prop_assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn accumulated_integral_monotone_in_t(
        x0 in -2.0f64..2.0,
        steps in 32usize..128,
    ) {
        let sym = models::circle_advection::<f64>(1.0, Some(Complex64::new(0.0, 1.0)));
        let rho = PhasePoint::new1(x0, 0.0);
        let j1 = sym.accumulate_j(&rho, 0.4, steps).unwrap();
        let j2 = sym.accumulate_j(&rho, 0.8, steps).unwrap();
        prop_assert!(j1 >= 0.0 && j2 >= j1 - 1e-12);
    }
}
