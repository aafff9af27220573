//! Quasimode residual sweeps: blow-up certification and scaling in h.

use num_complex::Complex64;
use sspc_core::fit::fit_power_law;
use sspc_core::models;
use sspc_core::operators::{build_circle_model, TrigPoly};
use sspc_core::phase::PhasePoint;
use sspc_core::quasimode::{make_beam, residual};
use sspc_core::spectral::resolvent_norm;
use sspc_core::CoreError;

#[test]
fn residual_scaling_and_blowup() {
    let sym = models::circle_advection::<f64>(1.0, None);
    let rho = PhasePoint::new1(std::f64::consts::FRAC_PI_2, 0.0);
    assert!(sym.poisson_bracket_self(&rho).unwrap() > 0.0);

    let hs: Vec<f64> = (5..=9).map(|k| 2f64.powi(-k)).collect();
    let mut residuals = Vec::new();
    for &h in &hs {
        let beam = make_beam(&sym, &rho, h, 2048).unwrap();
        assert!((beam.norm() - 1.0).abs() < 1e-12);
        let op = build_circle_model(&TrigPoly::icos(1.0), h, 256, None).unwrap();
        let r = residual(&op, &beam, beam.target_z).unwrap();
        // variational bound: the resolvent at z = p(rho) is at least 1/r
        let rn = match resolvent_norm(&op, beam.target_z) {
            Ok(v) => v,
            Err(CoreError::NumericallySingular { lower_bound }) => lower_bound,
            Err(e) => panic!("{e}"),
        };
        assert!(r * rn >= 1.0 - 1e-8);
        residuals.push(r);
    }
    let fit = fit_power_law(&hs, &residuals, (0.0, 1.0)).unwrap();
    assert!(fit.exponent >= 0.9, "residual slope {}", fit.exponent);
}

#[test]
fn beam_width_scales_like_sqrt_h() {
    let sym = models::circle_advection::<f64>(1.0, None);
    let rho = PhasePoint::new1(std::f64::consts::FRAC_PI_2, 0.0);
    let hs: Vec<f64> = (5..=9).map(|k| 2f64.powi(-k)).collect();
    let moments: Vec<f64> = hs
        .iter()
        .map(|&h| make_beam(&sym, &rho, h, 2048).unwrap().second_moment())
        .collect();
    let fit = fit_power_law(&hs, &moments, (0.0, 1.0)).unwrap();
    assert!(
        (fit.exponent - 1.0).abs() <= 0.1,
        "second-moment slope {}",
        fit.exponent
    );
}

#[test]
fn beam_export_format() {
    let sym = models::circle_advection::<f64>(1.0, None);
    let rho = PhasePoint::new1(std::f64::consts::FRAC_PI_2, 0.0);
    let beam = make_beam(&sym, &rho, 1.0 / 32.0, 512).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("beam.csv");
    beam.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x,re_u,im_u\n"));
    assert_eq!(text.lines().count(), 1 + 512);
    assert!(!text.contains('\r'));
}

#[test]
fn aliasing_guard_fires_on_tiny_operator() {
    let sym = models::circle_advection::<f64>(1.0, None);
    let rho = PhasePoint::new1(std::f64::consts::FRAC_PI_2, 0.0);
    let beam = make_beam(&sym, &rho, 1.0 / 256.0, 4096).unwrap();
    // 32 modes cannot hold a beam of width 1/16
    let op = build_circle_model(&TrigPoly::icos(1.0), 1.0 / 256.0, 32, None).unwrap();
    let err = residual(&op, &beam, beam.target_z).unwrap_err();
    assert!(matches!(err, CoreError::ResolutionError(_)));
}

#[test]
fn hermite_basis_is_rejected() {
    let sym = models::circle_advection::<f64>(1.0, None);
    let rho = PhasePoint::new1(std::f64::consts::FRAC_PI_2, 0.0);
    let beam = make_beam(&sym, &rho, 1.0 / 32.0, 1024).unwrap();
    let op = sspc_core::operators::build_hermite_oscillator::<f64>(64).unwrap();
    let err = residual(&op, &beam, beam.target_z).unwrap_err();
    assert!(matches!(err, CoreError::InvalidArgument(_)));
}
