//! Resolvent, pseudospectrum and semigroup oracles on the built-in models,
//! with frozen regression values from the first computation.

use ndarray_linalg::OperationNorm;
use num_complex::Complex64;
use sspc_core::operators::{build_circle_model, build_hermite_oscillator, spectrum, TrigPoly};
use sspc_core::spectral::{
    direct_resolvent, pseudospectrum_map, quadrature_resolvent_opts, resolvent_norm,
    semigroup_trace, ComplexRect,
};
use sspc_core::CoreError;

fn rotated_circle(h: f64, n: usize, amp: f64) -> sspc_core::Operator64 {
    build_circle_model(
        &TrigPoly::icos(amp),
        h,
        n,
        Some(Complex64::new(0.0, amp)),
    )
    .unwrap()
}

#[test]
fn resolvent_lower_bound_from_spectrum() {
    // general non-normal bound: ||R(z)|| >= 1/dist(z, spectrum)
    let op = rotated_circle(1.0 / 16.0, 64, 1.0);
    let spec = spectrum(&op).unwrap();
    for &z in &[
        Complex64::new(-0.5, 0.0),
        Complex64::new(0.3, 0.2),
        Complex64::new(1.0, -0.4),
    ] {
        let dist = spec
            .eigenvalues
            .iter()
            .map(|&ev| (ev - z).norm())
            .fold(f64::INFINITY, f64::min);
        match resolvent_norm(&op, z) {
            Ok(v) => assert!(v >= 1.0 / dist - 1e-8, "z = {z}: {v} vs 1/{dist}"),
            Err(CoreError::NumericallySingular { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn boundary_norm_scales_like_h_to_minus_two_thirds() {
    // frozen oracle: ||R(0)|| * h^{2/3} ~ 1.68 across the h sweep
    for k in [5, 6, 7, 8] {
        let h = 2f64.powi(-k);
        let op = rotated_circle(h, 128, 1.0);
        let v = resolvent_norm(&op, Complex64::new(0.0, 0.0)).unwrap();
        let c = v * h.powf(2.0 / 3.0);
        assert!((c - 1.68).abs() < 0.03, "h = 2^-{k}: C0 = {c}");
    }
}

#[test]
fn strip_norms_grow_monotonically_into_the_range() {
    let op = rotated_circle(1.0 / 32.0, 128, 1.0);
    let mut prev = 0.0;
    for i in 0..11 {
        let re = -0.2 + 0.05 * i as f64;
        let v = resolvent_norm(&op, Complex64::new(re, 0.0)).unwrap();
        assert!(v > prev, "not monotone at Re z = {re}");
        prev = v;
    }
}

#[test]
fn pseudospectrum_regression_values_nsa_oscillator() {
    // frozen from the first computation (N = 200)
    let op = build_hermite_oscillator::<f64>(200).unwrap();
    for (z, expect) in [
        (Complex64::new(10.0, 10.0), 2.069560),
        (Complex64::new(5.0, 15.0), 0.327703),
        (Complex64::new(20.0, 5.0), 0.188574),
        (Complex64::new(15.0, 15.5), 3.479592),
    ] {
        let v = resolvent_norm(&op, z).unwrap().log10();
        assert!((v - expect).abs() < 1e-4, "z = {z}: {v} vs {expect}");
    }
}

#[test]
fn pseudospectrum_map_bulges_between_eigenvalue_rays() {
    // on the segment between consecutive eigenvalues (2n+1)e^{i pi/4}, the
    // midpoint norm exceeds both near-eigenvalue offsets along the ray
    let op = build_hermite_oscillator::<f64>(200).unwrap();
    let map = pseudospectrum_map(
        &op,
        ComplexRect { re_lo: 8.0, re_hi: 16.0, im_lo: 8.0, im_hi: 16.0 },
        9,
        9,
    )
    .unwrap();
    assert_eq!(map.values.len(), 81);
    assert!(map.values.iter().all(|v| v.is_finite()));
    // interior levels rise toward the ray (diagonal of the square)
    let at = |ix: usize, iy: usize| map.values[iy * 9 + ix];
    assert!(at(4, 4) > at(0, 8) && at(4, 4) > at(8, 0));
}

#[test]
fn semigroup_decay_exponent_single_h() {
    let op = rotated_circle(1.0 / 128.0, 192, 1.0);
    let grid: Vec<f64> = (0..=16).map(|i| i as f64 * 0.025).collect();
    let trace = semigroup_trace(&op, &grid).unwrap();
    assert!(trace.norms.iter().all(|&n| n <= 1.0 + 1e-8));
    let fit = trace.decay_fit((0.15, 0.4)).unwrap();
    assert!(
        fit.exponent > 2.7 && fit.exponent < 3.3,
        "exponent {}",
        fit.exponent
    );
    assert!(fit.r_squared >= 0.98);
}

#[test]
fn quadrature_resolvent_agrees_with_direct_inverse() {
    // tail-controlled configuration: amplitude 8, h = 1/32, delta = 0.02
    let h = 1.0 / 32.0;
    let op = rotated_circle(h, 384, 8.0);
    let z = Complex64::new(-0.6, 0.3);
    let r = quadrature_resolvent_opts(&op, z, 0.02, 8, 16, 6).unwrap();
    let direct = direct_resolvent(&op, z).unwrap();
    let num = (&r - &direct).opnorm_fro().unwrap();
    let den = direct.opnorm_fro().unwrap();
    assert!(num / den <= 1e-3, "relative error {}", num / den);
}

#[test]
fn quadrature_resolvent_extends_into_the_range() {
    let h = 1.0 / 32.0;
    let op = rotated_circle(h, 384, 8.0);
    let z = Complex64::new(0.5 * h.powf(2.0 / 3.0), 0.0);
    let r = quadrature_resolvent_opts(&op, z, 0.02, 8, 16, 6).unwrap();
    let direct = direct_resolvent(&op, z).unwrap();
    let num = (&r - &direct).opnorm_fro().unwrap();
    let den = direct.opnorm_fro().unwrap();
    assert!(num / den <= 1e-2, "relative error {}", num / den);
}

#[test]
fn resolvent_norms_converge_in_n() {
    // doubling N changes elliptic-region norms by < 1e-6 relative
    let h = 1.0 / 32.0;
    let a = rotated_circle(h, 128, 1.0);
    let b = rotated_circle(h, 256, 1.0);
    for &z in &[Complex64::new(-1.0, 0.0), Complex64::new(-0.5, 0.7)] {
        let va = resolvent_norm(&a, z).unwrap();
        let vb = resolvent_norm(&b, z).unwrap();
        assert!((va - vb).abs() / vb < 1e-6, "z = {z}");
    }
}
