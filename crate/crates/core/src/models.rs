//! Built-in model symbols, selectable by registry name plus a parameter map.
//!
//! Names: "circle-advection" (xi + i a cos x on the circle, optionally rotated
//! about z0), "nsa-harmonic" (xi^2 + i x^2 on the line), "torus-schrodinger"
//! (xi^2 + i a cos x on the circle), "kfp" (the kinetic/friction symbol on
//! R^4, bracket-level only).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{CoreError, CoreResult};
use crate::num::{real, Real};
use crate::phase::PhaseBox;
use crate::symbol::{Gradient, SemiclassicalSymbol};

pub const MODEL_NAMES: [&str; 4] = ["circle-advection", "nsa-harmonic", "torus-schrodinger", "kfp"];

fn circle_box<F: Real>() -> PhaseBox<F> {
    PhaseBox::new(
        vec![(F::zero(), real(2.0 * std::f64::consts::PI))],
        vec![(real(-4.0), real(4.0))],
    )
}

fn line_box<F: Real>() -> PhaseBox<F> {
    PhaseBox::new(vec![(real(-6.0), real(6.0))], vec![(real(-6.0), real(6.0))])
}

/// p = xi + i a cos x on S^1; with `rotate = Some(z0)` the symbol i(p - z0).
/// z0 = i a gives the accretive form (1 - a cos x)... scaled: a(1 - cos x) + i xi.
pub fn circle_advection<F: Real>(amplitude: f64, rotate: Option<Complex<F>>) -> SemiclassicalSymbol<F> {
    let a = real::<F>(amplitude);
    let eval = move |x: Complex<F>, xi: Complex<F>| xi + Complex::<F>::i() * Complex::new(a, F::zero()) * x.cos();
    let base = SemiclassicalSymbol::new(
        "circle-advection",
        1,
        Arc::new(move |rho| eval(Complex::new(rho.x[0], F::zero()), Complex::new(rho.xi[0], F::zero()))),
        Arc::new(move |rho| eval(rho.x[0], rho.xi[0])),
        Arc::new(move |rho| {
            let x = rho.x[0];
            Gradient {
                dx: vec![-Complex::<F>::i() * Complex::new(a * x.sin(), F::zero())],
                dxi: vec![Complex::new(F::one(), F::zero())],
            }
        }),
        vec![Some(real(2.0 * std::f64::consts::PI))],
        circle_box(),
    );
    match rotate {
        Some(z0) => base.rotated_about(z0),
        None => base,
    }
}

/// p = xi^2 + i x^2 on the real line (the rescaled non-self-adjoint oscillator).
pub fn nsa_harmonic<F: Real>() -> SemiclassicalSymbol<F> {
    let eval = |x: Complex<F>, xi: Complex<F>| xi * xi + Complex::<F>::i() * x * x;
    SemiclassicalSymbol::new(
        "nsa-harmonic",
        1,
        Arc::new(move |rho| eval(Complex::new(rho.x[0], F::zero()), Complex::new(rho.xi[0], F::zero()))),
        Arc::new(move |rho| eval(rho.x[0], rho.xi[0])),
        Arc::new(move |rho| {
            let two = real::<F>(2.0);
            Gradient {
                dx: vec![Complex::<F>::i() * Complex::new(two * rho.x[0], F::zero())],
                dxi: vec![Complex::new(two * rho.xi[0], F::zero())],
            }
        }),
        vec![None],
        line_box(),
    )
}

/// p = xi^2 + i a cos x on S^1.
pub fn torus_schrodinger<F: Real>(amplitude: f64) -> SemiclassicalSymbol<F> {
    let a = real::<F>(amplitude);
    let eval = move |x: Complex<F>, xi: Complex<F>| xi * xi + Complex::<F>::i() * Complex::new(a, F::zero()) * x.cos();
    SemiclassicalSymbol::new(
        "torus-schrodinger",
        1,
        Arc::new(move |rho| eval(Complex::new(rho.x[0], F::zero()), Complex::new(rho.xi[0], F::zero()))),
        Arc::new(move |rho| eval(rho.x[0], rho.xi[0])),
        Arc::new(move |rho| {
            let x = rho.x[0];
            let two = real::<F>(2.0);
            Gradient {
                dx: vec![-Complex::<F>::i() * Complex::new(a * x.sin(), F::zero())],
                dxi: vec![Complex::new(two * rho.xi[0], F::zero())],
            }
        }),
        vec![Some(real(2.0 * std::f64::consts::PI))],
        circle_box(),
    )
}

/// Kinetic symbol i(y xi - V'(x) eta) + (y^2 + eta^2)/2 on R^4 with
/// V = omega x^2 / 2. Positions (x, y), momenta (xi, eta). Bracket-level model
/// only; no operator build.
pub fn kfp<F: Real>(omega: f64) -> SemiclassicalSymbol<F> {
    let w = real::<F>(omega);
    let half = real::<F>(0.5);
    let eval = move |x: Complex<F>, y: Complex<F>, xi: Complex<F>, eta: Complex<F>| {
        Complex::<F>::i() * (y * xi - Complex::new(w, F::zero()) * x * eta) + (y * y + eta * eta) * half
    };
    let b = real::<F>(8.0);
    SemiclassicalSymbol::new(
        "kfp",
        2,
        Arc::new(move |rho| {
            eval(
                Complex::new(rho.x[0], F::zero()),
                Complex::new(rho.x[1], F::zero()),
                Complex::new(rho.xi[0], F::zero()),
                Complex::new(rho.xi[1], F::zero()),
            )
        }),
        Arc::new(move |rho| eval(rho.x[0], rho.x[1], rho.xi[0], rho.xi[1])),
        Arc::new(move |rho| {
            let (x, y, xi, eta) = (rho.x[0], rho.x[1], rho.xi[0], rho.xi[1]);
            let c = |v: F| Complex::new(v, F::zero());
            Gradient {
                // d/dx = -i w eta ; d/dy = i xi + y
                dx: vec![-Complex::<F>::i() * c(w * eta), Complex::<F>::i() * c(xi) + c(y)],
                // d/dxi = i y ; d/deta = -i w x + eta
                dxi: vec![Complex::<F>::i() * c(y), -Complex::<F>::i() * c(w * x) + c(eta)],
            }
        }),
        vec![None, None],
        PhaseBox::new(
            vec![(-b, b), (-b, b)],
            vec![(-b, b), (-b, b)],
        ),
    )
}

/// Look a model up by registry name. Recognized parameters:
/// `amplitude` (circle/torus, default 1), `rotate_re`/`rotate_im`
/// (circle only; both present enables rotation), `omega` (kfp, default 1).
pub fn by_name<F: Real>(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> CoreResult<SemiclassicalSymbol<F>> {
    match name {
        "circle-advection" => {
            let amp = params.get("amplitude").copied().unwrap_or(1.0);
            let rotate = match (params.get("rotate_re"), params.get("rotate_im")) {
                (None, None) => None,
                (re, im) => Some(Complex::new(
                    real(re.copied().unwrap_or(0.0)),
                    real(im.copied().unwrap_or(0.0)),
                )),
            };
            Ok(circle_advection(amp, rotate))
        }
        "nsa-harmonic" => Ok(nsa_harmonic()),
        "torus-schrodinger" => Ok(torus_schrodinger(
            params.get("amplitude").copied().unwrap_or(1.0),
        )),
        "kfp" => Ok(kfp(params.get("omega").copied().unwrap_or(1.0))),
        other => Err(CoreError::UnsupportedModel(format!(
            "unknown model '{other}'; known: {MODEL_NAMES:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::PhasePoint;
    use approx::assert_relative_eq;

    #[test]
    fn registry_lookup() {
        let mut params = BTreeMap::new();
        params.insert("amplitude".to_string(), 2.0);
        let sym = by_name::<f64>("circle-advection", &params).unwrap();
        let v = sym.eval(&PhasePoint::new1(0.0, 0.5));
        assert_relative_eq!(v.re, 0.5);
        assert_relative_eq!(v.im, 2.0);
        assert!(by_name::<f64>("nope", &params).is_err());
    }

    #[test]
    fn rotated_circle_is_accretive_symbol() {
        let sym = circle_advection::<f64>(1.0, Some(Complex::new(0.0, 1.0)));
        for i in 0..32 {
            let x = 2.0 * std::f64::consts::PI * i as f64 / 32.0;
            for j in -4..=4 {
                let rho = PhasePoint::new1(x, j as f64);
                assert!(sym.re(&rho) >= -1e-14);
            }
        }
        // p' = (1 - cos x) + i xi
        let v = sym.eval(&PhasePoint::new1(1.0, 0.25));
        assert_relative_eq!(v.re, 1.0 - 1.0f64.cos(), epsilon = 1e-15);
        assert_relative_eq!(v.im, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn eval_complex_restricts_to_eval() {
        for sym in [
            circle_advection::<f64>(1.3, None),
            nsa_harmonic::<f64>(),
            torus_schrodinger::<f64>(0.7),
        ] {
            for &(x, xi) in &[(0.3, -1.2), (2.0, 0.4), (-0.9, 3.0)] {
                let rho = PhasePoint::new1(x, xi);
                let a = sym.eval(&rho);
                let b = sym.eval_complex(&rho.complexify());
                let scale = a.norm().max(1.0);
                assert!((a - b).norm() / scale < 1e-14);
            }
        }
        let sym = kfp::<f64>(1.0);
        let rho = PhasePoint::new(vec![0.5, -0.3], vec![1.1, 0.2]);
        let a = sym.eval(&rho);
        let b = sym.eval_complex(&rho.complexify());
        assert!((a - b).norm() / a.norm().max(1.0) < 1e-14);
    }

    #[test]
    fn f32_instantiation_works() {
        let sym = circle_advection::<f32>(1.0, None);
        let v = sym.eval(&PhasePoint::new1(0.0f32, 1.0));
        assert!((v.re - 1.0).abs() < 1e-6 && (v.im - 1.0).abs() < 1e-6);
    }
}
