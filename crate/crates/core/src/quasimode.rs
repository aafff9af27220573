//! Leading-order Gaussian-beam quasimodes at phase-space points with positive
//! self-bracket, and their residual against a discretized operator. The
//! residual certifies resolvent blow-up at z = p(center) from below.

use std::io::Write as _;
use std::path::Path;

use ndarray::prelude::*;
use ndarray_linalg::{Lapack, Norm, Scalar};
use num_complex::Complex;

use crate::error::{CoreError, CoreResult};
use crate::fit::fmt17;
use crate::num::{real, to_f64, Real};
use crate::operators::{Basis, DiscretizedOperator};
use crate::phase::PhasePoint;
use crate::symbol::SemiclassicalSymbol;

/// A normalized Gaussian beam sampled on a uniform circle grid.
#[derive(Debug, Clone)]
pub struct GaussianBeam<F: Real> {
    pub center: PhasePoint<F>,
    /// Quadratic phase coefficient with Im > 0.
    pub a: Complex<F>,
    pub h: F,
    /// Samples on x_j = 2 pi j / M, unit discrete L2 norm.
    pub samples: Vec<Complex<F>>,
    /// The pinned spectral parameter p(center).
    pub target_z: Complex<F>,
}

fn smoothstep<F: Real>(u: F) -> F {
    let u = u.max(F::zero()).min(F::one());
    u * u * (real::<F>(3.0) - real::<F>(2.0) * u)
}

/// Build the beam u(x) = chi(d) exp(i (xi0 d + A d^2/2)/h), d the wrapped
/// distance to x0, with A the root of (dp/dxi) A + dp/dx = 0. The smooth
/// cutoff is supported on half the circle. Fails when the self-bracket is
/// not positive (no root with Im A > 0) or the grid cannot resolve the
/// sqrt(h) beam width with 8 points.
pub fn make_beam<F: Real>(
    sym: &SemiclassicalSymbol<F>,
    rho: &PhasePoint<F>,
    h: F,
    grid_points: usize,
) -> CoreResult<GaussianBeam<F>> {
    if sym.dim() != 1 {
        return Err(CoreError::InvalidArgument(
            "beam construction supports one-dimensional symbols".into(),
        ));
    }
    let period = sym.periods()[0].ok_or_else(|| {
        CoreError::UnsupportedModel("beam construction needs a periodic (circle) model".into())
    })?;
    if h <= F::zero() {
        return Err(CoreError::InvalidArgument("h must be positive".into()));
    }
    let bracket = sym.poisson_bracket_self(rho)?;
    if bracket <= F::zero() {
        return Err(CoreError::ConstructionError(format!(
            "self-bracket {} is not positive at the requested center",
            bracket
        )));
    }
    let g = sym.grad(rho);
    if g.dxi[0].norm() == F::zero() {
        return Err(CoreError::ConstructionError(
            "dp/dxi vanishes; eikonal root undefined".into(),
        ));
    }
    let a = -g.dx[0] / g.dxi[0];
    if a.im <= F::zero() {
        return Err(CoreError::ConstructionError(format!(
            "eikonal root has Im A = {} <= 0",
            a.im
        )));
    }

    let width = h.sqrt();
    let dx = period / real::<F>(grid_points as f64);
    if width / dx < real(8.0) {
        return Err(CoreError::ResolutionError(format!(
            "grid too coarse: {} points across the beam width, need 8",
            to_f64(width / dx)
        )));
    }

    let x0 = rho.x[0];
    let xi0 = rho.xi[0];
    let pi = F::PI();
    let half_pi = pi * real::<F>(0.5);
    let quarter_pi = pi * real::<F>(0.25);
    let inv_h = Complex::new(F::zero(), F::one() / h);
    let mut samples = Vec::with_capacity(grid_points);
    let mut norm_sq = F::zero();
    for j in 0..grid_points {
        let x = dx * real::<F>(j as f64);
        // wrapped displacement in (-period/2, period/2]
        let mut d = x - x0;
        while d > period * real::<F>(0.5) {
            d = d - period;
        }
        while d <= -period * real::<F>(0.5) {
            d = d + period;
        }
        let chi = smoothstep((half_pi - d.abs()) / quarter_pi);
        let phase = Complex::new(xi0 * d, F::zero()) + a * Complex::new(d * d * real::<F>(0.5), F::zero());
        let v = Complex::new(chi, F::zero()) * (inv_h * phase).exp();
        norm_sq = norm_sq + v.norm_sqr();
        samples.push(v);
    }
    norm_sq = norm_sq * dx;
    let scale = Complex::new(F::one() / norm_sq.sqrt(), F::zero());
    for v in &mut samples {
        *v = *v * scale;
    }
    Ok(GaussianBeam {
        center: rho.clone(),
        a,
        h,
        samples,
        target_z: sym.eval(rho),
    })
}

impl<F: Real> GaussianBeam<F> {
    /// Discrete L2 norm on the beam grid (should be 1).
    pub fn norm(&self) -> F {
        let dx = real::<F>(2.0 * std::f64::consts::PI / self.samples.len() as f64);
        (self.samples.iter().map(|c| c.norm_sqr()).fold(F::zero(), |a, b| a + b) * dx).sqrt()
    }

    /// Second moment of |u|^2 about the center (wrapped); scales like h.
    pub fn second_moment(&self) -> F {
        let m = self.samples.len();
        let period = real::<F>(2.0 * std::f64::consts::PI);
        let dx = period / real::<F>(m as f64);
        let x0 = self.center.x[0];
        let mut acc = F::zero();
        for (j, c) in self.samples.iter().enumerate() {
            let x = dx * real::<F>(j as f64);
            let mut d = x - x0;
            while d > period * real::<F>(0.5) {
                d = d - period;
            }
            while d <= -period * real::<F>(0.5) {
                d = d + period;
            }
            acc = acc + d * d * c.norm_sqr();
        }
        acc * dx
    }

    /// Coefficients on the orthonormal Fourier modes n = -N/2 .. N/2-1 and
    /// the L2 energy left above those modes.
    pub fn fourier_coefficients(&self, n_modes: usize) -> CoreResult<(Array1<Complex<F>>, F)> {
        let m = self.samples.len();
        if m < 2 * n_modes {
            return Err(CoreError::ResolutionError(format!(
                "beam grid ({m} points) too coarse for a {n_modes}-mode transform"
            )));
        }
        let dx = real::<F>(2.0 * std::f64::consts::PI / m as f64);
        let root = real::<F>(1.0 / (2.0 * std::f64::consts::PI).sqrt());
        let half = n_modes as i64 / 2;
        let mut coeffs = Array1::zeros(n_modes);
        for (idx, c) in coeffs.iter_mut().enumerate() {
            let n = idx as i64 - half;
            let mut acc = Complex::new(F::zero(), F::zero());
            for (j, &u) in self.samples.iter().enumerate() {
                let angle = real::<F>(-(n as f64) * 2.0 * std::f64::consts::PI * j as f64 / m as f64);
                acc = acc + u * Complex::from_polar(F::one(), angle);
            }
            *c = acc * Complex::new(dx * root, F::zero());
        }
        let total: F = self.samples.iter().map(|c| c.norm_sqr()).fold(F::zero(), |a, b| a + b) * dx;
        let captured: F = coeffs.iter().map(|c| c.norm_sqr()).fold(F::zero(), |a, b| a + b);
        Ok((coeffs, total - captured))
    }

    /// CSV columns x, re_u, im_u.
    pub fn write_csv(&self, path: &Path) -> CoreResult<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        out.write_all(b"x,re_u,im_u\n")?;
        let m = self.samples.len();
        for (j, c) in self.samples.iter().enumerate() {
            let x = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            writeln!(
                out,
                "{},{},{}",
                fmt17(x),
                fmt17(to_f64(c.re)),
                fmt17(to_f64(c.im))
            )?;
        }
        Ok(())
    }
}

/// ||(A - z) u|| with the beam transformed to the operator's Fourier basis.
/// z must equal the beam's pinned p(center) to 1e-10, and the beam energy
/// above mode N/2 must stay below 1e-10.
pub fn residual<F: Real>(
    op: &DiscretizedOperator<F>,
    beam: &GaussianBeam<F>,
    z: Complex<F>,
) -> CoreResult<F>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    match op.basis {
        Basis::FourierCircle | Basis::FourierTorus => {}
        Basis::Hermite => {
            return Err(CoreError::InvalidArgument(
                "residual needs a Fourier-basis operator".into(),
            ))
        }
    }
    if (z - beam.target_z).norm() > real(1e-10) {
        return Err(CoreError::InvalidArgument(format!(
            "z must equal p(center); offset {:e}",
            to_f64((z - beam.target_z).norm())
        )));
    }
    let (coeffs, tail) = beam.fourier_coefficients(op.n())?;
    if tail > real(1e-10) {
        return Err(CoreError::ResolutionError(format!(
            "beam energy above mode N/2 is {:e} > 1e-10",
            to_f64(tail)
        )));
    }
    let av = op.matrix.dot(&coeffs);
    let res = (&av - &coeffs.mapv(|c| c * z)).norm_l2();
    Ok(res)
}
