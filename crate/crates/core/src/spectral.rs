//! Resolvent norms and pseudospectrum maps, semigroup propagation with its
//! decay-law fit, the truncated-Laplace quadrature resolvent, and
//! critical-radius bisection sweeps.

use std::io::Write as _;
use std::path::Path;

use ndarray::prelude::*;
use ndarray_linalg::{Inverse, Lapack, Scalar};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{CoreError, CoreResult};
use crate::fit::{fit_power_law, fmt17, ScalingFit};
use crate::linalg::{expm, gauss_legendre, sigma_extremes, sigma_min_inverse_iteration};
use crate::num::{real, to_f64, Real};
use crate::operators::DiscretizedOperator;

/// Size above which the smallest singular value is found by inverse
/// iteration instead of a full decomposition.
const FULL_SVD_LIMIT: usize = 1024;

fn shifted<F: Real>(op: &DiscretizedOperator<F>, z: Complex<F>) -> Array2<Complex<F>> {
    let mut m = op.matrix.mapv(|c| -c);
    for d in 0..op.n() {
        m[[d, d]] += z;
    }
    m
}

/// ||(z - A)^{-1}|| as 1/sigma_min(zI - A). A numerically singular shift
/// (sigma_min < 1e-14 ||A||) reports a lower bound instead of a value.
pub fn resolvent_norm<F: Real>(op: &DiscretizedOperator<F>, z: Complex<F>) -> CoreResult<F>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    let m = shifted(op, z);
    let (sig_max, sig_min) = if op.n() <= FULL_SVD_LIMIT {
        sigma_extremes(&m)?
    } else {
        let hi = crate::linalg::sigma_max(&op.matrix)? + z.norm();
        let lo = sigma_min_inverse_iteration(&m, real(1e-8), 400)?;
        (hi, lo)
    };
    let floor = real::<F>(1e-14) * sig_max;
    if sig_min < floor {
        return Err(CoreError::NumericallySingular {
            lower_bound: to_f64(F::one() / floor),
        });
    }
    Ok(F::one() / sig_min)
}

/// Direct dense inverse (z - A)^{-1}, the oracle for the quadrature resolvent.
pub fn direct_resolvent<F: Real>(
    op: &DiscretizedOperator<F>,
    z: Complex<F>,
) -> CoreResult<Array2<Complex<F>>>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    shifted(op, z).inv().map_err(CoreError::Linalg)
}

/// Rectangle in the complex plane.
#[derive(Debug, Clone, Copy)]
pub struct ComplexRect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

/// log10 resolvent norms over a z-lattice. Nodes colliding with eigenvalues
/// are flagged and carry the lower bound instead.
#[derive(Debug, Clone)]
pub struct PseudospectrumMap<F: Real> {
    pub rect: ComplexRect,
    pub nx: usize,
    pub ny: usize,
    /// Row-major over the lattice: iy (imaginary axis) outer, ix inner.
    pub values: Vec<F>,
    pub flagged: Vec<bool>,
    pub h: F,
    pub model_id: String,
}

pub fn pseudospectrum_map<F: Real>(
    op: &DiscretizedOperator<F>,
    rect: ComplexRect,
    nx: usize,
    ny: usize,
) -> CoreResult<PseudospectrumMap<F>>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    if nx < 2 || ny < 2 || nx * ny > 1_000_000 {
        return Err(CoreError::InvalidArgument(
            "pseudospectrum lattice needs 2 <= nx, ny and nx*ny <= 1e6".into(),
        ));
    }
    let zs: Vec<Complex<F>> = (0..nx * ny)
        .map(|idx| {
            let ix = idx % nx;
            let iy = idx / nx;
            Complex::new(
                real::<F>(rect.re_lo + (rect.re_hi - rect.re_lo) * ix as f64 / (nx - 1) as f64),
                real::<F>(rect.im_lo + (rect.im_hi - rect.im_lo) * iy as f64 / (ny - 1) as f64),
            )
        })
        .collect();
    let results: Vec<(F, bool)> = zs
        .par_iter()
        .map(|&z| match resolvent_norm(op, z) {
            Ok(v) => (v.log10(), false),
            Err(CoreError::NumericallySingular { lower_bound }) => {
                (real::<F>(lower_bound.log10()), true)
            }
            Err(_) => (F::nan(), true),
        })
        .collect();
    let (values, flagged) = results.into_iter().unzip();
    Ok(PseudospectrumMap {
        rect,
        nx,
        ny,
        values,
        flagged,
        h: op.h,
        model_id: op.model_id.clone(),
    })
}

impl<F: Real> PseudospectrumMap<F> {
    /// CSV columns re_z, im_z, log10_norm in row-major lattice order.
    pub fn write_csv(&self, path: &Path) -> CoreResult<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        out.write_all(b"re_z,im_z,log10_norm\n")?;
        for iy in 0..self.ny {
            let im = self.rect.im_lo
                + (self.rect.im_hi - self.rect.im_lo) * iy as f64 / (self.ny - 1) as f64;
            for ix in 0..self.nx {
                let re = self.rect.re_lo
                    + (self.rect.re_hi - self.rect.re_lo) * ix as f64 / (self.nx - 1) as f64;
                writeln!(
                    out,
                    "{},{},{}",
                    fmt17(re),
                    fmt17(im),
                    fmt17(to_f64(self.values[iy * self.nx + ix]))
                )?;
            }
        }
        Ok(())
    }
}

/// Operator norms of exp(-t A / h) along a time grid.
#[derive(Debug, Clone)]
pub struct SemigroupTrace<F: Real> {
    pub t: Vec<F>,
    pub norms: Vec<F>,
    pub h: F,
    /// False when the build carries no accretivity guarantee; norms may grow.
    pub accretive: bool,
}

/// Propagate by composed matrix exponentials over the grid intervals and
/// record the operator norm at each grid time. Each interval is refined by
/// step halving until successive norm profiles agree to 1e-8 relative.
pub fn semigroup_trace<F: Real>(
    op: &DiscretizedOperator<F>,
    t_grid: &[F],
) -> CoreResult<SemigroupTrace<F>>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    if t_grid.is_empty() || t_grid[0] != F::zero() {
        return Err(CoreError::InvalidArgument(
            "semigroup t-grid must start at 0".into(),
        ));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::InvalidArgument(
            "semigroup t-grid must be strictly increasing".into(),
        ));
    }
    let n = op.n();
    let tol = real::<F>(1e-8);
    let mut prev: Option<Vec<F>> = None;
    for halving in 0..5u32 {
        let substeps = 1usize << halving;
        let mut u: Array2<Complex<F>> = Array2::eye(n);
        let mut norms = vec![F::one()];
        for w in t_grid.windows(2) {
            let dt = (w[1] - w[0]) / real::<F>(substeps as f64);
            let factor = expm(&op.matrix.mapv(|c| -c * Complex::new(dt / op.h, F::zero())))?;
            for _ in 0..substeps {
                u = factor.dot(&u);
            }
            let s = crate::linalg::sigma_max(&u)?;
            if !s.is_finite() {
                let diag = gershgorin_max_re_neg(op);
                return Err(CoreError::AssumptionViolation(format!(
                    "semigroup norm overflow; max Re(-A) estimate {diag:.3e} (non-accretive input)"
                )));
            }
            norms.push(s);
        }
        if let Some(p) = &prev {
            let worst = p
                .iter()
                .zip(&norms)
                .map(|(&a, &b)| (a - b).abs() / F::max(b, real(1e-300)))
                .fold(F::zero(), F::max);
            if worst < tol {
                return Ok(SemigroupTrace {
                    t: t_grid.to_vec(),
                    norms,
                    h: op.h,
                    accretive: op.accretive,
                });
            }
        }
        prev = Some(norms);
    }
    Err(CoreError::NonConvergence(
        "semigroup norms did not stabilize under step halving".into(),
    ))
}

fn gershgorin_max_re_neg<F: Real>(op: &DiscretizedOperator<F>) -> f64 {
    let n = op.n();
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let mut radius = F::zero();
        for j in 0..n {
            if i != j {
                radius = radius + op.matrix[[i, j]].norm();
            }
        }
        best = best.max(to_f64(-op.matrix[[i, i]].re + radius));
    }
    best
}

impl<F: Real> SemigroupTrace<F> {
    /// Fit -h ln||U(t)|| against t on [window.0, window.1] (log-log).
    pub fn decay_fit(&self, window: (F, F)) -> CoreResult<ScalingFit> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (&t, &nm) in self.t.iter().zip(&self.norms) {
            if t <= F::zero() {
                continue;
            }
            let y = -self.h * nm.ln();
            xs.push(t);
            ys.push(y);
        }
        fit_power_law(&xs, &ys, window)
    }

    /// CSV columns t, norm.
    pub fn write_csv(&self, path: &Path) -> CoreResult<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        out.write_all(b"t,norm\n")?;
        for (&t, &nm) in self.t.iter().zip(&self.norms) {
            writeln!(out, "{},{}", fmt17(to_f64(t)), fmt17(to_f64(nm)))?;
        }
        Ok(())
    }
}

/// Approximate (zI - A)^{-1} by the truncated Laplace transform of the
/// semigroup: -(1/h) * integral over [0, h^delta] of e^{tz/h} U(t) dt,
/// by composite Gauss-Legendre with panel doubling until the Frobenius
/// change drops below 1e-6 relative.
pub fn quadrature_resolvent<F: Real>(
    op: &DiscretizedOperator<F>,
    z: Complex<F>,
    delta: F,
    quad_points: usize,
) -> CoreResult<Array2<Complex<F>>>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    quadrature_resolvent_opts(op, z, delta, quad_points, 16, 6)
}

pub fn quadrature_resolvent_opts<F: Real>(
    op: &DiscretizedOperator<F>,
    z: Complex<F>,
    delta: F,
    quad_points: usize,
    initial_panels: usize,
    max_doublings: usize,
) -> CoreResult<Array2<Complex<F>>>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    if quad_points < 2 {
        return Err(CoreError::InvalidArgument("need >= 2 quadrature points".into()));
    }
    if let Some(k) = op.bracket_k {
        let crit = delta * real::<F>((k + 1) as f64);
        if crit >= F::one() {
            return Err(CoreError::InvalidArgument(format!(
                "delta (k+1) = {} must be < 1 for the truncated transform",
                crit
            )));
        }
    }
    let horizon = op.h.powf(delta);
    let n = op.n();
    let (nodes, weights) = gauss_legendre::<F>(quad_points);
    let half = real::<F>(0.5);

    let mut prev: Option<Array2<Complex<F>>> = None;
    let mut prev_norm = F::zero();
    let mut panels = initial_panels.max(1);
    for _ in 0..=max_doublings {
        let dt = horizon / real::<F>(panels as f64);
        // X = e^{z dt / h} U(dt); panel p contributes E_i X^p, so the double
        // sum factors into (sum_i w_i E_i) * (sum_p X^p).
        let step_phase = (z * Complex::new(dt / op.h, F::zero())).exp();
        let x = expm(&op.matrix.mapv(|c| -c * Complex::new(dt / op.h, F::zero())))?
            .mapv(|c| c * step_phase);
        let mut weighted: Array2<Complex<F>> = Array2::zeros((n, n));
        for (&node, &w) in nodes.iter().zip(&weights) {
            let zeta = half * (node + F::one());
            let tau = zeta * dt;
            let phase = (z * Complex::new(tau / op.h, F::zero())).exp();
            let e = expm(&op.matrix.mapv(|c| -c * Complex::new(tau / op.h, F::zero())))?;
            weighted = weighted + e.mapv(|c| c * phase * Complex::new(half * dt * w, F::zero()));
        }
        let geom = geometric_sum(&x, panels)?;
        let integral = weighted.dot(&geom);
        let r = integral.mapv(|c| -c / Complex::new(op.h, F::zero()));
        let norm = frobenius(&r);
        if let Some(p) = &prev {
            let diff = frobenius(&(&r - p));
            if diff <= real::<F>(1e-6) * norm {
                return Ok(r);
            }
        }
        prev = Some(r);
        prev_norm = norm;
        panels *= 2;
    }
    Err(CoreError::NonConvergence(format!(
        "quadrature resolvent: panels up to {} did not converge (last norms {:.6e}, {:.6e})",
        panels / 2,
        to_f64(prev_norm),
        to_f64(prev.map(|p| frobenius(&p)).unwrap_or(F::nan()))
    )))
}

/// I + X + ... + X^{P-1}, via (I - X)^{-1}(I - X^P) with a Horner fallback
/// when I - X is ill-conditioned.
fn geometric_sum<F: Real>(x: &Array2<Complex<F>>, p: usize) -> CoreResult<Array2<Complex<F>>>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    let n = x.nrows();
    let id: Array2<Complex<F>> = Array2::eye(n);
    if p == 1 {
        return Ok(id);
    }
    let mut xp = x.clone();
    let mut k = p;
    let mut acc: Option<Array2<Complex<F>>> = None;
    // x^p by binary powering
    while k > 0 {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => xp.clone(),
                Some(a) => a.dot(&xp),
            });
        }
        k >>= 1;
        if k > 0 {
            xp = xp.dot(&xp);
        }
    }
    let xpow = acc.unwrap();
    let i_minus_x = &id - x;
    match i_minus_x.inv() {
        Ok(inv) => Ok(inv.dot(&(&id - &xpow))),
        Err(_) => {
            let mut g = id.clone();
            for _ in 0..p - 1 {
                g = &id + &x.dot(&g);
            }
            Ok(g)
        }
    }
}

fn frobenius<F: Real>(a: &Array2<Complex<F>>) -> F {
    a.iter().map(|c| c.norm_sqr()).fold(F::zero(), |x, y| x + y).sqrt()
}

/// Threshold rules for the critical-radius bisection, evaluated at the
/// experiment's semiclassical parameter.
#[derive(Debug, Clone, Copy)]
pub enum ThresholdRule {
    /// scale * exp(h^{-exponent}); the documented default is scale 1,
    /// exponent 1/4.
    ExpPower { scale: f64, exponent: f64 },
    /// scale * h^{-exponent}.
    Power { scale: f64, exponent: f64 },
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::ExpPower { scale: 1.0, exponent: 0.25 }
    }
}

impl ThresholdRule {
    pub fn eval<F: Real>(&self, h: F) -> F {
        let hf = to_f64(h);
        match *self {
            ThresholdRule::ExpPower { scale, exponent } => real(scale * hf.powf(-exponent).exp()),
            ThresholdRule::Power { scale, exponent } => real(scale * hf.powf(-exponent)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriticalRadius<F: Real> {
    pub delta_star: F,
    /// False when the threshold was never crossed up to the right endpoint.
    pub crossed: bool,
    pub threshold: F,
}

/// First distance delta along `direction` from `z0` at which the resolvent
/// norm exceeds `rule(h)`, found by bisection on [0, hi] to tolerance `tol`.
/// Flagged-singular nodes count as above threshold.
pub fn critical_radius<F: Real>(
    op: &DiscretizedOperator<F>,
    h: F,
    z0: Complex<F>,
    direction: Complex<F>,
    rule: ThresholdRule,
    hi: F,
    tol: F,
) -> CoreResult<CriticalRadius<F>>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    if hi <= F::zero() || tol <= F::zero() {
        return Err(CoreError::InvalidArgument(
            "critical_radius needs positive range and tolerance".into(),
        ));
    }
    let threshold = rule.eval(h);
    let above = |delta: F| -> CoreResult<bool> {
        match resolvent_norm(op, z0 + direction * Complex::new(delta, F::zero())) {
            Ok(v) => Ok(v >= threshold),
            Err(CoreError::NumericallySingular { .. }) => Ok(true),
            Err(e) => Err(e),
        }
    };
    if !above(hi)? {
        return Ok(CriticalRadius {
            delta_star: hi,
            crossed: false,
            threshold,
        });
    }
    let mut lo = F::zero();
    let mut up = hi;
    while up - lo > tol {
        let mid = (lo + up) * real::<F>(0.5);
        if above(mid)? {
            up = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalRadius {
        delta_star: (lo + up) * real::<F>(0.5),
        crossed: true,
        threshold,
    })
}
