//! Phase-space symbol algebra: evaluation, Hamiltonian fields and flows,
//! the accumulated integral J(t, rho) of the real part along the imaginary-part
//! flow, derivative-probe classification of boundary points, rotation angles
//! and the self-bracket.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{CoreError, CoreResult};
use crate::num::{real, to_f64, Real};
use crate::phase::{ComplexPhasePoint, PhaseBox, PhasePoint};

/// Which real part of the symbol an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolPart {
    Real,
    Imag,
}

/// Gradient of the symbol: (dp/dx, dp/dxi), each an n-tuple.
#[derive(Debug, Clone)]
pub struct Gradient<F: Real> {
    pub dx: Vec<Complex<F>>,
    pub dxi: Vec<Complex<F>>,
}

impl<F: Real> Gradient<F> {
    pub fn is_finite(&self) -> bool {
        self.dx
            .iter()
            .chain(self.dxi.iter())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs(&self) -> F {
        self.dx
            .iter()
            .chain(self.dxi.iter())
            .map(|c| c.norm())
            .fold(F::zero(), F::max)
    }
}

type EvalFn<F> = dyn Fn(&PhasePoint<F>) -> Complex<F> + Send + Sync;
type EvalComplexFn<F> = dyn Fn(&ComplexPhasePoint<F>) -> Complex<F> + Send + Sync;
type GradFn<F> = dyn Fn(&PhasePoint<F>) -> Gradient<F> + Send + Sync;

/// A semiclassical principal symbol p(x, xi) with analytic gradient and an
/// exact holomorphic extension (every built-in model is entire).
#[derive(Clone)]
pub struct SemiclassicalSymbol<F: Real> {
    name: String,
    dim: usize,
    eval: Arc<EvalFn<F>>,
    eval_complex: Arc<EvalComplexFn<F>>,
    grad: Arc<GradFn<F>>,
    /// Per position coordinate: Some(period) if periodic.
    periods: Vec<Option<F>>,
    domain: PhaseBox<F>,
}

impl<F: Real> std::fmt::Debug for SemiclassicalSymbol<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemiclassicalSymbol")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

/// Classification of a boundary point by the first nonvanishing derivative of
/// t -> Re p(exp(t H_{Im p}) rho) at t = 0.
#[derive(Debug, Clone)]
pub struct BracketClassification<F: Real> {
    pub order_k: usize,
    /// Value of the k-th derivative (equals the iterated-field action on Re p).
    pub coefficient: F,
    /// Derivative estimates for orders 0..=order_k.
    pub probe_values: Vec<F>,
}

impl<F: Real> SemiclassicalSymbol<F> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: Arc<EvalFn<F>>,
        eval_complex: Arc<EvalComplexFn<F>>,
        grad: Arc<GradFn<F>>,
        periods: Vec<Option<F>>,
        domain: PhaseBox<F>,
    ) -> Self {
        assert_eq!(periods.len(), dim);
        assert_eq!(domain.x_ranges.len(), dim);
        SemiclassicalSymbol {
            name: name.into(),
            dim,
            eval,
            eval_complex,
            grad,
            periods,
            domain,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &PhaseBox<F> {
        &self.domain
    }

    pub fn periods(&self) -> &[Option<F>] {
        &self.periods
    }

    pub fn eval(&self, rho: &PhasePoint<F>) -> Complex<F> {
        (self.eval)(rho)
    }

    pub fn eval_complex(&self, rho: &ComplexPhasePoint<F>) -> Complex<F> {
        (self.eval_complex)(rho)
    }

    pub fn grad(&self, rho: &PhasePoint<F>) -> Gradient<F> {
        (self.grad)(rho)
    }

    pub fn re(&self, rho: &PhasePoint<F>) -> F {
        self.eval(rho).re
    }

    pub fn im(&self, rho: &PhasePoint<F>) -> F {
        self.eval(rho).im
    }

    /// Wrap this symbol as i (p - z0). Rotating about a boundary point on the
    /// imaginary axis turns the circle model accretive (Re >= 0).
    pub fn rotated_about(&self, z0: Complex<F>) -> SemiclassicalSymbol<F> {
        let i = Complex::new(F::zero(), F::one());
        let e = self.eval.clone();
        let ec = self.eval_complex.clone();
        let g = self.grad.clone();
        SemiclassicalSymbol {
            name: format!("{}-rotated", self.name),
            dim: self.dim,
            eval: Arc::new(move |rho| i * (e(rho) - z0)),
            eval_complex: Arc::new(move |rho| i * (ec(rho) - z0)),
            grad: Arc::new(move |rho| {
                let gr = g(rho);
                Gradient {
                    dx: gr.dx.iter().map(|&c| i * c).collect(),
                    dxi: gr.dxi.iter().map(|&c| i * c).collect(),
                }
            }),
            periods: self.periods.clone(),
            domain: self.domain.clone(),
        }
    }

    /// Hamilton vector field of the selected real part:
    /// H_f = (df/dxi, -df/dx), f = Re p or Im p.
    pub fn hamiltonian_field(&self, part: SymbolPart, rho: &PhasePoint<F>) -> CoreResult<Vec<F>> {
        let g = self.grad(rho);
        if !g.is_finite() {
            return Err(CoreError::EvaluationFailure(format!(
                "non-finite gradient of {} at {:?}",
                self.name, rho
            )));
        }
        let pick = |c: Complex<F>| match part {
            SymbolPart::Real => c.re,
            SymbolPart::Imag => c.im,
        };
        let mut field = Vec::with_capacity(2 * self.dim);
        field.extend(g.dxi.iter().map(|&c| pick(c)));
        field.extend(g.dx.iter().map(|&c| -pick(c)));
        Ok(field)
    }

    /// Classical RK4 trajectory of the selected Hamiltonian field from rho0.
    /// Returns steps+1 points including the start; endpoint error O((t/steps)^4).
    pub fn flow(
        &self,
        part: SymbolPart,
        rho0: &PhasePoint<F>,
        t: F,
        steps: usize,
    ) -> CoreResult<Vec<PhasePoint<F>>> {
        if steps < 1 {
            return Err(CoreError::InvalidArgument("flow needs steps >= 1".into()));
        }
        if !t.is_finite() || !rho0.is_finite() {
            return Err(CoreError::InvalidArgument("non-finite flow input".into()));
        }
        let periodic: Vec<bool> = self.periods.iter().map(|p| p.is_some()).collect();
        let dt = t / real::<F>(steps as f64);
        let half = real::<F>(0.5);
        let sixth = F::one() / real::<F>(6.0);
        let two = real::<F>(2.0);

        let field = |y: &[F]| -> CoreResult<Vec<F>> {
            self.hamiltonian_field(part, &PhasePoint::from_slice(y))
        };

        let mut traj = Vec::with_capacity(steps + 1);
        traj.push(rho0.clone());
        let mut y = rho0.to_vec();
        for s in 0..steps {
            let k1 = field(&y)?;
            let y2: Vec<F> = y.iter().zip(&k1).map(|(&a, &k)| a + half * dt * k).collect();
            let k2 = field(&y2)?;
            let y3: Vec<F> = y.iter().zip(&k2).map(|(&a, &k)| a + half * dt * k).collect();
            let k3 = field(&y3)?;
            let y4: Vec<F> = y.iter().zip(&k3).map(|(&a, &k)| a + dt * k).collect();
            let k4 = field(&y4)?;
            for i in 0..y.len() {
                y[i] = y[i] + dt * sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
            }
            let p = PhasePoint::from_slice(&y);
            if let Some(coord) = self.domain.first_escape(&p, &periodic) {
                return Err(CoreError::TrajectoryEscaped {
                    escape_time: to_f64(dt) * (s as f64 + 1.0),
                    coordinate: coord,
                });
            }
            traj.push(p);
        }
        Ok(traj)
    }

    /// J(t, rho): composite Simpson quadrature of Re p along the flow of
    /// H_{Im p}. Nonnegative and nondecreasing in t when Re p >= 0 holds
    /// along the trajectory; a negative Re p beyond tolerance is reported
    /// as a violated assumption.
    pub fn accumulate_j(&self, rho: &PhasePoint<F>, t: F, steps: usize) -> CoreResult<F> {
        if t < F::zero() {
            return Err(CoreError::InvalidArgument("accumulate_j needs t >= 0".into()));
        }
        if t == F::zero() {
            return Ok(F::zero());
        }
        let n = steps.max(2).next_multiple_of(2);
        let traj = self.flow(SymbolPart::Imag, rho, t, n)?;
        let neg_tol = real::<F>(-1e-10);
        let mut values = Vec::with_capacity(n + 1);
        for p in &traj {
            let v = self.re(p);
            if v < neg_tol {
                return Err(CoreError::AssumptionViolation(format!(
                    "Re p must be nonnegative along the flow; found {} at {:?}",
                    v, p
                )));
            }
            values.push(v);
        }
        let hstep = t / real::<F>(n as f64);
        let mut sum = values[0] + values[n];
        let four = real::<F>(4.0);
        let two = real::<F>(2.0);
        for (i, &v) in values.iter().enumerate().take(n).skip(1) {
            sum = sum + if i % 2 == 1 { four * v } else { two * v };
        }
        Ok(sum * hstep / real::<F>(3.0))
    }

    /// Evaluate g(t) = Re p(exp(t H_{Im p}) rho) with a flow step short enough
    /// that the RK4 error stays far below the differencing error.
    fn probe_g(&self, rho: &PhasePoint<F>, t: F) -> CoreResult<F> {
        if t == F::zero() {
            return Ok(self.re(rho));
        }
        let steps = (to_f64(t.abs()) / 0.005).ceil().max(8.0) as usize;
        let traj = self.flow(SymbolPart::Imag, rho, t, steps)?;
        Ok(self.re(traj.last().unwrap()))
    }

    /// Smallest j >= 1 with |g^(j)(0)| above tolerance, where
    /// g(t) = Re p(exp(t H_{Im p}) rho). Derivatives are estimated by central
    /// differences with three Richardson levels (step halving from 0.1).
    /// The tolerance is `tol` relative to max(1, largest probe).
    pub fn bracket_order(
        &self,
        rho: &PhasePoint<F>,
        j_max: usize,
        tol: F,
    ) -> CoreResult<BracketClassification<F>> {
        if j_max == 0 || j_max > 8 {
            return Err(CoreError::InvalidArgument(
                "bracket_order needs 1 <= j_max <= 8".into(),
            ));
        }
        let h0 = real::<F>(0.1);
        let mut probes: Vec<F> = vec![self.probe_g(rho, F::zero())?];
        for j in 1..=j_max {
            probes.push(self.derivative_probe(rho, j, h0)?);
        }
        let largest = probes.iter().map(|p| p.abs()).fold(F::zero(), F::max);
        let threshold = tol * F::max(F::one(), largest);

        if probes[0].abs() > threshold {
            return Err(CoreError::InvalidArgument(format!(
                "Re p does not vanish at the probe point: |g(0)| = {} > {}",
                probes[0].abs(),
                threshold
            )));
        }
        for j in 1..=j_max {
            if probes[j].abs() > threshold {
                return Ok(BracketClassification {
                    order_k: j,
                    coefficient: probes[j],
                    probe_values: probes[..=j].to_vec(),
                });
            }
        }
        Err(CoreError::OrderExceedsJmax {
            j_max,
            probes: probes.iter().map(|&p| to_f64(p)).collect(),
            tol: to_f64(threshold),
        })
    }

    /// Richardson-extrapolated central difference of order j at t = 0.
    fn derivative_probe(&self, rho: &PhasePoint<F>, j: usize, h0: F) -> CoreResult<F> {
        let (coeffs, offsets) = central_stencil(j);
        let mut levels = Vec::with_capacity(3);
        for level in 0..3u32 {
            let h = h0 / real::<F>(f64::from(1 << level));
            let mut acc = F::zero();
            for (&c, &o) in coeffs.iter().zip(&offsets) {
                if c == 0.0 {
                    continue;
                }
                let g = self.probe_g(rho, real::<F>(o as f64) * h)?;
                acc = acc + real::<F>(c) * g;
            }
            levels.push(acc / h.powi(j as i32));
        }
        // error expansion in h^2: two extrapolation stages
        let third = real::<F>(1.0 / 3.0);
        let r1a = (real::<F>(4.0) * levels[1] - levels[0]) * third;
        let r1b = (real::<F>(4.0) * levels[2] - levels[1]) * third;
        Ok((real::<F>(16.0) * r1b - r1a) / real::<F>(15.0))
    }

    /// Angle theta in [0, pi) making e^{-i theta} dp real at rho, when the
    /// gradient is proportional to a real covector. The spectral parameter z0
    /// only fixes which boundary point the caller is working at; the
    /// differential of p - z0 does not depend on it.
    pub fn rotation_angle(&self, _z0: Complex<F>, rho: &PhasePoint<F>) -> CoreResult<F> {
        let g = self.grad(rho);
        let scale = g.max_abs();
        if scale == F::zero() {
            return Err(CoreError::GradientVanishes);
        }
        let entries: Vec<Complex<F>> = g.dx.iter().chain(g.dxi.iter()).copied().collect();
        let lead = entries
            .iter()
            .copied()
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
            .unwrap();
        let mut theta = lead.arg();
        let pi = F::PI();
        while theta < F::zero() {
            theta = theta + pi;
        }
        while theta >= pi {
            theta = theta - pi;
        }
        let phase = Complex::from_polar(F::one(), -theta);
        let residual = entries
            .iter()
            .map(|&c| (phase * c).im.abs())
            .fold(F::zero(), F::max);
        let tol = real::<F>(1e-8) * scale;
        if residual > tol {
            return Err(CoreError::NoRotation {
                residual: to_f64(residual),
                tol: to_f64(tol),
            });
        }
        Ok(theta)
    }

    /// i^{-1}{p, pbar}(rho) = 2 sum_j Im(dp/dxi_j * conj(dp/dx_j)).
    /// Positive values admit the Gaussian-beam quasimode construction.
    pub fn poisson_bracket_self(&self, rho: &PhasePoint<F>) -> CoreResult<F> {
        let g = self.grad(rho);
        if !g.is_finite() {
            return Err(CoreError::EvaluationFailure(format!(
                "non-finite gradient of {} at {:?}",
                self.name, rho
            )));
        }
        let two = real::<F>(2.0);
        let mut acc = F::zero();
        for (dxi, dx) in g.dxi.iter().zip(&g.dx) {
            acc = acc + (dxi * dx.conj()).im;
        }
        Ok(two * acc)
    }

    /// Largest relative discrepancy between the analytic gradient and centered
    /// finite differences of eval with the given step. Cross-check only.
    pub fn verify_gradient(&self, rho: &PhasePoint<F>, step: F) -> F {
        let g = self.grad(rho);
        let scale = F::max(F::one(), g.max_abs());
        let mut worst = F::zero();
        let two = real::<F>(2.0);
        for i in 0..self.dim {
            let mut plus = rho.clone();
            let mut minus = rho.clone();
            plus.x[i] = plus.x[i] + step;
            minus.x[i] = minus.x[i] - step;
            let fd = (self.eval(&plus) - self.eval(&minus)) / Complex::new(two * step, F::zero());
            worst = F::max(worst, (fd - g.dx[i]).norm() / scale);

            let mut plus = rho.clone();
            let mut minus = rho.clone();
            plus.xi[i] = plus.xi[i] + step;
            minus.xi[i] = minus.xi[i] - step;
            let fd = (self.eval(&plus) - self.eval(&minus)) / Complex::new(two * step, F::zero());
            worst = F::max(worst, (fd - g.dxi[i]).norm() / scale);
        }
        worst
    }
}

/// Minimal symmetric central-difference stencil of order-h^2 accuracy for the
/// j-th derivative: coefficients and integer offsets.
pub fn central_stencil(j: usize) -> (Vec<f64>, Vec<i64>) {
    assert!(j >= 1);
    if j % 2 == 0 {
        let m = (j / 2) as i64;
        let coeffs: Vec<f64> = (0..=j)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * binomial(j, i)
            })
            .collect();
        let offsets: Vec<i64> = (0..=j as i64).map(|i| m - i).collect();
        (coeffs, offsets)
    } else {
        // convolve the (j-1)-stencil with the first-derivative stencil
        let (ce, oe) = if j == 1 {
            (vec![1.0], vec![0i64])
        } else {
            central_stencil(j - 1)
        };
        let mut acc: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();
        for (&c, &o) in ce.iter().zip(&oe) {
            *acc.entry(o - 1).or_insert(0.0) -= 0.5 * c;
            *acc.entry(o + 1).or_insert(0.0) += 0.5 * c;
        }
        let offsets: Vec<i64> = acc.keys().rev().copied().collect();
        let coeffs: Vec<f64> = offsets.iter().map(|o| acc[o]).collect();
        (coeffs, offsets)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}
