//! Weight evolution on a phase-space lattice: dG/dt + Re p(rho + i H_G) = 0,
//! G_0 = 0, with the transported-integral characteristic oracle and the
//! power-law decay certificate.

use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{CoreError, CoreResult};
use crate::fit::{fit_power_law, fmt17, ScalingFit};
use crate::num::{real, to_f64, Real};
use crate::phase::{ComplexPhasePoint, PhasePoint};
use crate::symbol::SemiclassicalSymbol;

/// Uniform rectangular lattice over (x, xi), n = 1 only.
#[derive(Debug, Clone)]
pub struct PhaseLattice<F: Real> {
    pub x_lo: F,
    pub x_hi: F,
    pub nx: usize,
    pub xi_lo: F,
    pub xi_hi: F,
    pub nxi: usize,
}

impl<F: Real> PhaseLattice<F> {
    pub fn new(x: (F, F, usize), xi: (F, F, usize)) -> CoreResult<Self> {
        if x.2 < 16 || xi.2 < 16 {
            return Err(CoreError::InvalidArgument(
                "phase lattice needs >= 16 points per axis".into(),
            ));
        }
        if !(x.0 < x.1 && xi.0 < xi.1) {
            return Err(CoreError::InvalidArgument("phase lattice ranges empty".into()));
        }
        Ok(PhaseLattice {
            x_lo: x.0,
            x_hi: x.1,
            nx: x.2,
            xi_lo: xi.0,
            xi_hi: xi.1,
            nxi: xi.2,
        })
    }

    pub fn dx(&self) -> F {
        (self.x_hi - self.x_lo) / real::<F>((self.nx - 1) as f64)
    }

    pub fn dxi(&self) -> F {
        (self.xi_hi - self.xi_lo) / real::<F>((self.nxi - 1) as f64)
    }

    pub fn spacing(&self) -> F {
        F::min(self.dx(), self.dxi())
    }

    pub fn x(&self, i: usize) -> F {
        self.x_lo + real::<F>(i as f64) * self.dx()
    }

    pub fn xi(&self, j: usize) -> F {
        self.xi_lo + real::<F>(j as f64) * self.dxi()
    }

    pub fn contains(&self, x: F, xi: F) -> bool {
        x >= self.x_lo && x <= self.x_hi && xi >= self.xi_lo && xi <= self.xi_hi
    }
}

/// One time slab of the weight G_t on the lattice. Values are <= 0.
#[derive(Debug, Clone)]
pub struct WeightField<F: Real> {
    pub t: F,
    /// nx x nxi, indexed [x, xi].
    pub values: Array2<F>,
}

impl<F: Real> WeightField<F> {
    /// Bilinear sample at (x, xi); caller keeps the point inside the lattice.
    pub fn sample(&self, lat: &PhaseLattice<F>, x: F, xi: F) -> F {
        let fx = (x - lat.x_lo) / lat.dx();
        let fy = (xi - lat.xi_lo) / lat.dxi();
        let ix = to_f64(fx).floor().clamp(0.0, (lat.nx - 2) as f64) as usize;
        let iy = to_f64(fy).floor().clamp(0.0, (lat.nxi - 2) as f64) as usize;
        let tx = fx - real::<F>(ix as f64);
        let ty = fy - real::<F>(iy as f64);
        let one = F::one();
        (one - tx) * (one - ty) * self.values[[ix, iy]]
            + tx * (one - ty) * self.values[[ix + 1, iy]]
            + (one - tx) * ty * self.values[[ix, iy + 1]]
            + tx * ty * self.values[[ix + 1, iy + 1]]
    }
}

/// Central differences inside, one-sided at the edges.
fn gradient<F: Real>(lat: &PhaseLattice<F>, g: &Array2<F>) -> (Array2<F>, Array2<F>) {
    let (nx, ny) = (lat.nx, lat.nxi);
    let two = real::<F>(2.0);
    let dx = lat.dx();
    let dy = lat.dxi();
    let mut gx = Array2::zeros((nx, ny));
    let mut gy = Array2::zeros((nx, ny));
    for j in 0..ny {
        gx[[0, j]] = (g[[1, j]] - g[[0, j]]) / dx;
        gx[[nx - 1, j]] = (g[[nx - 1, j]] - g[[nx - 2, j]]) / dx;
        for i in 1..nx - 1 {
            gx[[i, j]] = (g[[i + 1, j]] - g[[i - 1, j]]) / (two * dx);
        }
    }
    for i in 0..nx {
        gy[[i, 0]] = (g[[i, 1]] - g[[i, 0]]) / dy;
        gy[[i, ny - 1]] = (g[[i, ny - 1]] - g[[i, ny - 2]]) / dy;
        for j in 1..ny - 1 {
            gy[[i, j]] = (g[[i, j + 1]] - g[[i, j - 1]]) / (two * dy);
        }
    }
    (gx, gy)
}

/// -Re p(rho + i H_G) at every node, H_G = (dG/dxi, -dG/dx).
fn rhs<F: Real>(
    sym: &SemiclassicalSymbol<F>,
    lat: &PhaseLattice<F>,
    g: &Array2<F>,
) -> Array2<F> {
    let (gx, gy) = gradient(lat, g);
    let mut out = Array2::zeros((lat.nx, lat.nxi));
    for i in 0..lat.nx {
        let x = lat.x(i);
        for j in 0..lat.nxi {
            let xi = lat.xi(j);
            let p = ComplexPhasePoint {
                x: vec![Complex::new(x, gy[[i, j]])],
                xi: vec![Complex::new(xi, -gx[[i, j]])],
            };
            out[[i, j]] = -sym.eval_complex(&p).re;
        }
    }
    out
}

/// Evolve G by the explicit midpoint rule. Returns every slab including t = 0.
/// The time step must respect dt <= 0.25 * spacing / max |grad Im p|.
pub fn evolve_g<F: Real>(
    sym: &SemiclassicalSymbol<F>,
    lat: &PhaseLattice<F>,
    t_end: F,
    dt: F,
) -> CoreResult<Vec<WeightField<F>>> {
    if sym.dim() != 1 {
        return Err(CoreError::InvalidArgument(
            "evolve_g supports one-dimensional symbols".into(),
        ));
    }
    if t_end <= F::zero() || t_end > F::one() {
        return Err(CoreError::InvalidArgument("evolve_g needs 0 < t_end <= 1".into()));
    }
    // CFL guard against the advection speed of the linearized transport
    let mut speed = F::zero();
    for i in 0..lat.nx {
        for j in 0..lat.nxi {
            let g = sym.grad(&PhasePoint::new1(lat.x(i), lat.xi(j)));
            let m = (g.dx[0].im.powi(2) + g.dxi[0].im.powi(2)).sqrt();
            speed = F::max(speed, m);
        }
    }
    let bound = real::<F>(0.25) * lat.spacing() / F::max(speed, real(1e-30));
    if dt > bound {
        return Err(CoreError::InvalidArgument(format!(
            "dt = {} violates the stability bound {}",
            dt, bound
        )));
    }

    let steps = to_f64(t_end / dt).ceil().max(1.0) as usize;
    let dt_eff = t_end / real::<F>(steps as f64);
    let half = real::<F>(0.5);
    let pos_tol = real::<F>(1e-10);

    let mut g: Array2<F> = Array2::zeros((lat.nx, lat.nxi));
    let mut slabs = vec![WeightField {
        t: F::zero(),
        values: g.clone(),
    }];
    for s in 0..steps {
        let k1 = rhs(sym, lat, &g);
        let g_mid = &g + &(&k1 * (half * dt_eff));
        let k2 = rhs(sym, lat, &g_mid);
        g = &g + &(&k2 * dt_eff);
        let max_g = g.iter().copied().fold(F::neg_infinity(), F::max);
        if max_g > pos_tol {
            return Err(CoreError::AssumptionViolation(format!(
                "G became positive ({}) at t = {}; weight must stay <= 0",
                max_g,
                to_f64(dt_eff) * (s as f64 + 1.0)
            )));
        }
        slabs.push(WeightField {
            t: dt_eff * real::<F>((s + 1) as f64),
            values: g.clone(),
        });
    }
    Ok(slabs)
}

/// Characteristic-oracle value: the solution of the linearized transport
/// equation along the H_{Im p} flow, -J(t, rho).
pub fn g_characteristic<F: Real>(
    sym: &SemiclassicalSymbol<F>,
    rho: &PhasePoint<F>,
    t: F,
) -> CoreResult<F> {
    if t < F::zero() || t > F::one() {
        return Err(CoreError::InvalidArgument("g_characteristic needs t in [0, 1]".into()));
    }
    let steps = (to_f64(t) / 0.005).ceil().max(64.0) as usize;
    Ok(-sym.accumulate_j(rho, t, steps)?)
}

/// Outcome of the decay certification.
#[derive(Debug, Clone)]
pub struct DecayCertificate {
    pub fit: ScalingFit,
    pub expected_exponent: f64,
    /// Smallest C with G_t <= -t^{k+1}/C on the fit window.
    pub admissible_constant: f64,
    /// |exponent - (k+1)| <= 0.3
    pub exponent_within_tolerance: bool,
}

/// Fit log(-G_t) against log t over t in [0.05, 0.5] at the orbit points
/// (one phase point per slab) and report the smallest admissible constant.
pub fn certify_decay<F: Real>(
    fields: &[WeightField<F>],
    k: usize,
    orbit: &[PhasePoint<F>],
    lat: &PhaseLattice<F>,
) -> CoreResult<DecayCertificate> {
    if fields.len() != orbit.len() {
        return Err(CoreError::InvalidArgument(format!(
            "certify_decay: {} slabs vs {} orbit points",
            fields.len(),
            orbit.len()
        )));
    }
    let lo = real::<F>(0.05);
    let hi = real::<F>(0.5);
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (f, rho) in fields.iter().zip(orbit) {
        if f.t < lo || f.t > hi {
            continue;
        }
        if !lat.contains(rho.x[0], rho.xi[0]) {
            return Err(CoreError::InvalidArgument(
                "certify_decay: orbit point outside the lattice".into(),
            ));
        }
        let v = -f.sample(lat, rho.x[0], rho.xi[0]);
        if v <= F::zero() {
            return Err(CoreError::AssumptionViolation(format!(
                "certification failure: G is nonnegative ({}) at t = {} in the fit window",
                -v, f.t
            )));
        }
        ts.push(f.t);
        ys.push(v);
    }
    let fit = fit_power_law(&ts, &ys, (lo, hi))?;
    let kp1 = (k + 1) as f64;
    let admissible = ts
        .iter()
        .zip(&ys)
        .map(|(&t, &y)| to_f64(t).powf(kp1) / to_f64(y))
        .fold(0.0f64, f64::max);
    Ok(DecayCertificate {
        expected_exponent: kp1,
        exponent_within_tolerance: (fit.exponent - kp1).abs() <= 0.3,
        admissible_constant: admissible,
        fit,
    })
}

/// Write all slabs as CSV with columns t,x,xi,G (header mandatory).
pub fn write_slabs_csv<F: Real>(
    path: &Path,
    lat: &PhaseLattice<F>,
    fields: &[WeightField<F>],
) -> CoreResult<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(b"t,x,xi,G\n")?;
    for f in fields {
        for i in 0..lat.nx {
            for j in 0..lat.nxi {
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt17(to_f64(f.t)),
                    fmt17(to_f64(lat.x(i))),
                    fmt17(to_f64(lat.xi(j))),
                    fmt17(to_f64(f.values[[i, j]]))
                )?;
            }
        }
    }
    Ok(())
}
