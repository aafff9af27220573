//! Dense finite-dimensional discretizations of the model operators: the
//! circle advection hD + g(x) and torus Schrodinger -(hD)^2 + iV(x) in the
//! Fourier basis, and the non-self-adjoint harmonic oscillator in the Hermite
//! basis. Plus the dense eigensolve and the bit-exact matrix/spectrum export.

use std::io::{Read as _, Write as _};
use std::path::Path;

use ndarray::prelude::*;
use ndarray_linalg::{Eig, Lapack, Norm, Scalar};
use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::error::{CoreError, CoreResult};
use crate::fit::fmt17;
use crate::num::{real, to_f64, Real};

/// Trigonometric polynomial sum_m c_m e^{imx} with complex coefficients.
#[derive(Debug, Clone)]
pub struct TrigPoly<F: Real> {
    /// (harmonic m, coefficient), m may repeat; entries add.
    pub terms: Vec<(i64, Complex<F>)>,
}

impl<F: Real> TrigPoly<F> {
    pub fn zero() -> Self {
        TrigPoly { terms: vec![] }
    }

    /// a cos x
    pub fn cos(amplitude: f64) -> Self {
        let half = Complex::new(real::<F>(amplitude / 2.0), F::zero());
        TrigPoly {
            terms: vec![(1, half), (-1, half)],
        }
    }

    /// i a cos x
    pub fn icos(amplitude: f64) -> Self {
        let half = Complex::new(F::zero(), real::<F>(amplitude / 2.0));
        TrigPoly {
            terms: vec![(1, half), (-1, half)],
        }
    }

    /// Registry names for operator builders: "zero", "cos", "icos".
    pub fn by_name(name: &str, amplitude: f64) -> CoreResult<Self> {
        match name {
            "zero" => Ok(Self::zero()),
            "cos" => Ok(Self::cos(amplitude)),
            "icos" => Ok(Self::icos(amplitude)),
            other => Err(CoreError::UnsupportedModel(format!(
                "'{other}' is not a supported trig polynomial (zero | cos | icos)"
            ))),
        }
    }

    pub fn degree(&self) -> i64 {
        self.terms.iter().map(|(m, _)| m.abs()).max().unwrap_or(0)
    }
}

/// Which basis a discretized operator lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Basis {
    /// Fourier modes n = -N/2 .. N/2-1 on the circle.
    FourierCircle,
    /// Fourier modes on the 1-D torus (same layout, quadratic symbol in hD).
    FourierTorus,
    /// Hermite functions 0 .. N-1 on the line.
    Hermite,
}

/// Dense complex N x N realization of a model operator.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator<F: Real> {
    pub matrix: Array2<Complex<F>>,
    pub h: F,
    pub model_id: String,
    pub basis: Basis,
    /// Whether the build guarantees Re <Au, u> >= 0.
    pub accretive: bool,
    /// Known derivative order k at the canonical boundary point, if any.
    pub bracket_k: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult<F: Real> {
    /// All N eigenvalues, sorted by (re, im).
    pub eigenvalues: Vec<Complex<F>>,
    /// max ||A v - lambda v|| / ||v|| over a sample of 10 eigenpairs.
    pub residual_bound: F,
}

impl<F: Real> DiscretizedOperator<F> {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// Fourier mode index for row i.
    pub fn mode(&self, i: usize) -> i64 {
        i as i64 - (self.n() as i64) / 2
    }

    /// Collocation grid x_j = 2 pi j / N for Fourier bases.
    pub fn collocation_grid(&self) -> Vec<F> {
        let n = self.n();
        (0..n)
            .map(|j| real::<F>(2.0 * std::f64::consts::PI * j as f64 / n as f64))
            .collect()
    }

    /// Smallest Re <Au, u> over seeded random unit probes.
    pub fn numerical_range_min_probe(&self, probes: usize, seed: u64) -> F
    where
        Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
    {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = self.n();
        let mut worst = F::infinity();
        for _ in 0..probes {
            let mut v: Array1<Complex<F>> = Array1::from_shape_fn(n, |_| {
                Complex::new(
                    real::<F>(rng.gen_range(-1.0..1.0)),
                    real::<F>(rng.gen_range(-1.0..1.0)),
                )
            });
            let norm = v.norm_l2();
            v.mapv_inplace(|c| c / Complex::new(norm, F::zero()));
            let av = self.matrix.dot(&v);
            let quad: Complex<F> = v
                .iter()
                .zip(av.iter())
                .map(|(vi, avi)| vi.conj() * *avi)
                .fold(Complex::new(F::zero(), F::zero()), |a, b| a + b);
            worst = F::min(worst, quad.re);
        }
        worst
    }
}

fn toeplitz_add<F: Real>(a: &mut Array2<Complex<F>>, g: &TrigPoly<F>) {
    let n = a.nrows() as i64;
    for &(m, c) in &g.terms {
        for col in 0..n {
            let row = col + m;
            if row >= 0 && row < n {
                a[[row as usize, col as usize]] += c;
            }
        }
    }
}

/// h D + g(x) in the Fourier basis: diagonal h n plus the Toeplitz matrix of
/// g's Fourier coefficients. With `rotate_about = Some(z0)` returns i(A - z0).
pub fn build_circle_model<F: Real>(
    g: &TrigPoly<F>,
    h: F,
    n: usize,
    rotate_about: Option<Complex<F>>,
) -> CoreResult<DiscretizedOperator<F>> {
    if n < 16 || n % 2 != 0 {
        return Err(CoreError::InvalidArgument(
            "circle model needs even N >= 16".into(),
        ));
    }
    if h <= F::zero() {
        return Err(CoreError::InvalidArgument("h must be positive".into()));
    }
    let mut a: Array2<Complex<F>> = Array2::zeros((n, n));
    let half = n as i64 / 2;
    for i in 0..n {
        let mode = i as i64 - half;
        a[[i, i]] = Complex::new(h * real::<F>(mode as f64), F::zero());
    }
    toeplitz_add(&mut a, g);
    let (matrix, accretive) = match rotate_about {
        Some(z0) => {
            let i_unit = Complex::new(F::zero(), F::one());
            let mut m = a.mapv(|c| i_unit * c);
            for d in 0..n {
                m[[d, d]] -= i_unit * z0;
            }
            (m, true)
        }
        None => (a, false),
    };
    Ok(DiscretizedOperator {
        matrix,
        h,
        model_id: "circle-advection".into(),
        basis: Basis::FourierCircle,
        accretive,
        bracket_k: rotate_about.map(|_| 2),
    })
}

/// The non-self-adjoint harmonic oscillator -d^2/dy^2 + i y^2 in the Hermite
/// basis: diag(2n+1) + (i-1) Y^2 with the pentadiagonal position-squared
/// matrix. h is fixed to 1 (large-eigenvalue regime).
pub fn build_hermite_oscillator<F: Real>(n: usize) -> CoreResult<DiscretizedOperator<F>> {
    if n < 32 {
        return Err(CoreError::InvalidArgument(
            "hermite oscillator needs N >= 32".into(),
        ));
    }
    let mut a: Array2<Complex<F>> = Array2::zeros((n, n));
    let im1 = Complex::new(-F::one(), F::one()); // (i - 1)
    for k in 0..n {
        let kf = real::<F>(k as f64);
        let two = real::<F>(2.0);
        let half = real::<F>(0.5);
        a[[k, k]] = Complex::new(two * kf + F::one(), F::zero()) + im1 * Complex::new(kf + half, F::zero());
    }
    for k in 0..n.saturating_sub(2) {
        let v = real::<F>((((k + 1) * (k + 2)) as f64).sqrt() / 2.0);
        let c = im1 * Complex::new(v, F::zero());
        a[[k, k + 2]] = c;
        a[[k + 2, k]] = c;
    }
    Ok(DiscretizedOperator {
        matrix: a,
        h: F::one(),
        model_id: "nsa-harmonic".into(),
        basis: Basis::Hermite,
        accretive: true,
        bracket_k: Some(2),
    })
}

/// -(hD)^2 + i V(x) on the torus: diagonal (h n)^2 plus i Toeplitz(V).
pub fn build_torus_schrodinger<F: Real>(
    v: &TrigPoly<F>,
    h: F,
    n: usize,
) -> CoreResult<DiscretizedOperator<F>> {
    if n < 16 || n % 2 != 0 {
        return Err(CoreError::InvalidArgument(
            "torus model needs even N >= 16".into(),
        ));
    }
    if h <= F::zero() {
        return Err(CoreError::InvalidArgument("h must be positive".into()));
    }
    let mut a: Array2<Complex<F>> = Array2::zeros((n, n));
    let half = n as i64 / 2;
    for i in 0..n {
        let mode = real::<F>((i as i64 - half) as f64);
        let hn = h * mode;
        a[[i, i]] = Complex::new(hn * hn, F::zero());
    }
    let iv = TrigPoly {
        terms: v
            .terms
            .iter()
            .map(|&(m, c)| (m, Complex::new(F::zero(), F::one()) * c))
            .collect(),
    };
    toeplitz_add(&mut a, &iv);
    Ok(DiscretizedOperator {
        matrix: a,
        h,
        model_id: "torus-schrodinger".into(),
        basis: Basis::FourierTorus,
        accretive: true,
        bracket_k: Some(2),
    })
}

/// All eigenvalues by the dense nonsymmetric eigensolver, with a residual
/// bound sampled over 10 eigenpairs.
pub fn spectrum<F: Real>(op: &DiscretizedOperator<F>) -> CoreResult<SpectrumResult<F>>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    let n = op.n();
    if n > 4096 {
        return Err(CoreError::InvalidArgument(
            "spectrum supports N <= 4096".into(),
        ));
    }
    let (vals, vecs) = op.matrix.eig().map_err(|e| {
        let norm1 = op
            .matrix
            .columns()
            .into_iter()
            .map(|c| to_f64(c.iter().map(|z| z.norm()).fold(F::zero(), |a, b| a + b)))
            .fold(0.0f64, f64::max);
        CoreError::NonConvergence(format!(
            "eigensolver failed ({e}); matrix 1-norm ~ {norm1:.3e}"
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (vals[i], vals[j]);
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let eigenvalues: Vec<Complex<F>> = order.iter().map(|&i| vals[i]).collect();

    let mut residual = F::zero();
    let sample = (n / 10).max(1);
    for (count, &i) in order.iter().step_by(sample).enumerate() {
        if count >= 10 {
            break;
        }
        let v = vecs.column(i);
        let av = op.matrix.dot(&v);
        let lv = v.mapv(|c| c * vals[i]);
        let num = (&av - &lv).norm_l2();
        let den = v.norm_l2();
        residual = F::max(residual, num / den);
    }
    Ok(SpectrumResult {
        eigenvalues,
        residual_bound: residual,
    })
}

const MAGIC: &[u8; 4] = b"SSPC";

/// Binary export: magic "SSPC", u32 N, f64 h (little-endian), then N^2
/// complex entries as interleaved f64 (re, im), row-major.
pub fn write_matrix<F: Real>(path: &Path, op: &DiscretizedOperator<F>) -> CoreResult<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&(op.n() as u32).to_le_bytes())?;
    out.write_all(&to_f64(op.h).to_le_bytes())?;
    for row in op.matrix.rows() {
        for c in row {
            out.write_all(&to_f64(c.re).to_le_bytes())?;
            out.write_all(&to_f64(c.im).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read back a matrix written by [`write_matrix`]. Returns (matrix, h).
pub fn read_matrix(path: &Path) -> CoreResult<(Array2<Complex<f64>>, f64)> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoreError::InvalidArgument("bad magic in matrix file".into()));
    }
    let mut b4 = [0u8; 4];
    file.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    file.read_exact(&mut b8)?;
    let h = f64::from_le_bytes(b8);
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            file.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            file.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            m[[i, j]] = Complex::new(re, im);
        }
    }
    Ok((m, h))
}

/// CSV export of a spectrum: columns re, im.
pub fn write_spectrum_csv<F: Real>(path: &Path, spec: &SpectrumResult<F>) -> CoreResult<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(b"re,im\n")?;
    for ev in &spec.eigenvalues {
        writeln!(out, "{},{}", fmt17(to_f64(ev.re)), fmt17(to_f64(ev.im)))?;
    }
    Ok(())
}
