//! Dense complex kernels: matrix exponential by scaling-and-squaring with
//! Pade(13), singular-value extremes, and Gauss-Legendre nodes.

extern crate blas_src;

use ndarray::prelude::*;
use ndarray_linalg::{Factorize, Inverse, Lapack, Scalar, Solve, SVD};
use num_complex::Complex;

use crate::error::{CoreError, CoreResult};
use crate::num::{real, Real};

/// Pade(13) coefficients (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn one_norm<F: Real>(a: &Array2<Complex<F>>) -> F {
    let mut best = F::zero();
    for j in 0..a.ncols() {
        let s = a.column(j).iter().map(|c| c.norm()).fold(F::zero(), |x, y| x + y);
        best = F::max(best, s);
    }
    best
}

/// exp(A) for a square complex matrix.
pub fn expm<F: Real>(a: &Array2<Complex<F>>) -> CoreResult<Array2<Complex<F>>>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    let n = a.nrows();
    if n != a.ncols() {
        return Err(CoreError::InvalidArgument("expm needs a square matrix".into()));
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let norm = one_norm(a);
    let theta = real::<F>(THETA13);
    let s = if norm > theta {
        (norm / theta).log2().ceil().to_f64().unwrap() as u32
    } else {
        0
    };
    let scale = Complex::new(real::<F>(0.5f64.powi(s as i32)), F::zero());
    let a1 = a.mapv(|v| v * scale);

    let id: Array2<Complex<F>> = Array2::eye(n);
    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let c = |k: usize| Complex::new(real::<F>(PADE13[k]), F::zero());
    let scaled = |m: &Array2<Complex<F>>, k: usize| m.mapv(|v| v * c(k));

    // u = A (a6 (b13 a6 + b11 a4 + b9 a2) + b7 a6 + b5 a4 + b3 a2 + b1 I)
    let inner_u = scaled(&a6, 13) + scaled(&a4, 11) + scaled(&a2, 9);
    let u = a1.dot(&(a6.dot(&inner_u) + scaled(&a6, 7) + scaled(&a4, 5) + scaled(&a2, 3) + scaled(&id, 1)));
    // v = a6 (b12 a6 + b10 a4 + b8 a2) + b6 a6 + b4 a4 + b2 a2 + b0 I
    let inner_v = scaled(&a6, 12) + scaled(&a4, 10) + scaled(&a2, 8);
    let v = a6.dot(&inner_v) + scaled(&a6, 6) + scaled(&a4, 4) + scaled(&a2, 2) + scaled(&id, 0);

    let denom = &v - &u;
    let numer = &v + &u;
    let denom_inv = denom.inv().map_err(CoreError::Linalg)?;
    let mut r = denom_inv.dot(&numer);
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Largest singular value.
pub fn sigma_max<F: Real>(a: &Array2<Complex<F>>) -> CoreResult<F>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    let (_, s, _) = a.svd(false, false).map_err(CoreError::Linalg)?;
    s.first()
        .copied()
        .ok_or_else(|| CoreError::InvalidArgument("empty matrix".into()))
}

/// (sigma_max, sigma_min) from one decomposition.
pub fn sigma_extremes<F: Real>(a: &Array2<Complex<F>>) -> CoreResult<(F, F)>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    let (_, s, _) = a.svd(false, false).map_err(CoreError::Linalg)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) => Ok((hi, lo)),
        _ => Err(CoreError::InvalidArgument("empty matrix".into())),
    }
}

/// Smallest singular value by inverse iteration on the normal equations,
/// for sizes where a full decomposition is too expensive.
pub fn sigma_min_inverse_iteration<F: Real>(
    a: &Array2<Complex<F>>,
    tol: F,
    max_iter: usize,
) -> CoreResult<F>
where
    Complex<F>: Lapack + Scalar<Real = F, Complex = Complex<F>>,
{
    use ndarray_linalg::Norm;
    let n = a.nrows();
    let lu = a.factorize().map_err(CoreError::Linalg)?;
    // deterministic start vector
    let mut v: Array1<Complex<F>> = Array1::from_shape_fn(n, |i| {
        Complex::new(real::<F>(((i + 1) as f64).sin()), real::<F>(((i * i) as f64 % 7.0) / 7.0))
    });
    let nv = v.norm_l2();
    v.mapv_inplace(|c| c / Complex::new(nv, F::zero()));
    let mut prev = F::zero();
    for it in 0..max_iter {
        // w = (A^* A)^{-1} v = A^{-1} (A^{-*} v); the iterate converges to the
        // right singular vector of sigma_min
        let w1 = lu.solve_h(&v).map_err(CoreError::Linalg)?;
        let w2 = lu.solve(&w1).map_err(CoreError::Linalg)?;
        let norm = w2.norm_l2();
        if !norm.is_finite() || norm == F::zero() {
            return Err(CoreError::NonConvergence(
                "inverse iteration broke down".into(),
            ));
        }
        v = w2.mapv(|c| c / Complex::new(norm, F::zero()));
        // Rayleigh estimate sigma_min ~ ||A v||
        let av = a.dot(&v);
        let est = av.norm_l2();
        if it > 0 && (est - prev).abs() <= tol * est {
            return Ok(est);
        }
        prev = est;
    }
    Ok(prev)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre<F: Real>(n: usize) -> (Vec<F>, Vec<F>) {
    assert!(n >= 1);
    let mut nodes = vec![F::zero(); n];
    let mut weights = vec![F::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Newton from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, 0.0f64);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            pp = nf * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / pp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        nodes[i] = real(-x);
        nodes[n - 1 - i] = real(x);
        weights[i] = real(w);
        weights[n - 1 - i] = real(w);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn expm_scalar_and_diagonal() {
        let a = array![[Complex64::new(-2.0, 0.0)]];
        let e = expm(&a).unwrap();
        assert_relative_eq!(e[[0, 0]].re, (-2.0f64).exp(), epsilon = 1e-14);

        let a = array![
            [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.5)]
        ];
        let e = expm(&a).unwrap();
        let e00 = Complex64::new(0.0, 1.0).exp();
        let e11 = Complex64::new(-1.0, 0.5).exp();
        assert!((e[[0, 0]] - e00).norm() < 1e-14);
        assert!((e[[1, 1]] - e11).norm() < 1e-14);
    }

    #[test]
    fn expm_matches_series_for_nilpotent() {
        // strictly upper triangular: exp is the finite series
        let a = array![
            [Complex64::new(0.0, 0.0), Complex64::new(3.0, -1.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
        ];
        let e = expm(&a).unwrap();
        assert!((e[[0, 1]] - Complex64::new(3.0, -1.0)).norm() < 1e-14);
        assert!((e[[0, 0]] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm_group_property_under_scaling() {
        let n = 24;
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            Complex64::new(
                ((i * 3 + j) as f64 * 0.37).sin() * 0.4,
                ((i + 2 * j) as f64 * 0.11).cos() * 0.3,
            )
        });
        let e1 = expm(&a).unwrap();
        let half = expm(&(&a * Complex64::new(0.5, 0.0))).unwrap();
        let e2 = half.dot(&half);
        let diff = (&e1 - &e2).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "diff {diff}");
    }

    #[test]
    fn sigma_extremes_of_diagonal() {
        let a = array![
            [Complex64::new(3.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, -0.5)]
        ];
        let (hi, lo) = sigma_extremes(&a).unwrap();
        assert_relative_eq!(hi, 3.0, epsilon = 1e-14);
        assert_relative_eq!(lo, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn inverse_iteration_matches_svd() {
        let n = 48;
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            Complex64::new(
                ((i * 7 + j * 3) as f64 * 0.21).sin(),
                ((i + 5 * j) as f64 * 0.13).cos(),
            ) + if i == j { Complex64::new(4.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        let (_, lo) = sigma_extremes(&a).unwrap();
        let est = sigma_min_inverse_iteration(&a, 1e-10, 200).unwrap();
        assert_relative_eq!(est, lo, max_relative = 1e-6);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre::<f64>(8);
        // exact for degree <= 15: try x^14 on [-1,1] = 2/15
        let val: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(14)).sum();
        assert_relative_eq!(val, 2.0 / 15.0, epsilon = 1e-12);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-13);
    }
}
