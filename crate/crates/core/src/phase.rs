//! Phase-space points and boxes.

use num_complex::Complex;

use crate::num::Real;

/// A point rho = (x, xi) of real phase space, dimension n = x.len().
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint<F: Real> {
    pub x: Vec<F>,
    pub xi: Vec<F>,
}

impl<F: Real> PhasePoint<F> {
    pub fn new(x: Vec<F>, xi: Vec<F>) -> Self {
        assert_eq!(x.len(), xi.len(), "position/momentum dimension mismatch");
        assert!(!x.is_empty(), "phase point needs dimension >= 1");
        PhasePoint { x, xi }
    }

    /// Convenience constructor for n = 1.
    pub fn new1(x: F, xi: F) -> Self {
        PhasePoint {
            x: vec![x],
            xi: vec![xi],
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.xi.iter()).all(|v| v.is_finite())
    }

    /// Flatten to (x..., xi...) for integrators.
    pub fn to_vec(&self) -> Vec<F> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.xi);
        v
    }

    pub fn from_slice(s: &[F]) -> Self {
        let n = s.len() / 2;
        PhasePoint {
            x: s[..n].to_vec(),
            xi: s[n..].to_vec(),
        }
    }

    pub fn complexify(&self) -> ComplexPhasePoint<F> {
        ComplexPhasePoint {
            x: self.x.iter().map(|&v| Complex::new(v, F::zero())).collect(),
            xi: self.xi.iter().map(|&v| Complex::new(v, F::zero())).collect(),
        }
    }
}

/// A point of complexified phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPhasePoint<F: Real> {
    pub x: Vec<Complex<F>>,
    pub xi: Vec<Complex<F>>,
}

impl<F: Real> ComplexPhasePoint<F> {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x
            .iter()
            .chain(self.xi.iter())
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Axis-aligned phase-space box used as the escape domain for flows.
/// Periodic position coordinates are exempt from the escape check.
#[derive(Debug, Clone)]
pub struct PhaseBox<F: Real> {
    pub x_ranges: Vec<(F, F)>,
    pub xi_ranges: Vec<(F, F)>,
}

impl<F: Real> PhaseBox<F> {
    pub fn new(x_ranges: Vec<(F, F)>, xi_ranges: Vec<(F, F)>) -> Self {
        PhaseBox { x_ranges, xi_ranges }
    }

    /// Index of the first escaping coordinate (x first, then xi offset by n),
    /// skipping periodic x coordinates.
    pub fn first_escape(&self, p: &PhasePoint<F>, periodic_x: &[bool]) -> Option<usize> {
        for (i, &v) in p.x.iter().enumerate() {
            if periodic_x.get(i).copied().unwrap_or(false) {
                continue;
            }
            let (lo, hi) = self.x_ranges[i];
            if v < lo || v > hi {
                return Some(i);
            }
        }
        for (i, &v) in p.xi.iter().enumerate() {
            let (lo, hi) = self.xi_ranges[i];
            if v < lo || v > hi {
                return Some(p.dim() + i);
            }
        }
        None
    }
}
