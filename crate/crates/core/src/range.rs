//! Sampling the closed range of a symbol over a phase-space lattice, with a
//! boundary polyline extracted from an occupancy raster (uniform alpha-shape).

use num_complex::Complex;

use crate::error::{CoreError, CoreResult};
use crate::num::{real, to_f64, Real};
use crate::phase::PhasePoint;
use crate::symbol::SemiclassicalSymbol;

/// Rectangular lattice over (x, xi) for n = 1 symbols.
#[derive(Debug, Clone)]
pub struct RangeLattice<F: Real> {
    pub x: (F, F, usize),
    pub xi: (F, F, usize),
}

#[derive(Debug, Clone)]
pub struct RangeSample<F: Real> {
    /// Image values p(rho), row-major over the lattice (x outer, xi inner).
    pub samples: Vec<Complex<F>>,
    /// Boundary polylines (closed loops) of the alpha-cell union, as (re, im).
    pub boundary: Vec<Vec<(F, F)>>,
    /// Cell size of the occupancy raster.
    pub alpha: F,
    bbox: (f64, f64, f64, f64),
    grid: OccupancyGrid,
}

#[derive(Debug, Clone)]
struct OccupancyGrid {
    re0: f64,
    im0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    occupied: Vec<bool>,
}

impl OccupancyGrid {
    fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }
    fn is_occupied(&self, ix: i64, iy: i64) -> bool {
        if ix < 0 || iy < 0 || ix as usize >= self.nx || iy as usize >= self.ny {
            return false;
        }
        self.occupied[self.idx(ix as usize, iy as usize)]
    }
}

impl<F: Real> SemiclassicalSymbol<F> {
    /// Evaluate p over the lattice and estimate the image boundary.
    /// `alpha = None` picks a cell size of 1/50 of the image bounding-box
    /// diagonal.
    pub fn range_sample(
        &self,
        lattice: &RangeLattice<F>,
        alpha: Option<F>,
    ) -> CoreResult<RangeSample<F>> {
        if self.dim() != 1 {
            return Err(CoreError::InvalidArgument(
                "range_sample supports one-dimensional symbols".into(),
            ));
        }
        let (x0, x1, nx) = lattice.x;
        let (k0, k1, nk) = lattice.xi;
        if nx == 0 || nk == 0 {
            return Err(CoreError::InvalidArgument("empty range lattice".into()));
        }
        let mut samples = Vec::with_capacity(nx * nk);
        for i in 0..nx {
            let tx = if nx == 1 { F::zero() } else { real::<F>(i as f64 / (nx - 1) as f64) };
            let x = x0 + (x1 - x0) * tx;
            for j in 0..nk {
                let tk = if nk == 1 { F::zero() } else { real::<F>(j as f64 / (nk - 1) as f64) };
                let xi = k0 + (k1 - k0) * tk;
                samples.push(self.eval(&PhasePoint::new1(x, xi)));
            }
        }

        let re_min = samples.iter().map(|z| to_f64(z.re)).fold(f64::INFINITY, f64::min);
        let re_max = samples.iter().map(|z| to_f64(z.re)).fold(f64::NEG_INFINITY, f64::max);
        let im_min = samples.iter().map(|z| to_f64(z.im)).fold(f64::INFINITY, f64::min);
        let im_max = samples.iter().map(|z| to_f64(z.im)).fold(f64::NEG_INFINITY, f64::max);
        let diag = ((re_max - re_min).powi(2) + (im_max - im_min).powi(2)).sqrt();
        let cell = match alpha {
            Some(a) => to_f64(a),
            None => (diag / 50.0).max(1e-12),
        };

        let gx = (((re_max - re_min) / cell).ceil() as usize + 1).max(1);
        let gy = (((im_max - im_min) / cell).ceil() as usize + 1).max(1);
        let mut grid = OccupancyGrid {
            re0: re_min,
            im0: im_min,
            cell,
            nx: gx,
            ny: gy,
            occupied: vec![false; gx * gy],
        };
        for z in &samples {
            let ix = (((to_f64(z.re) - re_min) / cell).floor() as usize).min(gx - 1);
            let iy = (((to_f64(z.im) - im_min) / cell).floor() as usize).min(gy - 1);
            let at = grid.idx(ix, iy);
            grid.occupied[at] = true;
        }

        let boundary = trace_boundaries(&grid)
            .into_iter()
            .map(|loop_pts| {
                loop_pts
                    .into_iter()
                    .map(|(re, im)| (real::<F>(re), real::<F>(im)))
                    .collect()
            })
            .collect();

        Ok(RangeSample {
            samples,
            boundary,
            alpha: real(cell),
            bbox: (re_min, re_max, im_min, im_max),
            grid,
        })
    }
}

impl<F: Real> RangeSample<F> {
    /// Bounding box of the image samples as (re_min, re_max, im_min, im_max).
    pub fn bbox(&self) -> (F, F, F, F) {
        (
            real(self.bbox.0),
            real(self.bbox.1),
            real(self.bbox.2),
            real(self.bbox.3),
        )
    }

    /// Whether z lies within `margin` of the sampled image (occupancy test
    /// dilated by ceil(margin/alpha) cells).
    pub fn contains(&self, z: Complex<F>, margin: F) -> bool {
        let g = &self.grid;
        let r = ((to_f64(margin) / g.cell).ceil() as i64).max(0);
        let ix = ((to_f64(z.re) - g.re0) / g.cell).floor() as i64;
        let iy = ((to_f64(z.im) - g.im0) / g.cell).floor() as i64;
        for dy in -r..=r {
            for dx in -r..=r {
                if g.is_occupied(ix + dx, iy + dy) {
                    return true;
                }
            }
        }
        false
    }
}

/// Trace the edges between occupied and empty cells into closed loops
/// (marching over the cell raster; each edge emitted once).
fn trace_boundaries(grid: &OccupancyGrid) -> Vec<Vec<(f64, f64)>> {
    use std::collections::HashMap;
    // directed edges along cell borders: key = start corner, value = end corner
    let mut edges: HashMap<(i64, i64), Vec<(i64, i64)>> = HashMap::new();
    let mut push = |a: (i64, i64), b: (i64, i64)| edges.entry(a).or_default().push(b);
    for iy in 0..grid.ny as i64 {
        for ix in 0..grid.nx as i64 {
            if !grid.is_occupied(ix, iy) {
                continue;
            }
            // emit border edges counterclockwise around the occupied cell
            if !grid.is_occupied(ix, iy - 1) {
                push((ix, iy), (ix + 1, iy));
            }
            if !grid.is_occupied(ix + 1, iy) {
                push((ix + 1, iy), (ix + 1, iy + 1));
            }
            if !grid.is_occupied(ix, iy + 1) {
                push((ix + 1, iy + 1), (ix, iy + 1));
            }
            if !grid.is_occupied(ix - 1, iy) {
                push((ix, iy + 1), (ix, iy));
            }
        }
    }
    let mut loops = Vec::new();
    let mut keys: Vec<(i64, i64)> = edges.keys().copied().collect();
    keys.sort_unstable();
    for start in keys {
        loop {
            let Some(first) = edges.get_mut(&start).and_then(Vec::pop) else {
                break;
            };
            let mut pts = vec![start, first];
            let mut cur = first;
            while cur != start {
                let nexts = edges.get_mut(&cur);
                let Some(next) = nexts.and_then(Vec::pop) else {
                    break;
                };
                pts.push(next);
                cur = next;
            }
            loops.push(
                pts.into_iter()
                    .map(|(cx, cy)| {
                        (
                            grid.re0 + cx as f64 * grid.cell,
                            grid.im0 + cy as f64 * grid.cell,
                        )
                    })
                    .collect(),
            );
        }
    }
    loops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn circle_image_fills_strip() {
        let sym = models::circle_advection::<f64>(1.0, None);
        let lat = RangeLattice {
            x: (0.0, 2.0 * std::f64::consts::PI, 65),
            xi: (-2.0, 2.0, 65),
        };
        let rs = sym.range_sample(&lat, None).unwrap();
        let (rmin, rmax, imin, imax) = rs.bbox();
        assert!((rmin + 2.0).abs() < 1e-9 && (rmax - 2.0).abs() < 1e-9);
        assert!((imin + 1.0).abs() < 1e-9 && (imax - 1.0).abs() < 1e-9);
        assert!(!rs.boundary.is_empty());
    }

    #[test]
    fn constant_symbol_single_point() {
        let sym = models::circle_advection::<f64>(0.0, Some(num_complex::Complex::new(2.0, 0.0)));
        // i(p - 2) with p = xi: on the xi = 0 line the image is the single point -2i... use
        // a one-node lattice to pin a single sample.
        let lat = RangeLattice {
            x: (0.0, 0.0, 1),
            xi: (0.5, 0.5, 1),
        };
        let rs = sym.range_sample(&lat, Some(0.1)).unwrap();
        assert_eq!(rs.samples.len(), 1);
    }

    #[test]
    fn torus_image_left_boundary_at_zero() {
        let sym = models::torus_schrodinger::<f64>(1.0);
        let lat = RangeLattice {
            x: (0.0, 2.0 * std::f64::consts::PI, 97),
            xi: (-2.0, 2.0, 97),
        };
        let rs = sym.range_sample(&lat, None).unwrap();
        let (rmin, rmax, imin, imax) = rs.bbox();
        assert!(rmin.abs() < 1e-9, "Re min {rmin}");
        assert!((rmax - 4.0).abs() < 1e-9);
        assert!((imin + 1.0).abs() < 1e-9 && (imax - 1.0).abs() < 1e-9);
        // boundary polyline reaches Re ~ 0
        let min_edge_re = rs
            .boundary
            .iter()
            .flatten()
            .map(|&(re, _)| re)
            .fold(f64::INFINITY, f64::min);
        assert!(min_edge_re.abs() <= rs.alpha * 1.5);
        // containment of interior points, rejection of exterior ones
        assert!(rs.contains(num_complex::Complex::new(1.0, 0.3), 0.2));
        assert!(!rs.contains(num_complex::Complex::new(-2.0, 0.0), 0.2));
    }

    #[test]
    fn empty_lattice_is_an_error() {
        let sym = models::circle_advection::<f64>(1.0, None);
        let lat = RangeLattice {
            x: (0.0, 1.0, 0),
            xi: (0.0, 1.0, 4),
        };
        assert!(sym.range_sample(&lat, None).is_err());
    }
}
