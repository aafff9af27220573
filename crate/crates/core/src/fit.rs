//! Log-log power-law regression used by every scaling experiment.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::num::{real, to_f64, Real};

/// Fitted power law y = constant * x^exponent over a window of x values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub constant: f64,
    pub r_squared: f64,
    pub window: [f64; 2],
}

/// Least squares on (ln x, ln y) restricted to xs in [window.0, window.1].
/// Needs at least 4 positive points in the window.
pub fn fit_power_law<F: Real>(xs: &[F], ys: &[F], window: (F, F)) -> CoreResult<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(CoreError::InvalidArgument(
            "fit_power_law: xs and ys differ in length".into(),
        ));
    }
    let eps = real::<F>(1e-12);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x < window.0 - eps || x > window.1 + eps {
            continue;
        }
        if x <= F::zero() || y <= F::zero() {
            return Err(CoreError::InvalidArgument(format!(
                "fit_power_law: nonpositive data in window (x = {}, y = {})",
                x, y
            )));
        }
        pts.push((to_f64(x).ln(), to_f64(y).ln()));
    }
    if pts.len() < 4 {
        return Err(CoreError::InvalidArgument(format!(
            "fit_power_law: only {} points in window, need >= 4",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(CoreError::InvalidArgument(
            "fit_power_law: degenerate abscissae".into(),
        ));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(lx, ly) in &pts {
        let pred = slope * lx + intercept;
        ss_res += (ly - pred) * (ly - pred);
        ss_tot += (ly - mean_y) * (ly - mean_y);
    }
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(ScalingFit {
        exponent: slope,
        constant: intercept.exp(),
        r_squared,
        window: [to_f64(window.0), to_f64(window.1)],
    })
}

impl ScalingFit {
    /// JSON record with deterministic field order.
    pub fn to_json(&self) -> String {
        format!(
            "{{\"exponent\":{},\"constant\":{},\"r_squared\":{},\"window\":[{},{}]}}",
            fmt17(self.exponent),
            fmt17(self.constant),
            fmt17(self.r_squared),
            fmt17(self.window[0]),
            fmt17(self.window[1])
        )
    }
}

/// Print a float with 17 significant digits (round-trip exact for f64).
pub fn fmt17(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_cubic() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powi(3)).collect();
        let fit = fit_power_law(&xs, &ys, (0.0, 1.0)).unwrap();
        assert_relative_eq!(fit.exponent, 3.0, epsilon = 1e-12);
        assert_relative_eq!(fit.constant, 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noisy_two_thirds() {
        // deterministic 1% "noise"
        let xs: Vec<f64> = (1..=40).map(|i| i as f64 / 4.0).collect();
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| 2.0 * x.powf(2.0 / 3.0) * (1.0 + 0.01 * ((i as f64 * 2.399).sin())))
            .collect();
        let fit = fit_power_law(&xs, &ys, (0.0, 10.0)).unwrap();
        assert!((fit.exponent - 2.0 / 3.0).abs() < 0.02);
        assert!((fit.constant - 2.0).abs() < 0.1);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [1.0, 8.0, 27.0];
        assert!(fit_power_law(&xs, &ys, (0.0, 10.0)).is_err());
    }

    #[test]
    fn nonpositive_data_rejected() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, -8.0, 27.0, 64.0];
        assert!(fit_power_law(&xs, &ys, (0.0, 10.0)).is_err());
    }

    #[test]
    fn fmt17_roundtrip() {
        let vals = [std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -1.2345678901234567e-8];
        for &v in &vals {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }
}
