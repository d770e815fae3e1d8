//! Log-log least-squares fits of a quantity against the loss parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residual above which a fit is reported as unreliable.
pub const UNRELIABLE_RESIDUAL: f64 = 0.1;

/// Fit of `ln q = intercept + slope · ln δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in `ln q`.
    pub max_residual: f64,
    pub delta_window: [f64; 2],
    /// Number of points used in the fit.
    pub points: usize,
    /// Loss values dropped because the quantity was zero or not finite.
    pub excluded: Vec<f64>,
}

impl RateFit {
    pub fn is_reliable(&self) -> bool {
        self.max_residual <= UNRELIABLE_RESIDUAL
    }

    /// `|slope - target| ≤ rel · |target|`.
    pub fn slope_within(&self, target: f64, rel: f64) -> bool {
        (self.slope - target).abs() <= rel * target.abs()
    }
}

/// Least-squares line through `(ln δ, ln q)`. Points with `q ≤ 0` or
/// non-finite `q` are skipped and listed in [`RateFit::excluded`].
pub fn fit_power_law(deltas: &[f64], values: &[f64]) -> Result<RateFit> {
    if deltas.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "{} loss values but {} samples",
            deltas.len(),
            values.len()
        )));
    }
    let mut xs = Vec::with_capacity(deltas.len());
    let mut ys = Vec::with_capacity(deltas.len());
    let mut excluded = Vec::new();
    for (&d, &q) in deltas.iter().zip(values) {
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::InvalidArgument(format!("loss must be positive, got {d}")));
        }
        if q > 0.0 && q.is_finite() {
            xs.push(d.ln());
            ys.push(q.ln());
        } else {
            log::warn!("excluding δ = {d:e}: quantity {q:e} cannot enter a log-log fit");
            excluded.push(d);
        }
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!("{} usable points", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all loss values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    let (lo, hi) = deltas
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    Ok(RateFit {
        slope,
        intercept,
        max_residual,
        delta_window: [lo, hi],
        points: xs.len(),
        excluded,
    })
}

/// `count` loss values log-uniformly spaced between `lo` and `hi` inclusive,
/// largest first.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (hi.log10(), lo.log10());
    (0..count)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64))
        .collect()
}

/// Checks the sweep preconditions: at least 4 points spanning 3 decades.
pub fn check_sweep_grid(deltas: &[f64]) -> Result<()> {
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().copied().fold(0.0, f64::max);
    let span = hi / lo;
    if deltas.len() < 4 || span.is_nan() || span < 1e3 * (1.0 - 1e-12) {
        return Err(Error::InsufficientData(format!(
            "a sweep needs >= 4 points over >= 3 decades, got {} points over [{lo:e}, {hi:e}]",
            deltas.len()
        )));
    }
    if deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        return Err(Error::InvalidArgument("every loss value must lie in (0, 1)".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power_law() {
        let d = log_grid(1e-10, 1e-4, 13);
        let q: Vec<f64> = d.iter().map(|x| 3.0 * x.powf(-0.5)).collect();
        let fit = fit_power_law(&d, &q).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(fit.max_residual < 1e-10 && fit.is_reliable());
        assert_eq!(fit.points, 13);
        assert!((fit.delta_window[0] - 1e-10).abs() < 1e-22);
    }

    #[test]
    fn zero_values_are_excluded() {
        let d = [1e-2, 1e-3, 1e-4, 1e-5];
        let fit = fit_power_law(&d, &[1.0, 0.0, 1e-2, 1e-3]).unwrap();
        assert_eq!(fit.excluded, vec![1e-3]);
        assert_eq!(fit.points, 3);
        assert!(fit_power_law(&d, &[0.0, 0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn grid_preconditions() {
        assert!(check_sweep_grid(&log_grid(1e-8, 1e-2, 7)).is_ok());
        assert!(check_sweep_grid(&[1e-3, 1e-2, 1e-1]).is_err());
        assert!(check_sweep_grid(&log_grid(1e-3, 1e-2, 7)).is_err());
    }
}
