//! Cartesian field grids.

use std::path::Path;

use alr_core::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Half-width of the square window `[-extent, extent]²`.
    pub extent: f64,
    /// Points per axis.
    pub resolution: usize,
}

impl GridSpec {
    pub fn axis(&self) -> Vec<f64> {
        let n = self.resolution;
        (0..n)
            .map(|i| if n == 1 { 0.0 } else { -self.extent + 2.0 * self.extent * i as f64 / (n - 1) as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub u: Complex64,
    pub region: &'static str,
}

impl Sample {
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Samples `f` row by row (`y` outer, `x` inner), rows in parallel.
pub fn sample<F>(spec: &GridSpec, f: F) -> Vec<Sample>
where
    F: Fn(f64, f64) -> (Complex64, &'static str) + Sync,
{
    let axis = spec.axis();
    axis.par_iter()
        .flat_map_iter(|&y| {
            let f = &f;
            axis.iter().map(move |&x| {
                let (u, region) = f(x, y);
                Sample { x, y, u, region }
            })
        })
        .collect()
}

pub fn write_grid(path: &Path, samples: &[Sample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "re_u", "im_u", "region"])?;
    for s in samples {
        w.write_record([fmt_f64(s.x), fmt_f64(s.y), fmt_f64(s.u.re), fmt_f64(s.u.im), s.region.to_string()])?;
    }
    w.flush().map_err(|e| crate::error::CliError::io(path.display(), e))?;
    Ok(())
}

/// Order statistics of `|u|` over the finite samples, for consistent clipping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
    pub q999: f64,
    pub max: f64,
    pub finite: usize,
    pub non_finite: usize,
}

pub fn quantiles(samples: &[Sample]) -> Quantiles {
    let mut mags: Vec<f64> = samples.iter().map(|s| s.u.norm()).filter(|m| m.is_finite()).collect();
    mags.sort_by(f64::total_cmp);
    let q = |p: f64| {
        if mags.is_empty() {
            f64::NAN
        } else {
            mags[((mags.len() - 1) as f64 * p).round() as usize]
        }
    };
    Quantiles {
        q50: q(0.5),
        q90: q(0.9),
        q99: q(0.99),
        q999: q(0.999),
        max: q(1.0),
        finite: mags.len(),
        non_finite: samples.len() - mags.len(),
    }
}

/// Largest finite `|u|` over samples with `lo ≤ r < hi`.
pub fn max_abs_in(samples: &[Sample], lo: f64, hi: f64) -> f64 {
    samples
        .iter()
        .filter(|s| {
            let r = s.radius();
            r >= lo && r < hi
        })
        .map(|s| s.u.norm())
        .filter(|m| m.is_finite())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_endpoints() {
        let a = GridSpec { extent: 3.0, resolution: 4 }.axis();
        assert_eq!(a, vec![-3.0, -1.0, 1.0, 3.0]);
    }

    #[test]
    fn sampling_order_and_stats() {
        let g = GridSpec { extent: 1.0, resolution: 3 };
        let s = sample(&g, |x, y| (Complex64::new(x, y), "core"));
        assert_eq!(s.len(), 9);
        assert_eq!((s[1].x, s[1].y), (0.0, -1.0));
        let q = quantiles(&s);
        assert_eq!(q.max, 2f64.sqrt());
        assert_eq!(q.q50, 1.0);
        assert_eq!(max_abs_in(&s, 0.0, 0.5), 0.0);
    }
}
