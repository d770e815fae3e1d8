//! PNG previews of field grids. Nothing downstream reads these.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{CliError, Result};
use crate::grid::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// Diverging blue-white-red map of one part of `u`, clipped symmetrically at
/// `clip`. Non-finite samples are grey. Samples come row-major with `y`
/// increasing, so rows are flipped to put `+y` at the top.
pub fn render(path: &Path, samples: &[Sample], resolution: usize, part: Part, clip: f64) -> Result<()> {
    if samples.len() != resolution * resolution || resolution == 0 {
        return Err(CliError::Other(format!(
            "{} samples do not form a {resolution}x{resolution} grid",
            samples.len()
        )));
    }
    let clip = if clip > 0.0 && clip.is_finite() { clip } else { 1.0 };
    let n = resolution as u32;
    let img = RgbImage::from_fn(n, n, |i, j| {
        let s = &samples[(n - 1 - j) as usize * resolution + i as usize];
        let v = match part {
            Part::Re => s.u.re,
            Part::Im => s.u.im,
        };
        colour(v / clip)
    });
    img.save(path).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))
}

fn colour(t: f64) -> Rgb<u8> {
    if !t.is_finite() {
        return Rgb([128, 128, 128]);
    }
    let t = t.clamp(-1.0, 1.0);
    let fade = |x: f64| (255.0 * (1.0 - x.abs())).round() as u8;
    if t >= 0.0 {
        Rgb([255, fade(t), fade(t)])
    } else {
        Rgb([fade(t), fade(t), 255])
    }
}
