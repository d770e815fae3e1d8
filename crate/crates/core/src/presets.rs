//! Named boundary data used by the experiments and the command line.

use num_complex::Complex64;

use crate::error::{ensure, Result};
use crate::fourier::ModalCoefficients;
use crate::problem1::design_incompatible_data;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Mode count used for the inverse-square data in the reference experiments.
pub const REFERENCE_MODES: usize = 100;
/// Outer radius of the reference core-shell experiment.
pub const REFERENCE_RADIUS: f64 = 3.0;

/// `g = Σ_{n≥1} n^{-2} e^{inθ}`.
pub fn inverse_square(n: i64) -> Complex64 {
    if n > 0 {
        Complex64::new(1.0 / (n as f64 * n as f64), 0.0)
    } else {
        ZERO
    }
}

pub fn inverse_square_data(order: usize) -> Result<ModalCoefficients> {
    ModalCoefficients::from_generator(order, inverse_square)
}

/// `h_{n,±} = ratio^n` for `n ≥ 1`.
pub fn geometric_data(ratio: f64, order: usize) -> Result<ModalCoefficients> {
    ensure(ratio > 0.0 && ratio.is_finite(), || format!("ratio must be positive, got {ratio}"))?;
    ModalCoefficients::from_generator(order, |n| {
        if n == 0 {
            ZERO
        } else {
            Complex64::new(ratio.powi(n.unsigned_abs() as i32), 0.0)
        }
    })
}

/// Trigonometric polynomial from `(signed mode, coefficient)` pairs; modes
/// not listed are zero. The order is the largest listed `|n|`, at least 1.
pub fn trig_polynomial(terms: &[(i64, Complex64)]) -> Result<ModalCoefficients> {
    let order = terms.iter().map(|t| t.0.unsigned_abs() as usize).max().unwrap_or(1).max(1);
    ModalCoefficients::from_generator(order, |n| terms.iter().filter(|t| t.0 == n).map(|t| t.1).sum())
}

/// Designer data, see [`design_incompatible_data`].
pub fn designer_data(alpha: f64, radius: f64, order: usize) -> Result<ModalCoefficients> {
    design_incompatible_data(alpha, radius, order)
}

/// Real-valued cosine data `Σ cos(nθ)` for `n = 1..=modes`.
pub fn cosine_data(modes: usize) -> Result<ModalCoefficients> {
    let half = Complex64::new(0.5, 0.0);
    ModalCoefficients::from_generator(modes, |n| if n == 0 { ZERO } else { half })?.into_real_valued(0.0)
}
