//! Kelvin inversion `K(x) = R₂² x / |x|²` about the circle of radius `R₂`,
//! with pushforward and pullback rules for densities and fields.

use num_complex::Complex64;

use crate::error::{ensure, Error, Result};
use crate::fourier::{AnnularPiece, HarmonicField, PolarPoint};

/// Inversion about the circle of radius `pivot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KelvinMap {
    pivot: f64,
}

/// A point of the plane compactified by one point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedPoint {
    Finite([f64; 2]),
    Infinity,
}

impl Default for KelvinMap {
    fn default() -> Self {
        KelvinMap { pivot: 1.0 }
    }
}

impl KelvinMap {
    pub fn new(pivot: f64) -> Result<Self> {
        ensure(pivot > 0.0 && pivot.is_finite(), || format!("pivot radius must be positive, got {pivot}"))?;
        Ok(KelvinMap { pivot })
    }

    pub fn pivot(&self) -> f64 {
        self.pivot
    }

    pub fn map_point(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 == 0.0 {
            return Err(Error::InvalidArgument("the origin has no finite Kelvin image".into()));
        }
        let s = self.pivot * self.pivot / r2;
        Ok([s * x[0], s * x[1]])
    }

    /// Same map on the compactified plane: `0 ↔ ∞`.
    #[allow(clippy::redundant_guards)] // the guard also catches -0.0
    pub fn map_extended(&self, x: ExtendedPoint) -> ExtendedPoint {
        match x {
            ExtendedPoint::Infinity => ExtendedPoint::Finite([0.0, 0.0]),
            ExtendedPoint::Finite(p) if p == [0.0, 0.0] => ExtendedPoint::Infinity,
            ExtendedPoint::Finite(p) => ExtendedPoint::Finite(self.map_point(p).expect("nonzero point")),
        }
    }

    pub fn map_polar(&self, p: PolarPoint) -> Result<PolarPoint> {
        ensure(p.r > 0.0, || "the origin has no finite Kelvin image".into())?;
        Ok(PolarPoint { r: self.pivot * self.pivot / p.r, theta: p.theta })
    }

    /// `|det DK(x)| = R₂⁴ / |x|⁴`.
    pub fn jacobian(&self, x: [f64; 2]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        self.pivot.powi(4) / (r2 * r2)
    }

    /// `K_*f(y) = f(x) / J(x)` with `x = K^{-1}(y)`.
    pub fn pushforward_density<F>(&self, f: F, y: [f64; 2]) -> Result<Complex64>
    where
        F: Fn([f64; 2]) -> Complex64,
    {
        let x = self.map_point(y)?;
        Ok(f(x) / self.jacobian(x))
    }

    /// `v = u ∘ K^{-1}` as a closure.
    pub fn pullback_field<'a, U>(&self, u: U) -> impl Fn([f64; 2]) -> Result<Complex64> + 'a
    where
        U: Fn([f64; 2]) -> Result<Complex64> + 'a,
    {
        let k = *self;
        move |y| u(k.map_point(y)?)
    }

    /// Exact pullback of a piecewise-harmonic field: region `[a, b]` maps to
    /// `[R₂²/b, R₂²/a]`, `r^n` and `r^{-n}` terms swap, and `log r` flips sign.
    pub fn pullback_harmonic(&self, u: &HarmonicField) -> Result<HarmonicField> {
        let p2 = self.pivot * self.pivot;
        let ln_p2 = p2.ln();
        let pieces = u
            .pieces()
            .iter()
            .rev()
            .map(|piece| {
                let lo = if piece.r_hi.is_infinite() { 0.0 } else { p2 / piece.r_hi };
                let hi = if piece.r_lo == 0.0 { f64::INFINITY } else { p2 / piece.r_lo };
                // |x|^n = R₂^{2n} ρ^{-n}
                let inner = piece.outer.map_modes(|n, b| {
                    if n == 0 {
                        piece.inner.zero_mode() + piece.log_coeff * ln_p2
                    } else {
                        b * p2.powi(-(n.unsigned_abs() as i32))
                    }
                });
                let outer = piece
                    .inner
                    .map_modes(|n, a| if n == 0 { Complex64::new(0.0, 0.0) } else { a * p2.powi(n.unsigned_abs() as i32) });
                AnnularPiece { r_lo: lo, r_hi: hi, inner, outer, log_coeff: -piece.log_coeff }
            })
            .collect();
        HarmonicField::new(pieces)
    }
}

/// Outcome of a transmission check on a circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionReport {
    /// `sup |v - u|` over the angular grid.
    pub value_mismatch: f64,
    /// `sup |∂_r v + ∂_r u|`; the radial flux changes sign under reflection.
    pub flux_mismatch: f64,
    pub pass: bool,
}

/// Compares the traces and radial fluxes of an inner field `v` and an outer
/// field `u` on the circle of radius `radius`, with `ν` taken as the outward
/// normal of the inner region.
pub fn verify_transmission(
    v_interior: &HarmonicField,
    u_exterior: &HarmonicField,
    radius: f64,
    samples: usize,
    tol: f64,
) -> Result<TransmissionReport> {
    let mut value_mismatch: f64 = 0.0;
    let mut flux_mismatch: f64 = 0.0;
    for k in 0..samples {
        let p = PolarPoint { r: radius, theta: 2.0 * std::f64::consts::PI * k as f64 / samples as f64 };
        let dv = v_interior.gradient(p)?[0];
        let du = u_exterior.gradient(p)?[0];
        value_mismatch = value_mismatch.max((v_interior.evaluate(p)? - u_exterior.evaluate(p)?).norm());
        flux_mismatch = flux_mismatch.max((dv + du).norm());
    }
    Ok(TransmissionReport {
        value_mismatch,
        flux_mismatch,
        pass: value_mismatch <= tol && flux_mismatch <= tol,
    })
}
