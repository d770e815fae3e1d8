//! Whole-plane source problem: `∇·(ε_δ ∇u_δ) = f` in `ℝ²`, permittivity
//! `-1 + iδ` in `B_1`, `f` supported outside `B_1` with zero mean, and
//! `u_δ → 0` at infinity.
//!
//! With `w` the Neumann solution of `Δw = F_*f` in `B_1`, the field is
//! `a_0 + Σ a_{n,±} r^n e^{±inθ}` inside `B_1` and
//! `b_0 + Σ b_{n,±} r^{-n} e^{±inθ} + w(x/|x|²)` outside.

pub mod radial;
pub mod source;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::fourier::{grad_energy_annulus, grad_energy_disk, ModalCoefficients};
use crate::kelvin::ExtendedPoint;
use crate::problem1::Verdict;
use crate::quadrature::{PointRule, QuadratureGrid, Region};
use crate::rate::{check_sweep_grid, fit_power_law, RateFit};

pub use radial::{profile_at, solve_w, RadialProfiles, DEFAULT_RADIAL_NODES};
pub use source::{pushforward_source, SourceProfiles, SourceSpec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative compatibility tolerance, scaled by `max(1, ‖f‖)`.
pub const COMPAT_TOL: f64 = 1e-8;

/// Compatibility of a source, read off the boundary trace of `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceVerdict {
    pub verdict: Verdict,
    /// Largest surviving trace mode `(n, |w_n(1)|)` with `n ≠ 0`.
    pub dominant_mode: Option<(i64, f64)>,
    pub tol: f64,
}

/// Compatible iff every trace mode with `n ≠ 0` is at most `tol` in
/// modulus; the mode-0 trace is absorbed by the additive constants.
pub fn classify_compatibility2(w_trace: &ModalCoefficients, tol: f64) -> SourceVerdict {
    let mut dominant: Option<(i64, f64)> = None;
    for (n, p, m) in w_trace.modes() {
        for (s, z) in [(n as i64, p), (-(n as i64), m)] {
            if dominant.is_none_or(|d| z.norm() > d.1) {
                dominant = Some((s, z.norm()));
            }
        }
    }
    let verdict = match dominant {
        Some((_, mag)) if mag > tol => Verdict::Incompatible,
        _ => Verdict::Compatible,
    };
    SourceVerdict { verdict, dominant_mode: dominant.filter(|d| d.1 > 0.0), tol }
}

/// Coefficients of `u_δ` inside (`a`) and outside (`b`) the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneCoefficients {
    pub delta: f64,
    pub a: ModalCoefficients,
    pub b: ModalCoefficients,
}

/// `a_n = w_n/(iδ)`, `b_n = (1 - iδ) w_n/(iδ)`, `b_0 = -w(0)`,
/// `a_0 = b_0 + w_0(1)`.
pub fn solve_modes2(w_trace: &ModalCoefficients, w_at_origin: Complex64, delta: f64) -> Result<PlaneCoefficients> {
    ensure(delta > 0.0 && delta < 1.0, || format!("loss must lie in (0, 1), got {delta}"))?;
    let id = Complex64::new(0.0, delta);
    let b0 = -w_at_origin;
    let a = w_trace.map_modes(|n, w| if n == 0 { b0 + w } else { w / id });
    let b = w_trace.map_modes(|n, w| if n == 0 { b0 } else { w * (Complex64::new(1.0, -delta) / id) });
    Ok(PlaneCoefficients { delta, a, b })
}

/// The loss-independent part of the problem: Kelvin image of the source,
/// the Neumann solution `w` and its compatibility verdict.
#[derive(Debug, Clone)]
pub struct PlaneProblem {
    pub source: SourceProfiles,
    pub w: Arc<RadialProfiles>,
    /// `w` on `∂B_1`; the `n ≠ 0` modes are zeroed when the source is
    /// classified compatible, see [`PlaneProblem::snapped`].
    pub w_trace: ModalCoefficients,
    pub raw_trace: ModalCoefficients,
    pub verdict: SourceVerdict,
    pub source_norm: f64,
}

impl PlaneProblem {
    pub fn new(spec: &SourceSpec, order: usize, nodes: usize) -> Result<Self> {
        let source = pushforward_source(spec, order, nodes.max(source::MIN_RADIAL_NODES))?;
        Self::from_profiles(source, nodes)
    }

    pub fn from_profiles(source: SourceProfiles, nodes: usize) -> Result<Self> {
        source.check_zero_mean()?;
        let w = solve_w(&source, nodes)?;
        let raw_trace = w.trace();
        let source_norm = source.source_norm();
        let verdict = classify_compatibility2(&raw_trace, COMPAT_TOL * source_norm.max(1.0));
        let w_trace = if verdict.verdict == Verdict::Compatible {
            raw_trace.map_modes(|n, z| if n == 0 { z } else { ZERO })
        } else {
            raw_trace.clone()
        };
        Ok(PlaneProblem { source, w: Arc::new(w), w_trace, raw_trace, verdict, source_norm })
    }

    /// True when quadrature-level trace residue was discarded because the
    /// source is compatible.
    pub fn snapped(&self) -> bool {
        self.w_trace != self.raw_trace
    }

    pub fn at_delta(&self, delta: f64) -> Result<PlaneSolution> {
        let coefficients = solve_modes2(&self.w_trace, self.w.at_origin(), delta)?;
        Ok(PlaneSolution { coefficients, w: Arc::clone(&self.w) })
    }
}

/// `u_δ` for one loss value.
#[derive(Debug, Clone)]
pub struct PlaneSolution {
    pub coefficients: PlaneCoefficients,
    pub w: Arc<RadialProfiles>,
}

impl PlaneSolution {
    pub fn delta(&self) -> f64 {
        self.coefficients.delta
    }

    pub fn evaluate(&self, x: [f64; 2]) -> Result<Complex64> {
        Ok(self.value_and_gradient(x)?.0)
    }

    /// Limit at the point at infinity is `b_0 + w(0) = 0`.
    pub fn evaluate_extended(&self, x: ExtendedPoint) -> Result<Complex64> {
        match x {
            ExtendedPoint::Finite(p) => self.evaluate(p),
            ExtendedPoint::Infinity => Ok(self.coefficients.b.zero_mode() + self.w.at_origin()),
        }
    }

    /// Cartesian gradient `(∂_x u, ∂_y u)`.
    pub fn gradient(&self, x: [f64; 2]) -> Result<[Complex64; 2]> {
        Ok(self.value_and_gradient(x)?.1)
    }

    /// Value and Cartesian gradient.
    pub fn value_and_gradient(&self, x: [f64; 2]) -> Result<(Complex64, [Complex64; 2])> {
        let r = x[0].hypot(x[1]);
        let theta = x[1].atan2(x[0]);
        let (v, [dr, dt]) = if r <= 1.0 {
            modal(&self.coefficients.a, r, theta, false)
        } else {
            let (v, [dr, dt]) = modal(&self.coefficients.b, r, theta, true);
            // w(1/r, θ): ∂_r = -ρ² ∂_ρ, r^{-1}∂_θ = ρ² (ρ^{-1}∂_θ)
            let rho = 1.0 / r;
            let (wv, [wr, wt]) = self.w.field(rho, theta)?;
            (v + wv, [dr - wr * rho * rho, dt + wt * rho * rho])
        };
        let (c, s) = (theta.cos(), theta.sin());
        Ok((v, [dr * c - dt * s, dr * s + dt * c]))
    }
}

// value and (∂_r, r^{-1}∂_θ) of Σ coef r^{±n} e^{inθ}
fn modal(coef: &ModalCoefficients, r: f64, theta: f64, decaying: bool) -> (Complex64, [Complex64; 2]) {
    let mut v = coef.zero_mode();
    let mut dr = ZERO;
    let mut dt = ZERO;
    let step = Complex64::from_polar(1.0, theta);
    let mut e = Complex64::new(1.0, 0.0);
    let base = if decaying { 1.0 / r } else { r };
    let mut pw = 1.0;
    for n in 1..=coef.order() as i64 {
        e *= step;
        // r^{n-1} (or r^{-n+1}) before the update
        let prev = pw;
        pw *= base;
        let nf = n as f64;
        let (p, m) = (coef.get(n), coef.get(-n));
        let ec = e.conj();
        let term = p * e + m * ec;
        v += term * pw;
        let radial = if decaying { -nf * pw / r } else { nf * prev };
        dr += term * radial;
        let ang = if decaying { nf * pw / r } else { nf * prev };
        dt += Complex64::new(0.0, ang) * (p * e - m * ec);
    }
    (v, [dr, dt])
}

/// `∫_O |∇u_δ|²`. Disks and annuli inside `B_1` use closed-form modal
/// energies; other regions use a tensor rule split at `|x| = 1`.
pub fn power_on_region(sol: &PlaneSolution, region: &Region) -> Result<f64> {
    region.validate()?;
    match *region {
        Region::Disk { radius } if radius <= 1.0 => return Ok(grad_energy_disk(&sol.coefficients.a, radius)),
        Region::Annulus { r_lo, r_hi } if r_hi <= 1.0 && r_lo > 0.0 => {
            return grad_energy_annulus(
                &sol.coefficients.a,
                &ModalCoefficients::zeros(sol.coefficients.a.order()),
                ZERO,
                r_lo,
                r_hi,
            )
        }
        _ => {}
    }
    let grid = QuadratureGrid::for_modes(sol.coefficients.a.order());
    let rule = PointRule::over(region, &grid, &[1.0])?;
    let parts: Result<Vec<f64>> = rule
        .points
        .par_iter()
        .zip(&rule.weights)
        .map(|(&p, &w)| {
            let [gx, gy] = sol.gradient(p)?;
            Ok(w * (gx.norm_sqr() + gy.norm_sqr()))
        })
        .collect();
    Ok(parts?.iter().sum())
}

/// Rate of `∫_O |∇u_δ|²` against `δ`.
pub fn plane_delta_sweep(problem: &PlaneProblem, deltas: &[f64], region: &Region) -> Result<RateFit> {
    check_sweep_grid(deltas)?;
    let values = deltas
        .iter()
        .map(|&d| power_on_region(&problem.at_delta(d)?, region))
        .collect::<Result<Vec<_>>>()?;
    fit_power_law(deltas, &values)
}

/// `∫_{B_1} |∇u_δ|²` summed mode by mode; equals
/// [`power_on_region`] on the unit disk.
pub fn core_energy(sol: &PlaneSolution) -> f64 {
    2.0 * PI
        * sol
            .coefficients
            .a
            .modes()
            .map(|(n, p, m)| n as f64 * (p.norm_sqr() + m.norm_sqr()))
            .sum::<f64>()
}
