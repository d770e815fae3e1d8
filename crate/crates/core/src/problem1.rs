//! Core-shell Dirichlet problem in `B_R`: permittivity `-1 + iδ` in the unit
//! disk, `1` in the matrix `B_R \ B_1`, Dirichlet data `g` on `∂B_R`.
//!
//! Inside the unit disk `u_δ = c_0 + Σ c_{n,±} r^n e^{±inθ}`. The reflected
//! field `v_δ = u_δ ∘ F^{-1}` on `B_1 \ B_{1/R}` is
//! `a_0 + Σ (a_{n,±} ρ^n + b_{n,±} ρ^{-n}) e^{±inθ}`, so in the matrix
//! `u_δ(r, θ) = a_0 + Σ (a_{n,±} r^{-n} + b_{n,±} r^n) e^{±inθ}`.
//! Because `F` preserves angles, the data pulled back to `∂B_{1/R}` has the
//! same coefficients as `g`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::fourier::{
    grad_energy_annulus, grad_energy_disk, h_half_norm, l2_mass_annulus, l2_mass_disk, AnnularPiece, HarmonicField,
    ModalCoefficients,
};
use crate::rate::{check_sweep_grid, fit_power_law, RateFit};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Geometry, loss and truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    radius: f64,
    delta: f64,
    order: usize,
}

impl SolverConfig {
    pub fn new(radius: f64, delta: f64, order: usize) -> Result<Self> {
        ensure(radius > 1.0 && radius.is_finite(), || format!("outer radius must exceed 1, got {radius}"))?;
        ensure(delta > 0.0 && delta < 1.0, || format!("loss must lie in (0, 1), got {delta}"))?;
        ensure(order >= 1, || "truncation order must be at least 1".into())?;
        Ok(SolverConfig { radius, delta, order })
    }

    /// Truncation sized at `4 n_δ`.
    pub fn auto(radius: f64, delta: f64) -> Result<Self> {
        Self::new(radius, delta, 1)?;
        Self::new(radius, delta, 4 * truncation_order(delta, radius))
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

/// `n_δ = ⌈½ |ln δ / ln R|⌉`, at least 1: the mode where `R^{-2n}` and `δ`
/// balance.
pub fn truncation_order(delta: f64, radius: f64) -> usize {
    let x = 0.5 * (delta.ln() / radius.ln()).abs();
    let nearest = x.round();
    // values that are integers up to rounding, e.g. δ = R^{-2k}
    let x = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) { nearest } else { x };
    (x.ceil() as usize).max(1)
}

/// `c_n / h_n = 2 / [(2 - iδ) R^{-n} + iδ R^n]` for `n ≥ 1`.
pub fn mode_response(n: u32, radius: f64, delta: f64) -> Complex64 {
    let rn = radius.powi(n as i32);
    let denom = Complex64::new(2.0, -delta) / rn + Complex64::new(0.0, delta * rn);
    // imaginary part δ (R^n - R^{-n}) > 0 for δ > 0, n ≥ 1
    debug_assert!(denom.im > 0.0, "vanishing modal denominator");
    Complex64::new(2.0, 0.0) / denom
}

/// Modulus of the multiplier `iδ(R^{-n} - R^n) / [2R^{-n} - iδ(R^{-n} - R^n)]`
/// mapping `h_{n,±}` to the mode of `u_δ - v` on `∂B_{1/R}`. Never exceeds 1.
pub fn gap_multiplier_modulus(n: u32, radius: f64, delta: f64) -> f64 {
    let rn = radius.powi(n as i32);
    let t = delta * (rn - 1.0 / rn);
    // 1/sqrt(1 + x²) with x = 2R^{-n}/t; hypot(x, 1) ≥ 1 keeps the result ≤ 1
    let x = (2.0 / rn) / t;
    1.0 / x.hypot(1.0)
}

/// Modal solution of the core-shell problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreShellSolution {
    pub config: SolverConfig,
    /// Dirichlet data on `∂B_{1/R}` (equal to the coefficients of `g`).
    pub h: ModalCoefficients,
    /// Disk coefficients of `u_δ`.
    pub c: ModalCoefficients,
    /// `ρ^n` coefficients of `v_δ` on `B_1 \ B_{1/R}`.
    pub a: ModalCoefficients,
    /// `ρ^{-n}` coefficients of `v_δ`; `b_0 = 0`.
    pub b: ModalCoefficients,
}

pub fn solve_modes(h: &ModalCoefficients, config: SolverConfig) -> Result<CoreShellSolution> {
    let h = h.with_order(config.order);
    let (radius, delta) = (config.radius, config.delta);
    let responses: Vec<Complex64> = (1..=config.order as u32).map(|n| mode_response(n, radius, delta)).collect();
    let c = h.map_modes(|n, hn| if n == 0 { hn } else { hn * responses[n.unsigned_abs() as usize - 1] });
    let (a, b) = shell_from_disk(&c, delta);
    Ok(CoreShellSolution { config, h, c, a, b })
}

fn shell_from_disk(c: &ModalCoefficients, delta: f64) -> (ModalCoefficients, ModalCoefficients) {
    let a = c.map_modes(|n, cn| if n == 0 { cn } else { cn * Complex64::new(2.0, -delta) / 2.0 });
    let b = c.map_modes(|n, cn| if n == 0 { ZERO } else { cn * Complex64::new(0.0, delta) / 2.0 });
    (a, b)
}

/// `δ → 0` limit of the modal solution: `c_n = R^n h_n`, `b = 0`. The
/// returned configuration carries `delta = 0`.
pub fn lossless_limit(h: &ModalCoefficients, radius: f64) -> Result<CoreShellSolution> {
    let config = SolverConfig::new(radius, 0.5, h.order())?;
    let c = h.map_modes(|n, hn| hn * radius.powi(n.unsigned_abs() as i32));
    let (a, b) = shell_from_disk(&c, 0.0);
    Ok(CoreShellSolution { config: SolverConfig { delta: 0.0, ..config }, h: h.clone(), c, a, b })
}

#[derive(Debug, Clone, Copy)]
struct Energies {
    disk_grad: f64,
    matrix_grad: f64,
    disk_l2: f64,
    matrix_l2: f64,
}

fn energies(c: &ModalCoefficients, a: &ModalCoefficients, b: &ModalCoefficients, radius: f64) -> Energies {
    Energies {
        disk_grad: grad_energy_disk(c, 1.0),
        matrix_grad: grad_energy_annulus(b, a, ZERO, 1.0, radius).expect("R > 1"),
        disk_l2: l2_mass_disk(c, 1.0),
        matrix_l2: l2_mass_annulus(&matrix_inner(a, b), a, ZERO, 1.0, radius).expect("R > 1"),
    }
}

// constant term rides on the r^n coefficients in the matrix
fn matrix_inner(a: &ModalCoefficients, b: &ModalCoefficients) -> ModalCoefficients {
    b.map_modes(|n, bn| if n == 0 { a.zero_mode() } else { bn })
}

fn matrix_outer(a: &ModalCoefficients) -> ModalCoefficients {
    a.map_modes(|n, an| if n == 0 { ZERO } else { an })
}

impl CoreShellSolution {
    pub fn radius(&self) -> f64 {
        self.config.radius
    }

    pub fn delta(&self) -> f64 {
        self.config.delta
    }

    /// `u_δ` on `B_R`: the disk `[0, 1]` and the matrix `[1, R]`.
    pub fn field(&self) -> HarmonicField {
        HarmonicField::new(vec![
            AnnularPiece {
                r_lo: 0.0,
                r_hi: 1.0,
                inner: self.c.clone(),
                outer: ModalCoefficients::zeros(self.c.order()),
                log_coeff: ZERO,
            },
            self.matrix_piece(),
        ])
        .expect("valid layout")
    }

    fn matrix_piece(&self) -> AnnularPiece {
        AnnularPiece {
            r_lo: 1.0,
            r_hi: self.radius(),
            inner: matrix_inner(&self.a, &self.b),
            outer: matrix_outer(&self.a),
            // u_δ = v_δ(1/r): b_0 log ρ = -b_0 log r
            log_coeff: -self.b.zero_mode(),
        }
    }

    /// `u_δ` restricted to the matrix `1 ≤ r ≤ R`.
    pub fn matrix_field(&self) -> HarmonicField {
        HarmonicField::new(vec![self.matrix_piece()]).expect("valid layout")
    }

    /// The reflected field `v_δ` on `1/R ≤ ρ ≤ 1`.
    pub fn shell_field(&self) -> HarmonicField {
        HarmonicField::new(vec![AnnularPiece {
            r_lo: 1.0 / self.radius(),
            r_hi: 1.0,
            inner: self.a.clone(),
            outer: self.b.map_modes(|n, bn| if n == 0 { ZERO } else { bn }),
            log_coeff: self.b.zero_mode(),
        }])
        .expect("valid layout")
    }

    fn energies(&self) -> Energies {
        energies(&self.c, &self.a, &self.b, self.radius())
    }

    /// Dissipated power `E_δ = δ ∫_{B_1} |∇u_δ|²`.
    pub fn power(&self) -> f64 {
        self.delta() * grad_energy_disk(&self.c, 1.0)
    }

    /// `∫_{B_1} |∇u_δ|²`.
    pub fn core_energy(&self) -> f64 {
        self.energies().disk_grad
    }

    /// `∫_{B_R} |∇u_δ|²`.
    pub fn grad_energy(&self) -> f64 {
        let e = self.energies();
        e.disk_grad + e.matrix_grad
    }

    /// `‖u_δ‖_{H¹(B_R)}`.
    pub fn h1_norm(&self) -> f64 {
        let e = self.energies();
        (e.disk_grad + e.matrix_grad + e.disk_l2 + e.matrix_l2).sqrt()
    }

    /// `‖u - w‖_{H¹(B_R)}` for two solutions on the same geometry.
    pub fn h1_distance(&self, other: &CoreShellSolution) -> Result<f64> {
        ensure(self.radius() == other.radius(), || "solutions live on different disks".into())?;
        let e = energies(&(&self.c - &other.c), &(&self.a - &other.a), &(&self.b - &other.b), self.radius());
        Ok((e.disk_grad + e.matrix_grad + e.disk_l2 + e.matrix_l2).sqrt())
    }

    /// Coefficients of `u_δ - v` on `∂B_{1/R}`.
    pub fn gap_coefficients(&self) -> ModalCoefficients {
        let radius = self.radius();
        self.c
            .map_modes(|n, cn| if n == 0 { ZERO } else { cn * radius.powi(-(n.unsigned_abs() as i32)) - self.h.get(n) })
    }
}

/// Harmonic extension `v` of `h` from `∂B_{1/R}` into `B_{1/R}`.
pub fn limit_field_v(h: &ModalCoefficients, radius: f64) -> Result<HarmonicField> {
    ensure(radius > 1.0, || format!("outer radius must exceed 1, got {radius}"))?;
    let inner = h.map_modes(|n, hn| hn * radius.powi(n.unsigned_abs() as i32));
    let inner = if h.is_real_valued() { inner.into_real_valued(1e-12)? } else { inner };
    HarmonicField::disk(1.0 / radius, inner)
}

/// Discrete `H^{1/2}(∂B_{1/R})` norm of `u_δ - v`, built from the modal
/// multipliers so that every factor is bounded by 1 exactly.
pub fn localized_resonance_gap(sol: &CoreShellSolution) -> f64 {
    let (radius, delta) = (sol.radius(), sol.delta());
    sol.h
        .modes()
        .map(|(n, p, m)| {
            let k = gap_multiplier_modulus(n as u32, radius, delta);
            n as f64 * k * k * (p.norm_sqr() + m.norm_sqr())
        })
        .sum::<f64>()
        .sqrt()
}

/// Compatibility classes for boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Compatible,
    Incompatible,
    Borderline,
    /// Too little data to estimate a decay rate.
    Indeterminate,
}

/// Analytic description of the coefficient tail, `|h_n| ~ n^power · ratio^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailDescriptor {
    /// Finitely many nonzero modes.
    Finite,
    Geometric { ratio: f64, power: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityVerdict {
    pub verdict: Verdict,
    /// Estimated `limsup |h_n|^{1/n}`.
    pub decay_rate: Option<f64>,
    /// Critical rate `1/R`.
    pub threshold: f64,
    pub evidence: String,
}

/// Relative half-width of the band around `1/R` reported as borderline.
pub const BORDERLINE_MARGIN: f64 = 1e-2;
/// Minimum number of nonzero coefficients needed for a tail fit.
pub const MIN_TAIL_COEFFICIENTS: usize = 16;

/// Classifies data by the summability of `Σ n R^{2n} |h_n|²`: the Cauchy
/// problem is solvable iff `v` continues harmonically to `B_1`.
pub fn classify_compatibility(
    h: &ModalCoefficients,
    radius: f64,
    tail: Option<TailDescriptor>,
) -> Result<CompatibilityVerdict> {
    ensure(radius > 1.0, || format!("outer radius must exceed 1, got {radius}"))?;
    let threshold = 1.0 / radius;
    if let Some(t) = tail {
        let (verdict, rate, evidence) = match t {
            TailDescriptor::Finite => (Verdict::Compatible, Some(0.0), "finite mode set".to_string()),
            TailDescriptor::Geometric { ratio, power } => {
                let s = ratio * radius;
                let v = if (s - 1.0).abs() <= 1e-12 {
                    if power < -1.0 {
                        Verdict::Compatible
                    } else {
                        Verdict::Incompatible
                    }
                } else if s < 1.0 {
                    Verdict::Compatible
                } else {
                    Verdict::Incompatible
                };
                (v, Some(ratio), format!("tail n^{power} * {ratio}^n against 1/R = {threshold}"))
            }
        };
        return Ok(CompatibilityVerdict { verdict, decay_rate: rate, threshold, evidence });
    }

    let mags: Vec<f64> = h.modes().map(|(_, p, m)| p.norm().max(m.norm())).collect();
    let last = mags.iter().rposition(|&m| m > 0.0);
    let Some(last) = last else {
        return Ok(CompatibilityVerdict {
            verdict: Verdict::Compatible,
            decay_rate: Some(0.0),
            threshold,
            evidence: "all modes above 0 vanish".into(),
        });
    };
    let trailing_zeros = mags.len() - 1 - last;
    if trailing_zeros >= MIN_TAIL_COEFFICIENTS {
        return Ok(CompatibilityVerdict {
            verdict: Verdict::Compatible,
            decay_rate: Some(0.0),
            threshold,
            evidence: format!("modes vanish beyond n = {} ({trailing_zeros} trailing zeros)", last + 1),
        });
    }
    let nonzero: Vec<(f64, f64)> = mags[..=last]
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(k, &m)| ((k + 1) as f64, m.ln()))
        .collect();
    if nonzero.len() < MIN_TAIL_COEFFICIENTS {
        return Ok(CompatibilityVerdict {
            verdict: Verdict::Indeterminate,
            decay_rate: None,
            threshold,
            evidence: format!(
                "{} nonzero coefficients, need at least {MIN_TAIL_COEFFICIENTS} or a tail descriptor",
                nonzero.len()
            ),
        });
    }
    let tail = &nonzero[nonzero.len() / 2..];
    let m = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / m;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let rate = (sxy / sxx).exp();
    let verdict = if rate < threshold * (1.0 - BORDERLINE_MARGIN) {
        Verdict::Compatible
    } else if rate > threshold * (1.0 + BORDERLINE_MARGIN) {
        Verdict::Incompatible
    } else {
        Verdict::Borderline
    };
    Ok(CompatibilityVerdict {
        verdict,
        decay_rate: Some(rate),
        threshold,
        evidence: format!(
            "log-linear fit over modes {}..={}: rate {rate:.6} vs 1/R = {threshold:.6}",
            tail[0].0, tail[tail.len() - 1].0
        ),
    })
}

/// Data with `h_0 = 0`, `h_{n,±} = R^{-nγ}/√n`, `γ = 1 - 2α`, for which
/// `∫_{B_R} |∇u_δ|²` grows like `δ^{-2α}`.
pub fn design_incompatible_data(alpha: f64, radius: f64, order: usize) -> Result<ModalCoefficients> {
    ensure(alpha > 0.0 && alpha < 0.5, || format!("alpha must lie in (0, 1/2), got {alpha}"))?;
    ensure(radius > 1.0, || format!("outer radius must exceed 1, got {radius}"))?;
    let gamma = 1.0 - 2.0 * alpha;
    ModalCoefficients::from_generator(order, |n| {
        if n == 0 {
            ZERO
        } else {
            let k = n.unsigned_abs() as f64;
            Complex64::new(radius.powf(-k * gamma) / k.sqrt(), 0.0)
        }
    })
}

/// Boundary data for sweeps: fixed coefficients or a mode generator that is
/// truncated at `max(min_order, 4 n_δ)` for the smallest loss in the sweep.
#[derive(Clone)]
pub enum BoundaryData {
    Coefficients(ModalCoefficients),
    Generator {
        generator: Arc<dyn Fn(i64) -> Complex64 + Send + Sync>,
        min_order: usize,
    },
}

impl std::fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryData::Coefficients(c) => f.debug_tuple("Coefficients").field(&c.order()).finish(),
            BoundaryData::Generator { min_order, .. } => {
                f.debug_struct("Generator").field("min_order", min_order).finish()
            }
        }
    }
}

impl BoundaryData {
    pub fn coefficients(&self, radius: f64, delta_min: f64) -> Result<ModalCoefficients> {
        match self {
            BoundaryData::Coefficients(c) => Ok(c.clone()),
            BoundaryData::Generator { generator, min_order } => {
                let order = (*min_order).max(4 * truncation_order(delta_min, radius));
                ModalCoefficients::from_generator(order, |n| generator(n))
            }
        }
    }
}

/// Scalar observables along a loss sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepQuantity {
    Power,
    GradEnergy,
    Gap,
    H1Norm,
}

impl SweepQuantity {
    pub fn of(self, sol: &CoreShellSolution) -> f64 {
        match self {
            SweepQuantity::Power => sol.power(),
            SweepQuantity::GradEnergy => sol.grad_energy(),
            SweepQuantity::Gap => localized_resonance_gap(sol),
            SweepQuantity::H1Norm => sol.h1_norm(),
        }
    }
}

/// Solves at every loss in `deltas` (independently, possibly in parallel).
pub fn solve_sweep(data: &BoundaryData, radius: f64, deltas: &[f64]) -> Result<Vec<CoreShellSolution>> {
    let delta_min = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let h = data.coefficients(radius, delta_min)?;
    deltas
        .par_iter()
        .map(|&d| solve_modes(&h, SolverConfig::new(radius, d, h.order())?))
        .collect()
}

/// Least-squares fit of `ln quantity` against `ln δ` over the sweep.
pub fn delta_sweep(data: &BoundaryData, radius: f64, deltas: &[f64], quantity: SweepQuantity) -> Result<RateFit> {
    check_sweep_grid(deltas)?;
    let sols = solve_sweep(data, radius, deltas)?;
    let values: Vec<f64> = sols.iter().map(|s| quantity.of(s)).collect();
    fit_power_law(deltas, &values)
}

/// Consistency residual of the stored invariants, relative to the largest
/// coefficient involved.
pub fn invariant_residual(sol: &CoreShellSolution) -> f64 {
    let (radius, delta) = (sol.radius(), sol.delta());
    let mut worst: f64 = 0.0;
    let rel = |x: Complex64, y: Complex64| (x - y).norm() / x.norm().max(y.norm()).max(f64::MIN_POSITIVE);
    worst = worst.max(sol.b.zero_mode().norm());
    worst = worst.max(rel(sol.a.zero_mode(), sol.c.zero_mode()));
    worst = worst.max(rel(sol.c.zero_mode(), sol.h.zero_mode()));
    for n in 1..=sol.c.order() as i64 {
        for s in [n, -n] {
            let cn = sol.c.get(s);
            if cn == ZERO && sol.h.get(s) == ZERO {
                continue;
            }
            let rn = radius.powi(n as i32);
            worst = worst.max(rel(sol.a.get(s), cn * Complex64::new(2.0, -delta) / 2.0));
            worst = worst.max(rel(sol.b.get(s), cn * Complex64::new(0.0, delta) / 2.0));
            let lhs = cn * (Complex64::new(2.0, -delta) / rn + Complex64::new(0.0, delta * rn)) / 2.0;
            worst = worst.max(rel(lhs, sol.h.get(s)));
        }
    }
    worst
}

/// `2π Σ n |c_n|²` weighted by `δ`, written out per mode. Used by tests as a
/// cross-check against [`CoreShellSolution::power`].
pub fn power_by_modes(sol: &CoreShellSolution) -> f64 {
    sol.delta() * 2.0 * PI * sol.c.modes().map(|(n, p, m)| n as f64 * (p.norm_sqr() + m.norm_sqr())).sum::<f64>()
}

/// Upper bound `‖h‖²_{H^{1/2}}` on the squared gap.
pub fn gap_bound(sol: &CoreShellSolution) -> f64 {
    h_half_norm(&sol.h) - sol.h.zero_mode().norm_sqr()
}

impl From<ModalCoefficients> for BoundaryData {
    fn from(c: ModalCoefficients) -> Self {
        BoundaryData::Coefficients(c)
    }
}
