//! Sources supported in an annulus outside `B_1` and their Kelvin images.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{ensure, Error, Result};
use crate::quadrature::composite;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Minimum number of radial sampling nodes for sampled sources.
pub const MIN_RADIAL_NODES: usize = 64;
/// Absolute floor of the zero-mean tolerance, scaled by `max(1, ‖f‖)`.
pub const ZERO_MEAN_TOL: f64 = 1e-8;

type PointFn = Arc<dyn Fn([f64; 2]) -> Complex64 + Send + Sync>;
type ProfileFn = Arc<dyn Fn(i64, f64) -> Complex64 + Send + Sync>;

/// Position of the signed mode `n` in a flat per-mode vector:
/// `0, +1, -1, +2, -2, ...`.
pub fn mode_index(n: i64) -> usize {
    match n {
        0 => 0,
        n if n > 0 => 2 * n as usize - 1,
        n => 2 * n.unsigned_abs() as usize,
    }
}

/// Inverse of [`mode_index`].
pub fn index_mode(k: usize) -> i64 {
    if k == 0 {
        0
    } else if k % 2 == 1 {
        k.div_ceil(2) as i64
    } else {
        -((k / 2) as i64)
    }
}

/// A source `f` on `ℝ² \ B_1`, supported in `r_lo ≤ |x| ≤ r_hi`.
#[derive(Clone)]
pub struct SourceSpec {
    r_lo: f64,
    r_hi: f64,
    evaluator: PointFn,
    closed: Option<(usize, ProfileFn)>,
    name: String,
}

impl fmt::Debug for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceSpec")
            .field("name", &self.name)
            .field("support", &[self.r_lo, self.r_hi])
            .field("closed_form_order", &self.closed.as_ref().map(|c| c.0))
            .finish()
    }
}

impl SourceSpec {
    pub fn new(
        name: impl Into<String>,
        r_lo: f64,
        r_hi: f64,
        evaluator: impl Fn([f64; 2]) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        ensure(r_lo > 1.0 && r_lo < r_hi && r_hi.is_finite(), || {
            format!("support [{r_lo}, {r_hi}] must lie strictly outside the unit disk")
        })?;
        Ok(SourceSpec { r_lo, r_hi, evaluator: Arc::new(evaluator), closed: None, name: name.into() })
    }

    /// Attaches closed-form radial profiles `F_n(ρ)` of the pushed-forward
    /// source for `|n| ≤ order`, on `[1/r_hi, 1/r_lo]`.
    pub fn with_profiles(
        mut self,
        order: usize,
        profiles: impl Fn(i64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        self.closed = Some((order, Arc::new(profiles)));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> [f64; 2] {
        [self.r_lo, self.r_hi]
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed.is_some()
    }

    /// `f(x)`, zero outside the support.
    pub fn evaluate(&self, x: [f64; 2]) -> Complex64 {
        let r = x[0].hypot(x[1]);
        if r < self.r_lo || r > self.r_hi {
            ZERO
        } else {
            (self.evaluator)(x)
        }
    }

    /// `f = Δ(φ g)` outside `B_1` with `g = Σ_{n=1}^{order} (r/6)^n e^{inθ}`
    /// and the quintic cutoff `φ` equal to 1 below `r = 2` and 0 above `r = 3`.
    pub fn cutoff_harmonic(order: usize) -> Result<Self> {
        ensure(order >= 1, || "order must be at least 1".into())?;
        let evaluator = move |x: [f64; 2]| {
            let r = x[0].hypot(x[1]);
            let theta = x[1].atan2(x[0]);
            (1..=order as i64).map(|n| cutoff_radial(n, r) * Complex64::from_polar(1.0, n as f64 * theta)).sum()
        };
        let profiles = |n: i64, rho: f64| {
            if n <= 0 || rho <= 0.0 {
                return ZERO;
            }
            let r = 1.0 / rho;
            if !(2.0..=3.0).contains(&r) {
                return ZERO;
            }
            cutoff_radial(n, r) * r.powi(4)
        };
        Ok(SourceSpec::new(format!("cutoff_harmonic(order={order})"), 2.0, 3.0, evaluator)?
            .with_profiles(order, profiles))
    }

    /// Source whose Kelvin image is `Δ w_c` with
    /// `w_c = [144 (ρ - 1/3)(1/2 - ρ)]⁴ cos θ` supported in `1/3 ≤ ρ ≤ 1/2`.
    /// Since `w_c` and `∂_ν w_c` vanish on `∂B_1`, the source is compatible.
    pub fn compatible_bump() -> Self {
        let evaluator = |x: [f64; 2]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let rho = 1.0 / r2.sqrt();
            let cos = x[0] / r2.sqrt();
            // F_*f(y) = f(x) |x|^4 at y = x/|x|²
            Complex64::new(2.0 * bump_laplacian(rho) * cos / (r2 * r2), 0.0)
        };
        let profiles = |n: i64, rho: f64| if n.abs() == 1 { Complex64::new(bump_laplacian(rho), 0.0) } else { ZERO };
        SourceSpec::new("compatible_bump", 2.0, 3.0, evaluator).expect("valid support").with_profiles(1, profiles)
    }
}

/// Quintic cutoff used by [`SourceSpec::cutoff_harmonic`]: value, first and
/// second derivatives.
pub fn cutoff(r: f64) -> [f64; 3] {
    if r <= 2.0 {
        return [1.0, 0.0, 0.0];
    }
    if r >= 3.0 {
        return [0.0; 3];
    }
    let v = 513.0 - 1080.0 * r + 900.0 * r * r - 370.0 * r.powi(3) + 75.0 * r.powi(4) - 6.0 * r.powi(5);
    let d1 = -1080.0 + 1800.0 * r - 1110.0 * r * r + 300.0 * r.powi(3) - 30.0 * r.powi(4);
    let d2 = 1800.0 - 2220.0 * r + 900.0 * r * r - 120.0 * r.powi(3);
    [v, d1, d2]
}

// 6^{-n} [r^n φ'' + (2n+1) r^{n-1} φ']
fn cutoff_radial(n: i64, r: f64) -> Complex64 {
    let [_, d1, d2] = cutoff(r);
    let s = (r / 6.0).powi(n as i32);
    Complex64::new(s * (d2 + (2 * n + 1) as f64 * d1 / r), 0.0)
}

fn bump(rho: f64) -> [f64; 3] {
    const LO: f64 = 1.0 / 3.0;
    if !(LO..=0.5).contains(&rho) {
        return [0.0; 3];
    }
    // q = 144 (ρ - 1/3)(1/2 - ρ), ψ = q⁴
    let q = 144.0 * (rho - LO) * (0.5 - rho);
    let dq = 144.0 * (0.5 + LO - 2.0 * rho);
    let d2q = -288.0;
    [q.powi(4), 4.0 * q.powi(3) * dq, 12.0 * q * q * dq * dq + 4.0 * q.powi(3) * d2q]
}

/// Radial part of `w_c` for [`SourceSpec::compatible_bump`] (the `e^{±iθ}`
/// coefficient is half of it).
pub fn bump_profile(rho: f64) -> f64 {
    bump(rho)[0]
}

// ½ (ψ'' + ψ'/ρ - ψ/ρ²): the e^{±iθ} coefficient of Δ(ψ cos θ)
fn bump_laplacian(rho: f64) -> f64 {
    let [v, d1, d2] = bump(rho);
    0.5 * (d2 + d1 / rho - v / (rho * rho))
}

#[derive(Clone)]
enum Repr {
    Closed(ProfileFn),
    Sampled {
        nodes: Vec<f64>,
        bary: Vec<f64>,
        // values[node][mode_index]
        values: Vec<Vec<Complex64>>,
    },
}

/// Radial profiles `F_n(ρ)` of a density on `B_1`, supported in
/// `rho_lo ≤ ρ ≤ rho_hi`.
#[derive(Clone)]
pub struct SourceProfiles {
    rho_lo: f64,
    rho_hi: f64,
    order: usize,
    active: Vec<i64>,
    repr: Repr,
}

impl fmt::Debug for SourceProfiles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceProfiles")
            .field("support", &[self.rho_lo, self.rho_hi])
            .field("order", &self.order)
            .field("active", &self.active)
            .finish()
    }
}

impl SourceProfiles {
    /// Profiles given in closed form, `profile(n, ρ)` for `|n| ≤ order`.
    pub fn from_fn(
        order: usize,
        rho_lo: f64,
        rho_hi: f64,
        profile: impl Fn(i64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        ensure(0.0 <= rho_lo && rho_lo < rho_hi && rho_hi <= 1.0, || {
            format!("profile support [{rho_lo}, {rho_hi}] must lie in [0, 1]")
        })?;
        let profile: ProfileFn = Arc::new(profile);
        let probe = composite(rho_lo, rho_hi, 4, 8);
        let n = order as i64;
        let mut active = Vec::new();
        for m in (0..=n).flat_map(|k| if k == 0 { vec![0] } else { vec![k, -k] }) {
            let mut any = false;
            for &s in &probe.nodes {
                let v = profile(m, s);
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("profile of mode {m} at ρ = {s}")));
                }
                any |= v != ZERO;
            }
            if any {
                active.push(m);
            }
        }
        Ok(SourceProfiles { rho_lo, rho_hi, order, active, repr: Repr::Closed(profile) })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn support(&self) -> [f64; 2] {
        [self.rho_lo, self.rho_hi]
    }

    /// Modes with a nonzero profile, in [`mode_index`] order.
    pub fn active_modes(&self) -> &[i64] {
        &self.active
    }

    pub fn eval(&self, n: i64, rho: f64) -> Complex64 {
        if n.unsigned_abs() as usize > self.order || rho < self.rho_lo || rho > self.rho_hi {
            return ZERO;
        }
        match &self.repr {
            Repr::Closed(f) => f(n, rho),
            Repr::Sampled { .. } => self.eval_all(rho)[mode_index(n)],
        }
    }

    /// All profiles at `ρ`, indexed by [`mode_index`].
    pub fn eval_all(&self, rho: f64) -> Vec<Complex64> {
        let mut out = vec![ZERO; 2 * self.order + 1];
        if rho < self.rho_lo || rho > self.rho_hi {
            return out;
        }
        match &self.repr {
            Repr::Closed(f) => {
                for &m in &self.active {
                    out[mode_index(m)] = f(m, rho);
                }
            }
            Repr::Sampled { nodes, bary, values } => {
                if let Some(k) = nodes.iter().position(|&x| x == rho) {
                    return values[k].clone();
                }
                let mut den = 0.0;
                for (k, (&x, &w)) in nodes.iter().zip(bary).enumerate() {
                    let t = w / (rho - x);
                    den += t;
                    for &m in &self.active {
                        let i = mode_index(m);
                        out[i] += values[k][i] * t;
                    }
                }
                for v in &mut out {
                    *v /= den;
                }
            }
        }
        out
    }

    fn gauss(&self) -> crate::quadrature::Rule {
        composite(self.rho_lo, self.rho_hi, 8, 24)
    }

    /// `∫_{B_1} F` = `2π ∫ ρ F_0(ρ) dρ`.
    pub fn mean(&self) -> Complex64 {
        let rule = self.gauss();
        2.0 * PI * rule.integrate(|s| self.eval(0, s) * s)
    }

    /// `‖f‖_{L²(ℝ² \ B_1)}` of the source whose Kelvin image these profiles
    /// are: `2π Σ ∫ |F_n|² ρ⁵ dρ`.
    pub fn source_norm(&self) -> f64 {
        let rule = self.gauss();
        let sum: f64 = rule.integrate(|s| {
            let v = self.eval_all(s);
            v.iter().map(|z| z.norm_sqr()).sum::<f64>() * s.powi(5)
        });
        (2.0 * PI * sum).sqrt()
    }

    /// Rejects densities with a nonzero mean beyond `1e-8 · max(1, ‖f‖)`.
    pub fn check_zero_mean(&self) -> Result<()> {
        let mean = self.mean().norm();
        if mean > ZERO_MEAN_TOL * self.source_norm().max(1.0) {
            return Err(Error::ZeroMeanViolation { mean });
        }
        Ok(())
    }
}

/// Radial profiles `F_n` of `F_*f(y) = f(y/|y|²)/|y|⁴` on `[1/r_hi, 1/r_lo]`
/// for `|n| ≤ order`. Closed-form profiles are used when the source carries
/// them; otherwise `F_*f` is sampled on `nodes` Chebyshev points and an
/// angular grid of `8·order` points and projected by FFT.
pub fn pushforward_source(spec: &SourceSpec, order: usize, nodes: usize) -> Result<SourceProfiles> {
    ensure(order >= 1, || "order must be at least 1".into())?;
    ensure(nodes >= MIN_RADIAL_NODES, || format!("need at least {MIN_RADIAL_NODES} radial nodes, got {nodes}"))?;
    let (lo, hi) = (1.0 / spec.r_hi, 1.0 / spec.r_lo);
    let profiles = if let Some((closed_order, f)) = &spec.closed {
        let f = Arc::clone(f);
        let limit = *closed_order as i64;
        SourceProfiles::from_fn(order, lo, hi, move |n, s| if n.abs() <= limit { f(n, s) } else { ZERO })?
    } else {
        sample_profiles(spec, order, nodes, lo, hi)?
    };
    profiles.check_zero_mean()?;
    Ok(profiles)
}

fn sample_profiles(spec: &SourceSpec, order: usize, count: usize, lo: f64, hi: f64) -> Result<SourceProfiles> {
    // Chebyshev points of the second kind and their barycentric weights
    let m = count - 1;
    let nodes: Vec<f64> = (0..=m)
        .map(|k| {
            let t = (PI * k as f64 / m as f64).cos();
            0.5 * (lo + hi) - 0.5 * (hi - lo) * t
        })
        .collect();
    let bary: Vec<f64> = (0..=m)
        .map(|k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            if k == 0 || k == m {
                0.5 * s
            } else {
                s
            }
        })
        .collect();
    let angular = 8 * order;
    let fft = FftPlanner::new().plan_fft_forward(angular);
    let mut values = Vec::with_capacity(nodes.len());
    for &rho in &nodes {
        let mut buf: Vec<Complex64> = (0..angular)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / angular as f64;
                let y = [rho * t.cos(), rho * t.sin()];
                let x = [y[0] / (rho * rho), y[1] / (rho * rho)];
                // nodes lie in the support; skip the range test, which can
                // reject the end nodes after rounding
                (spec.evaluator)(x) / rho.powi(4)
            })
            .collect();
        if let Some(bad) = buf.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(format!("source sample at ρ = {rho}, angle index {bad}")));
        }
        fft.process(&mut buf);
        let scale = 1.0 / angular as f64;
        let mut row = vec![ZERO; 2 * order + 1];
        row[0] = buf[0] * scale;
        for n in 1..=order {
            row[mode_index(n as i64)] = buf[n] * scale;
            row[mode_index(-(n as i64))] = buf[angular - n] * scale;
        }
        values.push(row);
    }
    let peak = values.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let active = (0..=2 * order)
        .filter(|&i| values.iter().any(|row| row[i].norm() > 1e-11 * peak))
        .map(index_mode)
        .collect();
    Ok(SourceProfiles { rho_lo: lo, rho_hi: hi, order, active, repr: Repr::Sampled { nodes, bary, values } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_matches_its_end_conditions() {
        assert!((cutoff(2.0 + 1e-15)[0] - 1.0).abs() < 1e-9);
        let at2 = {
            let r = 2.0f64;
            513.0 - 1080.0 * r + 900.0 * r * r - 370.0 * r.powi(3) + 75.0 * r.powi(4) - 6.0 * r.powi(5)
        };
        assert!((at2 - 1.0).abs() < 1e-12);
        for r in [2.0 + 1e-12, 3.0 - 1e-12] {
            let [_, d1, d2] = cutoff(r);
            assert!(d1.abs() < 1e-8 && d2.abs() < 1e-8, "{r}: {d1} {d2}");
        }
    }

    #[test]
    fn mode_index_roundtrip() {
        for k in 0..41 {
            assert_eq!(mode_index(index_mode(k)), k);
        }
        assert_eq!(mode_index(3), 5);
        assert_eq!(mode_index(-3), 6);
    }

    #[test]
    fn sampled_pushforward_agrees_with_closed_form() {
        let closed = SourceSpec::cutoff_harmonic(6).unwrap();
        let bare = SourceSpec::new("bare", 2.0, 3.0, {
            let c = closed.clone();
            move |x| c.evaluate(x)
        })
        .unwrap();
        let a = pushforward_source(&closed, 6, 64).unwrap();
        let b = pushforward_source(&bare, 6, 96).unwrap();
        for s in [0.34, 0.4, 0.45, 0.49] {
            for n in -6..=6 {
                let (x, y) = (a.eval(n, s), b.eval(n, s));
                assert!((x - y).norm() < 1e-6 * (1.0 + x.norm()), "n={n} s={s}: {x} vs {y}");
            }
        }
        assert_eq!(b.active_modes(), &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn nonzero_mean_is_rejected() {
        let spec = SourceSpec::new("lump", 2.0, 3.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(pushforward_source(&spec, 4, 64), Err(Error::ZeroMeanViolation { .. })));
        let zero = SourceSpec::new("zero", 2.0, 3.0, |_| ZERO).unwrap();
        let p = pushforward_source(&zero, 4, 64).unwrap();
        assert!(p.active_modes().is_empty());
    }

    #[test]
    fn radially_symmetric_source_has_only_mode_zero() {
        // d/dr-free zero-mean radial source: Δ of a radial bump
        let spec = SourceSpec::new("radial", 2.0, 3.0, |x| {
            let r = x[0].hypot(x[1]);
            let [_, d1, d2] = cutoff(r);
            Complex64::new(d2 + d1 / r, 0.0)
        })
        .unwrap();
        let p = pushforward_source(&spec, 4, 64).unwrap();
        assert_eq!(p.active_modes(), &[0]);
    }

    #[test]
    fn undersampled_radial_grid_is_rejected() {
        let spec = SourceSpec::compatible_bump();
        assert!(pushforward_source(&spec, 2, 32).is_err());
    }
}
