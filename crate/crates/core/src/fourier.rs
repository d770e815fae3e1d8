//! Fourier-mode algebra on circles, disks and annuli.
//!
//! Coefficients are indexed by a signed mode `n`: `0` is the constant term,
//! `+n` multiplies `e^{inθ}` and `-n` multiplies `e^{-inθ}`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Truncated Fourier series `h_0 + Σ_{n=1}^{N} (h_{n,+} e^{inθ} + h_{n,-} e^{-inθ})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalCoefficients {
    zero_mode: Complex64,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
    real_valued: bool,
}

impl ModalCoefficients {
    pub fn new(zero_mode: Complex64, plus: Vec<Complex64>, minus: Vec<Complex64>) -> Result<Self> {
        ensure(plus.len() == minus.len(), || {
            format!("plus/minus lengths differ ({} vs {})", plus.len(), minus.len())
        })?;
        ensure(!plus.is_empty(), || "truncation order must be at least 1".into())?;
        let finite = zero_mode.is_finite() && plus.iter().chain(&minus).all(|z| z.is_finite());
        if !finite {
            return Err(Error::NonFinite("modal coefficient".into()));
        }
        Ok(ModalCoefficients { zero_mode, plus, minus, real_valued: false })
    }

    pub fn zeros(order: usize) -> Self {
        assert!(order >= 1, "truncation order must be at least 1");
        ModalCoefficients {
            zero_mode: ZERO,
            plus: vec![ZERO; order],
            minus: vec![ZERO; order],
            real_valued: true,
        }
    }

    /// Copies `generator(n)` for every signed mode `|n| ≤ order`.
    pub fn from_generator(order: usize, generator: impl Fn(i64) -> Complex64) -> Result<Self> {
        ensure(order >= 1, || "truncation order must be at least 1".into())?;
        let n = order as i64;
        Self::new(
            generator(0),
            (1..=n).map(&generator).collect(),
            (1..=n).map(|k| generator(-k)).collect(),
        )
    }

    /// First `order` Fourier coefficients of a periodic sampler, by the
    /// trapezoid rule on `8 * order` equispaced nodes.
    pub fn from_sampler(order: usize, sampler: impl Fn(f64) -> Complex64) -> Result<Self> {
        ensure(order >= 1, || "truncation order must be at least 1".into())?;
        let nodes = 8 * order;
        let mut buf: Vec<Complex64> = (0..nodes)
            .map(|k| sampler(2.0 * PI * k as f64 / nodes as f64))
            .collect();
        if let Some(k) = buf.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(format!(
                "sampler returned {} at θ = {}",
                buf[k],
                2.0 * PI * k as f64 / nodes as f64
            )));
        }
        FftPlanner::new().plan_fft_forward(nodes).process(&mut buf);
        let scale = 1.0 / nodes as f64;
        Self::new(
            buf[0] * scale,
            (1..=order).map(|n| buf[n] * scale).collect(),
            (1..=order).map(|n| buf[nodes - n] * scale).collect(),
        )
    }

    /// Checks conjugate symmetry `h_{n,-} = conj(h_{n,+})` and flags the
    /// container as real-valued.
    pub fn into_real_valued(mut self, tol: f64) -> Result<Self> {
        let scale = self.max_abs().max(1.0);
        let sym = self.zero_mode.im.abs() <= tol * scale
            && self
                .plus
                .iter()
                .zip(&self.minus)
                .all(|(p, m)| (p.conj() - m).norm() <= tol * scale);
        ensure(sym, || "coefficients are not conjugate-symmetric".into())?;
        self.real_valued = true;
        Ok(self)
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn order(&self) -> usize {
        self.plus.len()
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.zero_mode
    }

    pub fn plus(&self) -> &[Complex64] {
        &self.plus
    }

    pub fn minus(&self) -> &[Complex64] {
        &self.minus
    }

    /// Coefficient of signed mode `n`; zero beyond the truncation.
    pub fn get(&self, n: i64) -> Complex64 {
        let k = n.unsigned_abs() as usize;
        match n {
            0 => self.zero_mode,
            _ if k > self.order() => ZERO,
            n if n > 0 => self.plus[k - 1],
            _ => self.minus[k - 1],
        }
    }

    /// Iterates `(n, h_{n,+}, h_{n,-})` for `n = 1..=N`.
    pub fn modes(&self) -> impl Iterator<Item = (usize, Complex64, Complex64)> + '_ {
        self.plus
            .iter()
            .zip(&self.minus)
            .enumerate()
            .map(|(k, (&p, &m))| (k + 1, p, m))
    }

    /// Builds a new container by applying `f(n, h_n)` to every signed mode.
    pub fn map_modes(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let n = self.order() as i64;
        ModalCoefficients {
            zero_mode: f(0, self.zero_mode),
            plus: (1..=n).map(|k| f(k, self.get(k))).collect(),
            minus: (1..=n).map(|k| f(-k, self.get(-k))).collect(),
            real_valued: false,
        }
    }

    /// Zero-padded (or truncated) copy with the given order.
    pub fn with_order(&self, order: usize) -> Self {
        assert!(order >= 1);
        let mut plus = self.plus.clone();
        let mut minus = self.minus.clone();
        plus.resize(order, ZERO);
        minus.resize(order, ZERO);
        ModalCoefficients { zero_mode: self.zero_mode, plus, minus, real_valued: self.real_valued }
    }

    /// Magnitude of the last retained mode, `max(|h_{N,+}|, |h_{N,-}|)`.
    pub fn tail_magnitude(&self) -> f64 {
        let last = self.order() - 1;
        self.plus[last].norm().max(self.minus[last].norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.plus
            .iter()
            .chain(&self.minus)
            .map(|z| z.norm())
            .fold(self.zero_mode.norm(), f64::max)
    }

    /// Evaluates the series at angle `theta`.
    pub fn synthesize(&self, theta: f64) -> Complex64 {
        let step = Complex64::from_polar(1.0, theta);
        let mut e = Complex64::new(1.0, 0.0);
        let mut sum = self.zero_mode;
        for (_, p, m) in self.modes() {
            e *= step;
            sum += p * e + m * e.conj();
        }
        sum
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_modes(|_, z| z * s)
    }
}

impl Add for &ModalCoefficients {
    type Output = ModalCoefficients;
    fn add(self, rhs: &ModalCoefficients) -> ModalCoefficients {
        let order = self.order().max(rhs.order());
        let a = self.with_order(order);
        a.map_modes(|n, z| z + rhs.get(n))
    }
}

impl Sub for &ModalCoefficients {
    type Output = ModalCoefficients;
    fn sub(self, rhs: &ModalCoefficients) -> ModalCoefficients {
        let order = self.order().max(rhs.order());
        let a = self.with_order(order);
        a.map_modes(|n, z| z - rhs.get(n))
    }
}

impl Mul<Complex64> for &ModalCoefficients {
    type Output = ModalCoefficients;
    fn mul(self, rhs: Complex64) -> ModalCoefficients {
        self.scale(rhs)
    }
}

/// Discrete `H^{1/2}` norm squared, `|h_0|² + Σ n (|h_{n,+}|² + |h_{n,-}|²)`.
pub fn h_half_norm(c: &ModalCoefficients) -> f64 {
    c.modes()
        .map(|(n, p, m)| n as f64 * (p.norm_sqr() + m.norm_sqr()))
        .sum::<f64>()
        + c.zero_mode().norm_sqr()
}

/// A point in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        ensure(r >= 0.0 && r.is_finite(), || format!("radius must be finite and nonnegative, got {r}"))?;
        ensure(theta.is_finite(), || "angle must be finite".into())?;
        Ok(PolarPoint { r, theta: theta.rem_euclid(2.0 * PI) })
    }

    pub fn from_cartesian(x: f64, y: f64) -> Self {
        PolarPoint { r: x.hypot(y), theta: y.atan2(x).rem_euclid(2.0 * PI) }
    }

    pub fn to_cartesian(self) -> [f64; 2] {
        [self.r * self.theta.cos(), self.r * self.theta.sin()]
    }
}

/// One annular piece of a piecewise-harmonic field:
/// `log_coeff · log r + Σ_n (inner_n r^{|n|} + outer_n r^{-|n|}) e^{inθ}`,
/// with the constant carried by `inner.zero_mode()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnularPiece {
    pub r_lo: f64,
    pub r_hi: f64,
    pub inner: ModalCoefficients,
    pub outer: ModalCoefficients,
    pub log_coeff: Complex64,
}

impl AnnularPiece {
    fn contains(&self, r: f64) -> bool {
        self.r_lo <= r && r <= self.r_hi
    }

    fn value(&self, p: PolarPoint) -> Complex64 {
        let step = Complex64::from_polar(1.0, p.theta);
        let mut e = Complex64::new(1.0, 0.0);
        let mut rn = 1.0;
        let inv = if p.r > 0.0 { 1.0 / p.r } else { 0.0 };
        let mut rmn = 1.0;
        let mut sum = self.inner.zero_mode();
        if self.log_coeff != ZERO {
            sum += self.log_coeff * p.r.ln();
        }
        let order = self.inner.order().max(self.outer.order()) as i64;
        for n in 1..=order {
            e *= step;
            rn *= p.r;
            rmn *= inv;
            let ec = e.conj();
            sum += (self.inner.get(n) * rn + self.outer.get(n) * rmn) * e
                + (self.inner.get(-n) * rn + self.outer.get(-n) * rmn) * ec;
        }
        sum
    }

    /// `(∂_r u, r^{-1} ∂_θ u)` by term-wise differentiation.
    fn gradient(&self, p: PolarPoint) -> [Complex64; 2] {
        let r = p.r;
        let step = Complex64::from_polar(1.0, p.theta);
        let mut e = Complex64::new(1.0, 0.0);
        let mut dr = ZERO;
        let mut dt = ZERO;
        if self.log_coeff != ZERO {
            dr += self.log_coeff / r;
        }
        let order = self.inner.order().max(self.outer.order()) as i64;
        // r^{n-1} and r^{-n-1}
        let mut rn1 = 1.0;
        let inv = if r > 0.0 { 1.0 / r } else { 0.0 };
        let mut rmn1 = inv;
        let i = Complex64::i();
        for n in 1..=order {
            e *= step;
            rmn1 *= inv;
            let nf = n as f64;
            let ec = e.conj();
            let (ip, im) = (self.inner.get(n), self.inner.get(-n));
            let (op, om) = (self.outer.get(n), self.outer.get(-n));
            // d/dr (A r^n + B r^{-n}) = n (A r^{n-1} - B r^{-n-1})
            dr += nf * ((ip * rn1 - op * rmn1) * e + (im * rn1 - om * rmn1) * ec);
            // r^{-1} d/dθ: ±in (A r^{n-1} + B r^{-n-1})
            dt += i * nf * ((ip * rn1 + op * rmn1) * e - (im * rn1 + om * rmn1) * ec);
            rn1 *= r;
        }
        [dr, dt]
    }
}

/// Piecewise-harmonic field on contiguous concentric annuli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicField {
    pieces: Vec<AnnularPiece>,
    real_valued: bool,
}

impl HarmonicField {
    pub fn new(pieces: Vec<AnnularPiece>) -> Result<Self> {
        ensure(!pieces.is_empty(), || "a field needs at least one region".into())?;
        for (k, p) in pieces.iter().enumerate() {
            ensure(0.0 <= p.r_lo && p.r_lo < p.r_hi, || {
                format!("region {k} has invalid bounds [{}, {}]", p.r_lo, p.r_hi)
            })?;
            if p.r_lo == 0.0 {
                ensure(p.outer.max_abs() == 0.0 && p.log_coeff == ZERO, || {
                    "a region touching the origin cannot carry r^-n or log terms".into()
                })?;
            }
            if k > 0 {
                ensure(pieces[k - 1].r_hi == p.r_lo, || {
                    format!("regions {} and {k} are not contiguous", k - 1)
                })?;
            }
        }
        Ok(HarmonicField { pieces, real_valued: false })
    }

    /// Single-region field on a disk of the given radius.
    pub fn disk(radius: f64, inner: ModalCoefficients) -> Result<Self> {
        let order = inner.order();
        let real = inner.is_real_valued();
        let mut f = Self::new(vec![AnnularPiece {
            r_lo: 0.0,
            r_hi: radius,
            inner,
            outer: ModalCoefficients::zeros(order),
            log_coeff: ZERO,
        }])?;
        f.real_valued = real;
        Ok(f)
    }

    pub fn pieces(&self) -> &[AnnularPiece] {
        &self.pieces
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn r_min(&self) -> f64 {
        self.pieces[0].r_lo
    }

    pub fn r_max(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].r_hi
    }

    fn locate(&self, r: f64) -> Result<&AnnularPiece> {
        self.pieces
            .iter()
            .find(|p| p.contains(r))
            .ok_or(Error::OutOfDomain { r })
    }

    pub fn evaluate(&self, p: PolarPoint) -> Result<Complex64> {
        Ok(self.locate(p.r)?.value(p))
    }

    /// Real part of a field flagged real-valued; fails if the imaginary
    /// residue exceeds `1e-12` relative to the value.
    pub fn evaluate_real(&self, p: PolarPoint) -> Result<f64> {
        ensure(self.real_valued, || "field is not flagged real-valued".into())?;
        let z = self.evaluate(p)?;
        ensure(z.im.abs() <= 1e-12 * z.norm().max(1.0), || {
            format!("imaginary residue {:e} in a real-valued field", z.im)
        })?;
        Ok(z.re)
    }

    /// `(∂_r u, r^{-1} ∂_θ u)`.
    pub fn gradient(&self, p: PolarPoint) -> Result<[Complex64; 2]> {
        Ok(self.locate(p.r)?.gradient(p))
    }

    /// Linear combination `α·self + β·other` on identical region layouts.
    pub fn combine(&self, alpha: Complex64, other: &HarmonicField, beta: Complex64) -> Result<Self> {
        ensure(self.pieces.len() == other.pieces.len(), || "region layouts differ".into())?;
        let pieces = self
            .pieces
            .iter()
            .zip(&other.pieces)
            .map(|(a, b)| {
                ensure(a.r_lo == b.r_lo && a.r_hi == b.r_hi, || "region layouts differ".into())?;
                Ok(AnnularPiece {
                    r_lo: a.r_lo,
                    r_hi: a.r_hi,
                    inner: &(&a.inner * alpha) + &(&b.inner * beta),
                    outer: &(&a.outer * alpha) + &(&b.outer * beta),
                    log_coeff: a.log_coeff * alpha + b.log_coeff * beta,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pieces)
    }
}

/// `∫_{B_ρ} |∇u|²` for `u = c_0 + Σ c_{n,±} r^n e^{±inθ}`.
pub fn grad_energy_disk(inner: &ModalCoefficients, radius: f64) -> f64 {
    2.0 * PI
        * inner
            .modes()
            .map(|(n, p, m)| {
                let rn = radius.powi(n as i32);
                n as f64 * ((p.norm() * rn).powi(2) + (m.norm() * rn).powi(2))
            })
            .sum::<f64>()
}

/// `∫_{r_lo<|x|<r_hi} |∇u|²` for a single annular piece. Cross terms between
/// `r^n` and `r^{-n}` of the same mode integrate to zero.
pub fn grad_energy_annulus(
    inner: &ModalCoefficients,
    outer: &ModalCoefficients,
    log_coeff: Complex64,
    r_lo: f64,
    r_hi: f64,
) -> Result<f64> {
    ensure(0.0 < r_lo && r_lo < r_hi, || format!("need 0 < r_lo < r_hi, got [{r_lo}, {r_hi}]"))?;
    let order = inner.order().max(outer.order()) as i64;
    let mut total = log_coeff.norm_sqr() * (r_hi / r_lo).ln();
    for n in 1..=order {
        let (hi, lo) = (r_hi.powi(n as i32), r_lo.powi(n as i32));
        let mut term = 0.0;
        for s in [n, -n] {
            let a = inner.get(s).norm();
            let b = outer.get(s).norm();
            if a > 0.0 {
                term += (a * hi).powi(2) - (a * lo).powi(2);
            }
            if b > 0.0 {
                term += (b / lo).powi(2) - (b / hi).powi(2);
            }
        }
        total += n as f64 * term;
    }
    Ok(2.0 * PI * total)
}

/// `∫_{B_ρ} |u|²` for `u = c_0 + Σ c_{n,±} r^n e^{±inθ}`.
pub fn l2_mass_disk(inner: &ModalCoefficients, radius: f64) -> f64 {
    let r2 = radius * radius;
    let modes: f64 = inner
        .modes()
        .map(|(n, p, m)| {
            let rn = radius.powi(n as i32);
            ((p.norm() * rn).powi(2) + (m.norm() * rn).powi(2)) * r2 / (2 * n + 2) as f64
        })
        .sum();
    2.0 * PI * (inner.zero_mode().norm_sqr() * r2 / 2.0 + modes)
}

/// `∫_{r_lo<|x|<r_hi} |u|²` for a single annular piece.
pub fn l2_mass_annulus(
    inner: &ModalCoefficients,
    outer: &ModalCoefficients,
    log_coeff: Complex64,
    r_lo: f64,
    r_hi: f64,
) -> Result<f64> {
    ensure(0.0 < r_lo && r_lo < r_hi, || format!("need 0 < r_lo < r_hi, got [{r_lo}, {r_hi}]"))?;
    let a0 = inner.zero_mode();
    let b0 = log_coeff;
    let zero = |r: f64| {
        let l = r.ln();
        let r2 = r * r;
        a0.norm_sqr() * r2 / 2.0
            + 2.0 * (a0 * b0.conj()).re * (r2 / 2.0 * l - r2 / 4.0)
            + b0.norm_sqr() * (r2 / 2.0 * l * l - r2 / 2.0 * l + r2 / 4.0)
    };
    let mut total = zero(r_hi) - zero(r_lo);
    let order = inner.order().max(outer.order()) as i64;
    for n in 1..=order {
        let nf = n as f64;
        for s in [n, -n] {
            let (a, b) = (inner.get(s), outer.get(s));
            let pa = |r: f64| (a.norm() * r.powi(n as i32 + 1)).powi(2) / (2.0 * nf + 2.0);
            let pb = |r: f64| {
                if n == 1 {
                    b.norm_sqr() * r.ln()
                } else {
                    (b.norm() / r.powi(n as i32 - 1)).powi(2) / (2.0 - 2.0 * nf)
                }
            };
            if a.norm() > 0.0 {
                total += pa(r_hi) - pa(r_lo);
            }
            if b.norm() > 0.0 {
                total += pb(r_hi) - pb(r_lo);
            }
            total += (a * b.conj()).re * (r_hi * r_hi - r_lo * r_lo);
        }
    }
    Ok(2.0 * PI * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_sampler_projects_to_zero_mode() {
        let h = ModalCoefficients::from_sampler(6, |_| c(5.0, 0.0)).unwrap();
        assert!((h.zero_mode() - c(5.0, 0.0)).norm() < 1e-14);
        assert!(h.plus().iter().chain(h.minus()).all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn single_exponential_is_recovered() {
        let h = ModalCoefficients::from_sampler(4, |t| Complex64::from_polar(1.0, t)).unwrap();
        for n in -4..=4i64 {
            let want = if n == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) };
            assert!((h.get(n) - want).norm() < 1e-12, "mode {n}");
        }
    }

    #[test]
    fn generator_copies_values() {
        let h = ModalCoefficients::from_generator(100, |n| {
            if n > 0 {
                c(1.0 / (n * n) as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        assert_eq!(h.order(), 100);
        assert_eq!(h.get(7), c(1.0 / 49.0, 0.0));
        assert_eq!(h.get(-7), c(0.0, 0.0));
        assert_eq!(h.get(101), c(0.0, 0.0));
        assert!((h.tail_magnitude() - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let err = ModalCoefficients::from_sampler(4, |t| c(1.0 / (t - t), 0.0)).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        assert!(ModalCoefficients::new(c(0.0, 0.0), vec![c(f64::NAN, 0.0)], vec![c(0.0, 0.0)]).is_err());
        assert!(ModalCoefficients::new(c(0.0, 0.0), vec![c(1.0, 0.0)], vec![]).is_err());
    }

    #[test]
    fn real_flag_requires_conjugate_symmetry() {
        let sym = ModalCoefficients::new(c(1.0, 0.0), vec![c(1.0, 2.0)], vec![c(1.0, -2.0)]).unwrap();
        assert!(sym.into_real_valued(1e-14).unwrap().is_real_valued());
        let asym = ModalCoefficients::new(c(1.0, 0.0), vec![c(1.0, 2.0)], vec![c(1.0, 2.0)]).unwrap();
        assert!(asym.into_real_valued(1e-14).is_err());
    }

    #[test]
    fn h_half_norm_examples() {
        assert_eq!(h_half_norm(&ModalCoefficients::zeros(3)), 0.0);
        let mut one = ModalCoefficients::zeros(3);
        one.plus[0] = c(1.0, 0.0);
        assert_eq!(h_half_norm(&one), 1.0);
        let inv = ModalCoefficients::from_generator(100, |n| {
            if n > 0 {
                c(1.0 / (n * n) as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        // direct summation of n^{-3}
        let oracle: f64 = (1..=100).map(|n| 1.0 / (n as f64).powi(3)).sum();
        assert!((h_half_norm(&inv) - oracle).abs() < 1e-14);
        assert!((oracle - 1.2020).abs() < 1e-4);
    }

    #[test]
    fn evaluate_simple_fields() {
        let mut k = ModalCoefficients::zeros(2);
        k.zero_mode = c(2.5, -1.0);
        let f = HarmonicField::disk(1.0, k).unwrap();
        for t in [0.0, 1.0, 4.0] {
            assert_eq!(f.evaluate(PolarPoint::new(0.7, t).unwrap()).unwrap(), c(2.5, -1.0));
        }
        let mut k = ModalCoefficients::zeros(2);
        k.plus[0] = c(1.0, 0.0);
        let f = HarmonicField::disk(1.0, k).unwrap();
        let z = f.evaluate(PolarPoint::new(0.5, PI / 2.0).unwrap()).unwrap();
        assert!((z - c(0.0, 0.5)).norm() < 1e-15);
        assert!(matches!(
            f.evaluate(PolarPoint::new(1.5, 0.0).unwrap()),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn origin_region_rejects_singular_terms() {
        let mut outer = ModalCoefficients::zeros(1);
        outer.plus[0] = c(1.0, 0.0);
        let bad = AnnularPiece {
            r_lo: 0.0,
            r_hi: 1.0,
            inner: ModalCoefficients::zeros(1),
            outer,
            log_coeff: c(0.0, 0.0),
        };
        assert!(HarmonicField::new(vec![bad]).is_err());
    }

    #[test]
    fn disk_energy_examples() {
        let mut k = ModalCoefficients::zeros(3);
        k.zero_mode = c(3.0, 0.0);
        assert_eq!(grad_energy_disk(&k, 1.0), 0.0);
        k.plus[0] = c(1.0, 0.0);
        assert!((grad_energy_disk(&k, 1.0) - 2.0 * PI).abs() < 1e-14);
        let mut k = ModalCoefficients::zeros(3);
        k.plus[1] = c(1.0, 0.0);
        assert!((grad_energy_disk(&k, 0.5) - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn annulus_energy_examples() {
        let z = ModalCoefficients::zeros(2);
        assert_eq!(grad_energy_annulus(&z, &z, c(0.0, 0.0), 1.0, 3.0).unwrap(), 0.0);
        let mut outer = ModalCoefficients::zeros(2);
        outer.plus[0] = c(1.0, 0.0);
        let e = grad_energy_annulus(&z, &outer, c(0.0, 0.0), 1.0, 3.0).unwrap();
        assert!((e - 16.0 * PI / 9.0).abs() < 1e-14);
        assert!(grad_energy_annulus(&z, &z, c(0.0, 0.0), 2.0, 1.0).is_err());
    }

    #[test]
    fn l2_mass_of_constant() {
        let mut k = ModalCoefficients::zeros(1);
        k.zero_mode = c(2.0, 0.0);
        assert!((l2_mass_disk(&k, 1.5) - 4.0 * PI * 2.25).abs() < 1e-12);
        let z = ModalCoefficients::zeros(1);
        let m = l2_mass_annulus(&k, &z, c(0.0, 0.0), 1.0, 2.0).unwrap();
        assert!((m - 4.0 * PI * 3.0).abs() < 1e-12);
    }
}
