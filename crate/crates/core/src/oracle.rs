//! Brute-force verifiers. Nothing here reuses the closed-form solvers: the
//! transmission system is assembled from the raw interface conditions and
//! solved by elimination, energies come from point quadrature, and radial
//! profiles from finite differences.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ensure, Error, Result};
use crate::fourier::{HarmonicField, ModalCoefficients, PolarPoint};
use crate::kelvin::KelvinMap;
use crate::problem1::{solve_modes, CoreShellSolution, SolverConfig};
use crate::quadrature::{PointRule, QuadratureGrid, Region};
use crate::rate::{fit_power_law, RateFit};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The 3×3 system for one mode: unknowns `(c, p, q)` with
/// `u = c r^n` in `B_1` and `u = p r^n + q r^{-n}` in the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionSystem {
    pub matrix: [[Complex64; 3]; 3],
    pub rhs: [Complex64; 3],
}

impl TransmissionSystem {
    pub fn new(n: u32, h: Complex64, radius: f64, delta: f64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let nf = n as f64;
        let rn = radius.powi(n as i32);
        let eps = Complex64::new(-1.0, delta);
        TransmissionSystem {
            matrix: [
                // Dirichlet at r = R
                [ZERO, one * rn, one / rn],
                // continuity at r = 1
                [one, -one, -one],
                // flux at r = 1: (-1 + iδ) n c = n (p - q)
                [eps * nf, -one * nf, one * nf],
            ],
            rhs: [h, ZERO, ZERO],
        }
    }

    /// Gaussian elimination with partial pivoting, carried out in
    /// double-double arithmetic: eliminating the flux row cancels
    /// `1 + 1/ε ≈ -iδ`, which costs `|log10 δ|` digits in plain doubles.
    pub fn solve(&self) -> Result<[Complex64; 3]> {
        let mut a = self.matrix.map(|row| row.map(Cdd::from));
        let mut b = self.rhs.map(Cdd::from);
        self.eliminate(&mut a, &mut b)?;
        let mut x = [Cdd::from(ZERO); 3];
        for row in (0..3).rev() {
            let mut s = b[row];
            for k in row + 1..3 {
                s = s.sub(a[row][k].mul(x[k]));
            }
            x[row] = s.div(a[row][row]);
        }
        Ok(x.map(Cdd::to_c64))
    }

    #[allow(clippy::needless_range_loop)]
    fn eliminate(&self, a: &mut [[Cdd; 3]; 3], b: &mut [Cdd; 3]) -> Result<()> {
        let scale = self.matrix.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        for col in 0..3 {
            let piv = (col..3)
                .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
                .expect("non-empty range");
            if a[piv][col].norm() <= 1e-300 * scale.max(1.0) {
                return Err(Error::Singular(format!("zero pivot in column {col}")));
            }
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..3 {
                let f = a[row][col].div(a[col][col]);
                for k in col..3 {
                    let t = a[col][k];
                    a[row][k] = a[row][k].sub(f.mul(t));
                }
                let t = b[col];
                b[row] = b[row].sub(f.mul(t));
            }
        }
        Ok(())
    }
}

// double-double real: value hi + lo with |lo| ≤ ulp(hi)/2
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn quick(a: f64, b: f64) -> Self {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        Dd::quick(s.hi, s.lo + self.lo + o.lo)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::quick(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::new(q1)).neg());
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::new(q2)).neg());
        let q3 = r.hi / o.hi;
        Dd::quick(q1, q2).add(Dd::new(q3))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    fn from(z: Complex64) -> Self {
        Cdd { re: Dd::new(z.re), im: Dd::new(z.im) }
    }

    fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }

    fn norm(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }

    fn sub(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.add(o.re.neg()), im: self.im.add(o.im.neg()) }
    }

    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    fn div(self, o: Cdd) -> Cdd {
        // scale to keep |o|² in range
        let s = Dd::new(1.0 / o.norm());
        let (or, oi) = (o.re.mul(s), o.im.mul(s));
        let den = or.mul(or).add(oi.mul(oi));
        let (nr, ni) = (self.re.mul(s), self.im.mul(s));
        Cdd {
            re: nr.mul(or).add(ni.mul(oi)).div(den),
            im: ni.mul(or).add(nr.mul(oi).neg()).div(den),
        }
    }
}

/// Mode-`n` solution `(c, p, q)` of the core-shell problem from the raw
/// interface conditions. Accepts any `δ > 0`.
pub fn mode_transmission_oracle(n: u32, h: Complex64, radius: f64, delta: f64) -> Result<(Complex64, Complex64, Complex64)> {
    ensure(n >= 1, || "mode must be at least 1".into())?;
    ensure(radius > 1.0, || format!("outer radius must exceed 1, got {radius}"))?;
    ensure(delta > 0.0 && delta.is_finite(), || format!("loss must be positive, got {delta}"))?;
    let [c, p, q] = TransmissionSystem::new(n, h, radius, delta).solve()?;
    Ok((c, p, q))
}

/// `∫_region |∇u|²` by tensor quadrature of a Cartesian gradient.
pub fn quadrature_energy_fn<G>(gradient: G, region: &Region, grid: &QuadratureGrid, breaks: &[f64]) -> Result<f64>
where
    G: Fn([f64; 2]) -> Result<[Complex64; 2]>,
{
    let rule = PointRule::over(region, grid, breaks)?;
    let mut total = 0.0;
    for (&p, &w) in rule.points.iter().zip(&rule.weights) {
        let [gx, gy] = gradient(p)?;
        total += w * (gx.norm_sqr() + gy.norm_sqr());
    }
    Ok(total)
}

/// `∫_region |∇u|²` for a piecewise-harmonic field, with radial panels split
/// at the field's internal interfaces.
pub fn quadrature_energy(field: &HarmonicField, region: &Region, grid: &QuadratureGrid) -> Result<f64> {
    let breaks: Vec<f64> = field.pieces().iter().map(|p| p.r_hi).collect();
    quadrature_energy_fn(
        |x| {
            let p = PolarPoint::from_cartesian(x[0], x[1]);
            let [dr, dt] = field.gradient(p)?;
            let (c, s) = (p.theta.cos(), p.theta.sin());
            Ok([dr * c - dt * s, dr * s + dt * c])
        },
        region,
        grid,
        &breaks,
    )
}

/// Finite-difference radial profile.
#[derive(Debug, Clone)]
pub struct FdProfile {
    pub rho: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FdProfile {
    pub fn trace(&self) -> Complex64 {
        *self.values.last().expect("non-empty profile")
    }
}

/// Inner end of the finite-difference grid; regularity is imposed there as a
/// homogeneous Dirichlet condition, which costs `O(ρ_min^n)`.
pub const FD_RHO_MIN: f64 = 1e-6;

/// Second-order central differences for
/// `w'' + w'/ρ - n² w/ρ² = f` on `[ρ_min, 1]` with `w(ρ_min) = 0` and
/// `w'(1) = 0` (ghost node), `intervals` uniform cells.
pub fn fd_radial_bvp<F>(n: u32, f: F, intervals: usize) -> Result<FdProfile>
where
    F: Fn(f64) -> Complex64,
{
    ensure(n >= 1, || "the Neumann problem for mode 0 is singular; use n >= 1".into())?;
    ensure(intervals >= 1000, || format!("need at least 1000 cells, got {intervals}"))?;
    let m = intervals;
    let h = (1.0 - FD_RHO_MIN) / m as f64;
    let rho: Vec<f64> = (0..=m).map(|j| FD_RHO_MIN + j as f64 * h).collect();
    let n2 = (n as f64).powi(2);
    // unknowns w_1..w_m; w_0 = 0
    let size = m;
    let mut lower = vec![ZERO; size];
    let mut diag = vec![ZERO; size];
    let mut upper = vec![ZERO; size];
    let mut rhs = vec![ZERO; size];
    for k in 0..size {
        let j = k + 1;
        let r = rho[j];
        let lo = 1.0 / (h * h) - 1.0 / (2.0 * h * r);
        let hi = 1.0 / (h * h) + 1.0 / (2.0 * h * r);
        diag[k] = Complex64::new(-2.0 / (h * h) - n2 / (r * r), 0.0);
        rhs[k] = f(r);
        if j == m {
            // ghost w_{m+1} = w_{m-1}
            lower[k] = Complex64::new(lo + hi, 0.0);
        } else {
            lower[k] = Complex64::new(lo, 0.0);
            upper[k] = Complex64::new(hi, 0.0);
        }
    }
    let sol = thomas(&lower, &diag, &upper, &rhs)?;
    let mut values = Vec::with_capacity(m + 1);
    values.push(ZERO);
    values.extend(sol);
    Ok(FdProfile { rho, values })
}

// lower[0] and upper[last] are ignored
fn thomas(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64], rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let mut c = vec![ZERO; n];
    let mut d = vec![ZERO; n];
    let mut denom = diag[0];
    if denom.norm() == 0.0 {
        return Err(Error::Singular("tridiagonal pivot".into()));
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom.norm() == 0.0 {
            return Err(Error::Singular("tridiagonal pivot".into()));
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { ZERO };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![ZERO; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Observed order `log2(|e(M) - e(2M)| / |e(2M) - e(4M)|)` of the trace
/// computed on `M`, `2M` and `4M` cells.
pub fn fd_convergence_order<F>(n: u32, f: F, intervals: usize) -> Result<f64>
where
    F: Fn(f64) -> Complex64 + Copy,
{
    let t: Vec<Complex64> = [1, 2, 4]
        .iter()
        .map(|k| fd_radial_bvp(n, f, k * intervals).map(|p| p.trace()))
        .collect::<Result<_>>()?;
    Ok(((t[0] - t[1]).norm() / (t[1] - t[2]).norm()).log2())
}

/// Both sides of `Im ∫_{∂B_R} ∂_ν u conj(g) = δ ∫_{B_1} |∇u|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    pub boundary_flux: f64,
    pub dissipation: f64,
    pub residual: f64,
}

/// Multiplying the equation by `conj(u)` and integrating by parts gives
/// `∫ ε |∇u|² = ∫_{∂B_R} ∂_r u conj(g)`; the imaginary part isolates the
/// dissipation in the core with a plus sign.
///
/// The flux side is summed from the matrix coefficients `a, b` with `g`
/// replaced by the trace `a R^{-n} + b R^n`, which reduces each mode to
/// `2n Im(b conj(a))` and avoids cancelling the O(1) part of `∂_r u conj(g)`.
/// The dissipation side is summed from the core coefficients `c`.
pub fn energy_identity_check(sol: &CoreShellSolution) -> EnergyBalance {
    let mut flux = 0.0;
    let mut core = 0.0;
    for n in 1..=sol.c.order() as i64 {
        let nf = n as f64;
        for s in [n, -n] {
            flux += 2.0 * nf * (sol.b.get(s) * sol.a.get(s).conj()).im;
            core += nf * sol.c.get(s).norm_sqr();
        }
    }
    let flux = 2.0 * PI * flux;
    let dissipation = sol.delta() * 2.0 * PI * core;
    let scale = flux.abs().max(dissipation.abs());
    let residual = if scale == 0.0 { 0.0 } else { (flux - dissipation).abs() / scale };
    EnergyBalance { boundary_flux: flux, dissipation, residual }
}

/// Outcome of the a priori bound probe.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Probe {
    /// `δ · ‖u_δ‖_{H¹(B_R)}` along the grid.
    pub products: Vec<f64>,
    pub max: f64,
    pub fit: RateFit,
}

/// `δ ‖u_δ‖_{H¹(B_R)}` over a loss grid, with a power-law fit of its trend.
pub fn lemma2_bound_probe(h: &ModalCoefficients, radius: f64, deltas: &[f64]) -> Result<Lemma2Probe> {
    let products = deltas
        .iter()
        .map(|&d| Ok(d * solve_modes(h, SolverConfig::new(radius, d, h.order())?)?.h1_norm()))
        .collect::<Result<Vec<f64>>>()?;
    let max = products.iter().copied().fold(0.0, f64::max);
    let fit = fit_power_law(deltas, &products)?;
    Ok(Lemma2Probe { products, max, fit })
}

/// Relative mismatch between `∫_{1<|x|<1/r} |∇u|²` and
/// `∫_{r<|y|<1} |∇(u ∘ F^{-1})|²`, both by quadrature.
pub fn kelvin_energy_identity(u: &HarmonicField, r: f64, grid: &QuadratureGrid) -> Result<f64> {
    ensure(r > 0.0 && r < 1.0, || format!("inner radius must lie in (0, 1), got {r}"))?;
    ensure(u.r_min() <= 1.0 && u.r_max() >= 1.0 / r, || "field must cover 1 <= |x| <= 1/r".into())?;
    let v = KelvinMap::default().pullback_harmonic(u)?;
    let outer = quadrature_energy(u, &Region::Annulus { r_lo: 1.0, r_hi: 1.0 / r }, grid)?;
    let inner = quadrature_energy(&v, &Region::Annulus { r_lo: r, r_hi: 1.0 }, grid)?;
    let scale = outer.abs().max(inner.abs());
    Ok(if scale == 0.0 { 0.0 } else { (outer - inner).abs() / scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let (c, p, q) = mode_transmission_oracle(1, Complex64::new(1.0, 0.0), 2.0, 1.0).unwrap();
        assert!((c - Complex64::new(8.0 / 13.0, -12.0 / 13.0)).norm() < 1e-15);
        assert!((c - Complex64::new(0.615385, -0.923077)).norm() < 1e-6);
        assert!((p + q - c).norm() < 1e-15);
    }

    #[test]
    fn zero_data_gives_zero() {
        let (c, p, q) = mode_transmission_oracle(3, ZERO, 3.0, 0.2).unwrap();
        assert_eq!((c, p, q), (ZERO, ZERO, ZERO));
    }

    #[test]
    fn lossless_limit() {
        let (c, p, q) = mode_transmission_oracle(2, Complex64::new(1.0, 0.0), 3.0, 1e-13).unwrap();
        assert!((c - Complex64::new(9.0, 0.0)).norm() < 1e-9);
        assert!(p.norm() < 1e-9);
        assert!((q - c).norm() < 1e-9);
    }

    #[test]
    fn fd_rejects_mode_zero_and_coarse_grids() {
        assert!(fd_radial_bvp(0, |_| ZERO, 2000).is_err());
        assert!(fd_radial_bvp(1, |_| ZERO, 10).is_err());
        let z = fd_radial_bvp(2, |_| ZERO, 1000).unwrap();
        assert!(z.values.iter().all(|v| *v == ZERO));
    }
}
