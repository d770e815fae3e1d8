//! Modal Neumann problem `Δw = F` in `B_1`, `∂_ν w = 0`, `∫ w = 0`.
//!
//! For `n ≥ 1` the regular solution is
//! `w_n(ρ) = -(1/2n) ∫ (min/max)^n s F_n(s) ds + A ρ^n`, with `A` fixed by
//! `w_n'(1) = 0`. Mode 0 uses the logarithmic kernel.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::source::{index_mode, mode_index, SourceProfiles};
use crate::error::{ensure, Error, Result};
use crate::fourier::ModalCoefficients;
use crate::quadrature::{composite, Rule};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Default number of interior Gauss–Legendre nodes of the radial grid.
pub const DEFAULT_RADIAL_NODES: usize = 256;

const PANELS: usize = 4;
const PANEL_ORDER: usize = 24;

fn rule(a: f64, b: f64) -> Option<Rule> {
    if b <= a {
        return None;
    }
    if a > 0.0 {
        return Some(composite(a, b, PANELS, PANEL_ORDER));
    }
    // s log s at the origin: panels graded geometrically towards 0
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let base = Rule::gauss_legendre(PANEL_ORDER);
    let mut hi = b;
    for k in 0..40 {
        let lo = if k == 39 { 0.0 } else { 0.5 * hi };
        let r = base.mapped(lo, hi);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
        hi = lo;
    }
    Some(Rule { nodes, weights })
}

/// `(w_n(ρ), w_n'(ρ))` for every signed mode, indexed by [`mode_index`],
/// evaluated directly by quadrature.
pub fn profile_at(f: &SourceProfiles, rho: f64) -> Vec<(Complex64, Complex64)> {
    let [lo, hi] = f.support();
    let order = f.order();
    let mut out = vec![(ZERO, ZERO); 2 * order + 1];
    let constants = Constants::new(f);
    let below = rule(lo, rho.min(hi));
    let above = rule(rho.max(lo), hi);
    let active = f.active_modes();
    for (k, r) in [below, above].into_iter().enumerate() {
        let Some(r) = r else { continue };
        let inside = k == 0;
        for (&s, &wt) in r.nodes.iter().zip(&r.weights) {
            let vals = f.eval_all(s);
            for &m in active {
                let i = mode_index(m);
                let fv = vals[i] * wt;
                if m == 0 {
                    if inside {
                        out[i].0 += fv * s * rho.ln();
                        out[i].1 += fv * s / rho;
                    } else {
                        out[i].0 += fv * s * s.ln();
                    }
                    continue;
                }
                let n = m.unsigned_abs() as i32;
                let nf = n as f64;
                if inside {
                    let q = s / rho;
                    let qn = q.powi(n);
                    out[i].0 += fv * (-s * qn / (2.0 * nf));
                    out[i].1 += fv * (0.5 * qn * q);
                } else {
                    let q = rho / s;
                    let qn1 = q.powi(n - 1);
                    out[i].0 += fv * (-s * qn1 * q / (2.0 * nf));
                    out[i].1 += fv * (-0.5 * qn1);
                }
            }
        }
    }
    for &m in active {
        let i = mode_index(m);
        if m == 0 {
            out[i].0 += constants.c0;
        } else {
            let n = m.unsigned_abs() as i32;
            let amp = constants.amp[i];
            out[i].0 += amp * rho.powi(n);
            out[i].1 += amp * n as f64 * rho.powi(n - 1);
        }
    }
    out
}

// A_n = -I_n/(2n) with I_n = ∫ s^{n+1} F_n; c0 = -½ ∫ s³ F_0
struct Constants {
    c0: Complex64,
    amp: Vec<Complex64>,
}

impl Constants {
    fn new(f: &SourceProfiles) -> Self {
        let [lo, hi] = f.support();
        let r = composite(lo, hi, 2 * PANELS, PANEL_ORDER);
        let order = f.order();
        let mut amp = vec![ZERO; 2 * order + 1];
        let mut c0 = ZERO;
        for (&s, &wt) in r.nodes.iter().zip(&r.weights) {
            let vals = f.eval_all(s);
            for &m in f.active_modes() {
                let i = mode_index(m);
                if m == 0 {
                    c0 += vals[i] * wt * (-0.5 * s.powi(3));
                } else {
                    let n = m.unsigned_abs() as i32;
                    amp[i] += vals[i] * wt * (-s.powi(n + 1) / (2.0 * n as f64));
                }
            }
        }
        Constants { c0, amp }
    }
}

/// Tabulated radial profiles `w_n` with cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct RadialProfiles {
    grid: Vec<f64>,
    // Gauss weights of the interior nodes
    weights: Vec<f64>,
    order: usize,
    active: Vec<i64>,
    // [mode_index][node]
    values: Vec<Vec<Complex64>>,
    derivs: Vec<Vec<Complex64>>,
}

/// Solves the modal Neumann problem on `{0} ∪ {nodes Gauss points} ∪ {1}`.
pub fn solve_w(f: &SourceProfiles, nodes: usize) -> Result<RadialProfiles> {
    ensure(nodes >= 2, || "need at least two radial nodes".into())?;
    let gl = Rule::gauss_legendre(nodes).mapped(0.0, 1.0);
    let mut grid = Vec::with_capacity(nodes + 2);
    grid.push(0.0);
    grid.extend(gl.nodes);
    let weights = gl.weights;
    grid.push(1.0);
    let rows: Vec<Vec<(Complex64, Complex64)>> = grid.par_iter().map(|&rho| profile_at(f, rho)).collect();
    let modes = 2 * f.order() + 1;
    let mut values = vec![vec![ZERO; grid.len()]; modes];
    let mut derivs = vec![vec![ZERO; grid.len()]; modes];
    for (j, row) in rows.iter().enumerate() {
        for (i, &(v, d)) in row.iter().enumerate() {
            if !(v.is_finite() && d.is_finite()) {
                return Err(Error::NonFinite(format!("w profile of mode {} at ρ = {}", index_mode(i), grid[j])));
            }
            values[i][j] = v;
            derivs[i][j] = d;
        }
    }
    // regular at the origin: w_0'(0) = 0 and w_n(0) = 0 for n ≥ 1
    for &m in f.active_modes() {
        let i = mode_index(m);
        derivs[i][0] = if m.abs() == 1 { derivs[i][0] } else { ZERO };
        if m != 0 {
            values[i][0] = ZERO;
        }
    }
    Ok(RadialProfiles { grid, weights, order: f.order(), active: f.active_modes().to_vec(), values, derivs })
}

impl RadialProfiles {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn active_modes(&self) -> &[i64] {
        &self.active
    }

    /// `w_n` at the grid nodes.
    pub fn nodal_values(&self, n: i64) -> &[Complex64] {
        &self.values[mode_index(n)]
    }

    /// `w(0)`; only mode 0 contributes.
    pub fn at_origin(&self) -> Complex64 {
        self.values[0][0]
    }

    /// Boundary trace `w_n(1)`.
    pub fn trace(&self) -> ModalCoefficients {
        let last = self.grid.len() - 1;
        ModalCoefficients::from_generator(self.order, |n| self.values[mode_index(n)][last]).expect("finite profiles")
    }

    fn locate(&self, rho: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::OutOfDomain { r: rho });
        }
        let k = self.grid.partition_point(|&x| x <= rho);
        Ok(k.clamp(1, self.grid.len() - 1) - 1)
    }

    /// `(w_n(ρ), w_n'(ρ))` by cubic Hermite interpolation.
    pub fn eval(&self, n: i64, rho: f64) -> Result<(Complex64, Complex64)> {
        let k = self.locate(rho)?;
        if n.unsigned_abs() as usize > self.order {
            return Ok((ZERO, ZERO));
        }
        Ok(self.hermite(mode_index(n), k, rho))
    }

    fn hermite(&self, i: usize, k: usize, rho: f64) -> (Complex64, Complex64) {
        let (x0, x1) = (self.grid[k], self.grid[k + 1]);
        let h = x1 - x0;
        let t = (rho - x0) / h;
        let (y0, y1) = (self.values[i][k], self.values[i][k + 1]);
        let (d0, d1) = (self.derivs[i][k] * h, self.derivs[i][k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * (t3 - t2);
        let dv = (y0 * (6.0 * t2 - 6.0 * t) + d0 * (3.0 * t2 - 4.0 * t + 1.0) + y1 * (6.0 * t - 6.0 * t2)
            + d1 * (3.0 * t2 - 2.0 * t))
            / h;
        (v, dv)
    }

    /// `w(ρ, θ)` together with `(∂_ρ w, ρ^{-1} ∂_θ w)`.
    pub fn field(&self, rho: f64, theta: f64) -> Result<(Complex64, [Complex64; 2])> {
        let k = self.locate(rho)?;
        let mut v = ZERO;
        let mut dr = ZERO;
        let mut dt = ZERO;
        for &m in &self.active {
            let (w, dw) = self.hermite(mode_index(m), k, rho);
            let e = Complex64::from_polar(1.0, m as f64 * theta);
            v += w * e;
            dr += dw * e;
            if m != 0 {
                // ρ^{-1} ∂_θ: w_n/ρ → w_n'(0) at the origin for |n| = 1
                let over = if rho > 0.0 { w / rho } else { dw };
                dt += Complex64::new(0.0, m as f64) * over * e;
            }
        }
        Ok((v, [dr, dt]))
    }

    /// `∫_{B_1} w = 2π ∫ ρ w_0 dρ` by the Gauss rule underlying the grid.
    pub fn disk_mean(&self) -> Complex64 {
        let w0 = &self.values[0][1..self.grid.len() - 1];
        2.0 * PI
            * self.weights.iter().zip(&self.grid[1..]).zip(w0).map(|((&wt, &r), &v)| v * (wt * r)).sum::<Complex64>()
    }
}
