//! Gauss–Legendre rules and tensor-product rules over simple planar regions.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{ensure, Result};

/// Nodes and weights of a one-dimensional quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Gauss–Legendre rule with `n` points on `[-1, 1]`, nodes increasing.
    pub fn gauss_legendre(n: usize) -> Rule {
        let n = NonZeroUsize::new(n).expect("a quadrature rule needs at least one node");
        let mut pairs = GaussLegendre::new(n).into_node_weight_pairs().into_vec();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Rule { nodes, weights }
    }

    /// Affine image of the rule on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Rule {
            nodes: self.nodes.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| half * w).collect(),
        }
    }

    /// Equispaced trapezoid rule on a full period `[0, 2π)`.
    pub fn periodic_trapezoid(n: usize) -> Rule {
        assert!(n >= 1);
        let h = 2.0 * PI / n as f64;
        Rule {
            nodes: (0..n).map(|k| k as f64 * h).collect(),
            weights: vec![h; n],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<T, F>(&self, mut f: F) -> T
    where
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}

/// Composite Gauss–Legendre rule: `panels` equal sub-intervals of `[a, b]`
/// with `order` points each.
pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Rule {
    let base = Rule::gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let r = base.mapped(a + p as f64 * h, a + (p + 1) as f64 * h);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Rule { nodes, weights }
}

/// Planar integration region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// Disk centred at the origin.
    Disk { radius: f64 },
    /// Full annulus centred at the origin.
    Annulus { r_lo: f64, r_hi: f64 },
    /// Polar sector `r_lo ≤ r ≤ r_hi`, `theta_lo ≤ θ ≤ theta_hi`.
    AnnularSector {
        r_lo: f64,
        r_hi: f64,
        theta_lo: f64,
        theta_hi: f64,
    },
    /// Axis-aligned rectangle.
    Rectangle { x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64 },
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Region::Disk { radius } => ensure(radius > 0.0 && radius.is_finite(), || {
                format!("disk radius must be positive, got {radius}")
            }),
            Region::Annulus { r_lo, r_hi } => ensure(0.0 <= r_lo && r_lo < r_hi && r_hi.is_finite(), || {
                format!("annulus needs 0 <= r_lo < r_hi, got [{r_lo}, {r_hi}]")
            }),
            Region::AnnularSector { r_lo, r_hi, theta_lo, theta_hi } => ensure(
                0.0 <= r_lo && r_lo < r_hi && r_hi.is_finite() && theta_lo < theta_hi && theta_hi - theta_lo <= 2.0 * PI,
                || format!("degenerate sector [{r_lo}, {r_hi}] x [{theta_lo}, {theta_hi}]"),
            ),
            Region::Rectangle { x_lo, x_hi, y_lo, y_hi } => ensure(
                x_lo < x_hi && y_lo < y_hi && x_hi.is_finite() && y_hi.is_finite(),
                || format!("degenerate rectangle [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}]"),
            ),
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Region::Disk { radius } => PI * radius * radius,
            Region::Annulus { r_lo, r_hi } => PI * (r_hi * r_hi - r_lo * r_lo),
            Region::AnnularSector { r_lo, r_hi, theta_lo, theta_hi } => {
                0.5 * (theta_hi - theta_lo) * (r_hi * r_hi - r_lo * r_lo)
            }
            Region::Rectangle { x_lo, x_hi, y_lo, y_hi } => (x_hi - x_lo) * (y_hi - y_lo),
        }
    }
}

/// Resolution of a tensor-product rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    /// Gauss points per radial (or Cartesian) panel.
    pub order: usize,
    /// Panels per radial (or Cartesian) direction.
    pub panels: usize,
    /// Equispaced angular nodes for full-circle regions.
    pub angular: usize,
}

impl QuadratureGrid {
    /// Grid resolving every mode up to `n_max`: angular count is a multiple of `4 n_max`.
    pub fn for_modes(n_max: usize) -> Self {
        QuadratureGrid {
            order: 24,
            panels: 4,
            angular: (4 * n_max.max(1)).max(64).next_multiple_of(4 * n_max.max(1)),
        }
    }
}

/// A weighted point set in Cartesian coordinates.
#[derive(Debug, Clone)]
pub struct PointRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl PointRule {
    /// Tensor rule over `region`. Radial directions are split at each entry of
    /// `breaks` so that integrands with a kink on those circles stay
    /// spectrally accurate on each piece.
    pub fn over(region: &Region, grid: &QuadratureGrid, breaks: &[f64]) -> Result<PointRule> {
        region.validate()?;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut polar = |r_lo: f64, r_hi: f64, theta: &Rule| {
            for (a, b) in split(r_lo, r_hi, breaks) {
                let radial = composite(a, b, grid.panels, grid.order);
                for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
                    for (&t, &wt) in theta.nodes.iter().zip(&theta.weights) {
                        points.push([r * t.cos(), r * t.sin()]);
                        weights.push(wr * wt * r);
                    }
                }
            }
        };
        match *region {
            Region::Disk { radius } => polar(0.0, radius, &Rule::periodic_trapezoid(grid.angular)),
            Region::Annulus { r_lo, r_hi } => polar(r_lo, r_hi, &Rule::periodic_trapezoid(grid.angular)),
            Region::AnnularSector { r_lo, r_hi, theta_lo, theta_hi } => {
                let theta = composite(theta_lo, theta_hi, grid.panels, grid.order);
                polar(r_lo, r_hi, &theta)
            }
            Region::Rectangle { x_lo, x_hi, y_lo, y_hi } => {
                let xs = composite(x_lo, x_hi, grid.panels, grid.order);
                let ys = composite(y_lo, y_hi, grid.panels, grid.order);
                for (&x, &wx) in xs.nodes.iter().zip(&xs.weights) {
                    for (&y, &wy) in ys.nodes.iter().zip(&ys.weights) {
                        points.push([x, y]);
                        weights.push(wx * wy);
                    }
                }
            }
        }
        Ok(PointRule { points, weights })
    }
}

fn split(lo: f64, hi: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
    cuts.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut a = lo;
    for c in cuts {
        out.push((a, c));
        a = c;
    }
    out.push((a, hi));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=40 {
            let rule = Rule::gauss_legendre(n);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n = {n}");
            // degree 2n - 1 is exact
            let deg = 2 * n - 1;
            let got = rule.integrate(|x| x.powi(deg as i32 - 1));
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((got - exact).abs() < 1e-13, "n = {n}: {got} vs {exact}");
        }
    }

    #[test]
    fn mapped_rule_and_composite() {
        let r = Rule::gauss_legendre(8).mapped(1.0, 3.0);
        assert!((r.integrate(|x| x * x) - 26.0 / 3.0).abs() < 1e-13);
        let c = composite(0.0, 1.0, 5, 6);
        assert_eq!(c.len(), 30);
        assert!((c.integrate(f64::exp) - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn point_rule_recovers_areas() {
        let grid = QuadratureGrid { order: 12, panels: 2, angular: 64 };
        let regions = [
            Region::Disk { radius: 0.5 },
            Region::Annulus { r_lo: 1.0, r_hi: 3.0 },
            Region::AnnularSector { r_lo: 1.2, r_hi: 1.8, theta_lo: 0.0, theta_hi: PI / 4.0 },
            Region::Rectangle { x_lo: 5.0, x_hi: 6.0, y_lo: 0.0, y_hi: 1.0 },
        ];
        for reg in regions {
            let rule = PointRule::over(&reg, &grid, &[1.0]).unwrap();
            let area: f64 = rule.weights.iter().sum();
            assert!((area - reg.area()).abs() < 1e-12 * reg.area(), "{reg:?}");
        }
    }

    #[test]
    fn degenerate_regions_are_rejected() {
        assert!(Region::Disk { radius: 0.0 }.validate().is_err());
        assert!(Region::Annulus { r_lo: 2.0, r_hi: 1.0 }.validate().is_err());
        assert!(Region::Rectangle { x_lo: 0.0, x_hi: 0.0, y_lo: 0.0, y_hi: 1.0 }.validate().is_err());
    }
}
