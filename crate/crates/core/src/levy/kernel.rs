use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quad;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// `f(s) = e^{−λs}` on `(0, θ)`, `d = 1`.
    ExpWindow { lambda: f64, theta: f64 },
    /// Indicator of `[0, side₁) × … × [0, side_d)`.
    IndicatorCube { sides: Vec<f64> },
    /// Values on a grid, linearly interpolated, zero outside; `d = 1`.
    Tabulated { grid: Grid, values: Vec<f64> },
}

/// A compactly supported kernel together with a quadrature rule over its
/// support.
///
/// Every integral the forward maps need has the form `∫ φ(f(s)) ds`, so the
/// rule is stored as pairs `(f(sᵢ), wᵢ)` with `f(sᵢ) ≠ 0`. For the indicator
/// kernel this collapses to the single exact pair `(1, volume)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFn {
    kind: KernelKind,
    quad: Vec<(f64, f64)>,
}

pub(crate) const DEFAULT_NODES: usize = 512;

impl KernelFn {
    pub fn exp_window(lambda: f64, theta: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0 && theta.is_finite() && theta > 0.0) {
            return Err(Error::config("exp window needs λ > 0 and θ > 0"));
        }
        Self::build(KernelKind::ExpWindow { lambda, theta }, DEFAULT_NODES)
    }

    pub fn indicator_cube(sides: Vec<f64>) -> Result<Self> {
        if sides.is_empty() || sides.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::config("indicator cube needs positive side lengths"));
        }
        Self::build(KernelKind::IndicatorCube { sides }, DEFAULT_NODES)
    }

    /// Unit cube `[0, 1)^d`.
    pub fn unit_cube(dim: usize) -> Result<Self> {
        Self::indicator_cube(alloc::vec![1.0; dim])
    }

    pub fn tabulated(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(
                "tabulated kernel length differs from its grid",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tabulated kernel"));
        }
        Self::build(KernelKind::Tabulated { grid, values }, DEFAULT_NODES)
    }

    /// Same kernel with a different number of quadrature nodes (ignored by
    /// the indicator, whose rule is exact).
    pub fn with_nodes(&self, nodes: usize) -> Result<Self> {
        Self::build(self.kind.clone(), nodes)
    }

    fn build(kind: KernelKind, nodes: usize) -> Result<Self> {
        let order = 16;
        let panels = nodes.div_ceil(order).max(1);
        let quad = match &kind {
            KernelKind::ExpWindow { lambda, theta } => quad::composite(0.0, *theta, panels, order)
                .iter()
                .map(|(s, w)| ((-lambda * s).exp(), w))
                .collect(),
            KernelKind::IndicatorCube { sides } => alloc::vec![(1.0, sides.iter().product())],
            KernelKind::Tabulated { grid, .. } => {
                let cells = grid.len() - 1;
                let per_cell = (nodes / cells).clamp(4, order);
                let rule = quad::composite(grid.lo(), grid.hi(), cells, per_cell);
                let mut q = Vec::with_capacity(rule.len());
                for (s, w) in rule.iter() {
                    let v = tab_eval(grid, Self::tab_values(&kind), s);
                    if v != 0.0 {
                        q.push((v, w));
                    }
                }
                q
            }
        };
        let k = KernelFn { kind, quad };
        let l2: f64 = k.quad.iter().map(|(v, w)| w * v * v).sum();
        if !l2.is_finite() {
            return Err(Error::NonFinite("∫f²"));
        }
        Ok(k)
    }

    fn tab_values(kind: &KernelKind) -> &[f64] {
        match kind {
            KernelKind::Tabulated { values, .. } => values,
            _ => &[],
        }
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            KernelKind::IndicatorCube { sides } => sides.len(),
            _ => 1,
        }
    }

    /// Sup-norm diameter of the declared support.
    pub fn diam(&self) -> f64 {
        match &self.kind {
            KernelKind::ExpWindow { theta, .. } => *theta,
            KernelKind::IndicatorCube { sides } => sides.iter().fold(0.0, |m, s| m.max(*s)),
            KernelKind::Tabulated { grid, .. } => grid.hi() - grid.lo(),
        }
    }

    /// Bounding box of the support, one `(lo, hi)` per axis.
    pub fn support_box(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            KernelKind::ExpWindow { theta, .. } => alloc::vec![(0.0, *theta)],
            KernelKind::IndicatorCube { sides } => sides.iter().map(|s| (0.0, *s)).collect(),
            KernelKind::Tabulated { grid, .. } => alloc::vec![(grid.lo(), grid.hi())],
        }
    }

    pub fn eval(&self, s: &[f64]) -> f64 {
        match &self.kind {
            KernelKind::ExpWindow { lambda, theta } => {
                let s = s[0];
                if s > 0.0 && s < *theta {
                    (-lambda * s).exp()
                } else {
                    0.0
                }
            }
            KernelKind::IndicatorCube { sides } => {
                let inside = s.iter().zip(sides).all(|(x, l)| *x >= 0.0 && x < l);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::Tabulated { grid, values } => tab_eval(grid, values, s[0]),
        }
    }

    /// Weight of the lattice cell `[lo, lo + h)^d` in the discretized moving
    /// average: exact coverage fraction for the indicator, midpoint value
    /// otherwise.
    pub fn cell_weight(&self, lo: &[f64], h: f64) -> f64 {
        match &self.kind {
            KernelKind::IndicatorCube { sides } => lo
                .iter()
                .zip(sides)
                .map(|(a, l)| ((a + h).min(*l) - a.max(0.0)).max(0.0) / h)
                .product(),
            _ => {
                let mid: Vec<f64> = lo.iter().map(|a| a + 0.5 * h).collect();
                self.eval(&mid)
            }
        }
    }

    /// Pairs `(f(sᵢ), wᵢ)` of the pushed-forward quadrature rule.
    pub fn quad(&self) -> &[(f64, f64)] {
        &self.quad
    }

    /// `(min f, max f)` over the quadrature nodes.
    pub fn value_range(&self) -> (f64, f64) {
        self.quad
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (v, _)| {
                (lo.min(*v), hi.max(*v))
            })
    }

    /// `∫|f|^p ds` over the support.
    pub fn lp_integral(&self, p: f64) -> f64 {
        self.quad.iter().map(|(v, w)| w * v.abs().powf(p)).sum()
    }

    /// `(m_{f,+}(x), m_{f,−}(x))`, in closed form where available.
    pub fn m_f(&self, x: f64) -> (C64, C64) {
        match &self.kind {
            KernelKind::ExpWindow { lambda, theta } => {
                let z = C64::new(0.5, -x) * *lambda;
                let m = if z.norm() < 1e-12 {
                    C64::new(*theta, 0.0)
                } else {
                    (1.0 - (-z * *theta).exp()) / z
                };
                (m, m)
            }
            KernelKind::IndicatorCube { sides } => {
                let v = C64::new(sides.iter().product(), 0.0);
                (v, v)
            }
            KernelKind::Tabulated { .. } => self.m_f_quadrature(x),
        }
    }

    /// `m_{f,±}` by quadrature over the support.
    pub fn m_f_quadrature(&self, x: f64) -> (C64, C64) {
        let (mut plus, mut minus) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for &(v, w) in &self.quad {
            let a = v.abs();
            let term = C64::from_polar(w * a.sqrt(), -x * a.ln());
            minus += term;
            plus += if v > 0.0 { term } else { -term };
        }
        (plus, minus)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.quad.iter().all(|(v, _)| *v >= 0.0)
    }
}

fn tab_eval(grid: &Grid, values: &[f64], s: f64) -> f64 {
    if !(s >= grid.lo() && s <= grid.hi()) {
        return 0.0;
    }
    let u = ((s - grid.lo()) / grid.step()).clamp(0.0, (grid.len() - 1) as f64);
    let i = (u.floor() as usize).min(grid.len() - 2);
    let r = u - i as f64;
    values[i] * (1.0 - r) + values[i + 1] * r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_window_shape() {
        let f = KernelFn::exp_window(1.0, 1.0).unwrap();
        assert_eq!(f.dim(), 1);
        assert_eq!(f.diam(), 1.0);
        assert_eq!(f.eval(&[0.0]), 0.0);
        assert!((f.eval(&[0.5]) - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(f.eval(&[1.0]), 0.0);
        assert_eq!(f.quad().len(), 512);
        assert!((f.lp_integral(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn m_f_closed_form_matches_quadrature() {
        let f = KernelFn::exp_window(1.3, 0.8).unwrap();
        for x in [-30.0, -1.0, 0.0, 0.25, 7.0] {
            let (a, b) = f.m_f(x);
            let (qa, qb) = f.m_f_quadrature(x);
            assert!(
                (a - qa).norm() < 1e-10 && (b - qb).norm() < 1e-10,
                "x = {x}"
            );
            assert_eq!(a, b);
        }
    }

    #[test]
    fn cube_symbol_and_coverage() {
        let f = KernelFn::unit_cube(1).unwrap();
        assert_eq!(f.m_f(3.0), (C64::new(1.0, 0.0), C64::new(1.0, 0.0)));
        assert_eq!(f.cell_weight(&[0.75], 0.5), 0.5);
        assert_eq!(f.cell_weight(&[-0.5], 0.5), 0.0);
        let g = KernelFn::indicator_cube(alloc::vec![1.0, 2.0]).unwrap();
        assert_eq!(g.diam(), 2.0);
        assert_eq!(g.cell_weight(&[0.5, 1.75], 0.5), 0.5);
    }

    #[test]
    fn signed_tabulated_kernel_splits_branches() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let f = KernelFn::tabulated(g, alloc::vec![1.0, -1.0, 1.0]).unwrap();
        let (p, m) = f.m_f(0.3);
        assert!((p - m).norm() > 1e-3);
        assert!(!f.is_nonnegative());
    }
}
