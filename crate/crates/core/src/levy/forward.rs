use alloc::format;
use alloc::vec::Vec;

use super::{KernelFn, LevyModel};
use crate::diag::{Checked, Warning};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFn};
use crate::quad;
use crate::C64;

/// `v₁(x) = ∫ |f(s)|⁻¹ v₀(x / f(s)) ds`.
pub fn v1(model: &LevyModel, f: &KernelFn, x: f64) -> f64 {
    f.quad()
        .iter()
        .map(|&(v, w)| w / v.abs() * model.v0_unchecked(x / v))
        .sum()
}

/// `uv₁(x) = x·v₁(x) = ∫ sgn(f) uv₀(x / f) ds`, finite at the origin.
pub fn uv1(model: &LevyModel, f: &KernelFn, x: f64) -> f64 {
    f.quad()
        .iter()
        .map(|&(v, w)| w * v.signum() * model.uv0(x / v))
        .sum()
}

pub fn compute_v1(model: &LevyModel, f: &KernelFn, grid: &Grid) -> Result<GridFn> {
    GridFn::from_real_fn(*grid, |x| v1(model, f, x)).map_err(|_| Error::NonFinite("compute_v1"))
}

/// `𝓕₊[uv₁](x) = ∫ f(s) 𝓕₊[uv₀](f(s)x) ds`.
pub fn compute_uv1_ft(model: &LevyModel, f: &KernelFn, grid: &Grid) -> Result<GridFn> {
    GridFn::from_fn(*grid, |x| uv1_ft_at(model, f, x))
        .map_err(|_| Error::NonFinite("compute_uv1_ft"))
}

pub(crate) fn uv1_ft_at(model: &LevyModel, f: &KernelFn, x: f64) -> C64 {
    f.quad()
        .iter()
        .map(|&(v, w)| model.uv0_ft(v * x) * (w * v))
        .sum()
}

/// `ψ(t) = exp(iγt + ∫ ϕ₀(f(s)t) ds)` with `ϕ₀` the Lévy exponent of `v₀`.
/// Equivalent to the defining integral against `v₁` after the substitution
/// `x = f(s)y`, and exact for models with a closed-form exponent.
pub fn psi_via_exponent(
    model: &LevyModel,
    f: &KernelFn,
    gamma: f64,
    grid: &Grid,
) -> Result<GridFn> {
    GridFn::from_fn(*grid, |t| psi_at(model, f, gamma, t))
        .map_err(|_| Error::NonFinite("psi_via_exponent"))
}

pub(crate) fn psi_at(model: &LevyModel, f: &KernelFn, gamma: f64, t: f64) -> C64 {
    let e: C64 = f
        .quad()
        .iter()
        .map(|&(v, w)| model.exponent(v * t) * w)
        .sum();
    (e + C64::new(0.0, gamma * t)).exp()
}

/// Truncation and resolution settings for [`compute_psi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiConfig {
    /// Gamma support is cut at `tail_factor / b`.
    pub tail_factor: f64,
    /// Largest quadrature panel; shrunk further for large `|t|`.
    pub max_panel: f64,
    /// Reject results whose tail bound exceeds this.
    pub tail_tol: f64,
}

impl Default for PsiConfig {
    fn default() -> Self {
        PsiConfig {
            tail_factor: 50.0,
            max_panel: 0.5,
            tail_tol: 1e-8,
        }
    }
}

/// `ψ(t) = exp(iγt + ∫(e^{itx} − 1) v₁(x) dx)` by direct quadrature of the
/// defining integral over the truncated support of `v₁`.
pub fn compute_psi(
    model: &LevyModel,
    f: &KernelFn,
    gamma: f64,
    grid: &Grid,
    cfg: &PsiConfig,
) -> Result<Checked<GridFn>> {
    let (lo0, hi0) = model.support_with(cfg.tail_factor);
    let (flo, fhi) = f.value_range();
    if !flo.is_finite() {
        return Ok(Checked::clean(GridFn::from_fn(*grid, |t| {
            C64::new(0.0, gamma * t).exp()
        })?));
    }
    let corners = [flo * lo0, flo * hi0, fhi * lo0, fhi * hi0];
    let lo1 = corners.iter().fold(0.0f64, |m, c| m.min(*c));
    let hi1 = corners.iter().fold(0.0f64, |m, c| m.max(*c));
    let t_max = grid.points().fold(0.0f64, |m, t| m.max(t.abs()));
    let panel = cfg.max_panel.min(4.0 / t_max.max(1e-300));

    let rule_on = |a: f64, b: f64| {
        if b > a {
            quad::composite(a, b, ((b - a) / panel).ceil().max(1.0) as usize, 16)
        } else {
            quad::Rule {
                nodes: Vec::new(),
                weights: Vec::new(),
            }
        }
    };
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    for r in [rule_on(lo1, 0.0), rule_on(0.0, hi1)] {
        for (x, w) in r.iter() {
            let u = uv1(model, f, x);
            if u != 0.0 {
                nodes.push((x, w * u / x));
            }
        }
    }

    // |e^{itx} − 1| ≤ 2, so the neglected part is at most 2∫|uv₁|/|x| beyond
    // the cut; the next interval of the same length bounds it for tails
    // that decay at least geometrically.
    let mut tail = 0.0;
    for r in [rule_on(2.0 * lo1, lo1), rule_on(hi1, 2.0 * hi1)] {
        tail += 2.0
            * r.iter()
                .map(|(x, w)| w * (uv1(model, f, x) / x).abs())
                .sum::<f64>();
    }
    if !(tail <= cfg.tail_tol) {
        return Err(Error::Precision {
            what: "compute_psi",
            tail_bound: tail,
        });
    }

    let mut values = Vec::with_capacity(grid.len());
    for t in grid.points() {
        let mut acc = C64::new(0.0, gamma * t);
        for &(x, wu) in &nodes {
            let (s, c) = (t * x).sin_cos();
            acc += C64::new(c - 1.0, s) * wu;
        }
        let p = acc.exp();
        if !(p.norm() <= 1.0 + 1e-8) {
            return Err(Error::Postcondition {
                what: "compute_psi",
                detail: format!("|ψ({t})| = {} exceeds 1", p.norm()),
            });
        }
        values.push(p);
    }
    let mut warnings = Vec::new();
    if tail > 0.0 {
        warnings.push(Warning::Truncation { fraction: tail });
    }
    Ok(Checked::new(GridFn::new(*grid, values)?, warnings))
}

/// `θ = ψ·𝓕₊[uv₁]` pointwise.
pub fn compute_theta(psi: &GridFn, uv1_ft: &GridFn) -> Result<GridFn> {
    psi.mul(uv1_ft)
}

/// `μ_f(y) = m_{f,+}(log|y|)` for `y > 0` and `m_{f,−}(log|y|)` for `y < 0`.
pub fn compute_mu_f(f: &KernelFn, y: f64) -> Result<C64> {
    if y == 0.0 || !y.is_finite() {
        return Err(Error::OutOfDomain {
            what: "μ_f",
            value: y,
        });
    }
    let (p, m) = f.m_f(y.abs().ln());
    Ok(if y > 0.0 { p } else { m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::E;

    fn gamma1() -> LevyModel {
        LevyModel::gamma(1.0).unwrap()
    }

    #[test]
    fn cube_transfers_identity() {
        let m = LevyModel::gamma(2.0).unwrap();
        let f = KernelFn::unit_cube(1).unwrap();
        for x in [0.1, 1.0, 3.0] {
            assert!((v1(&m, &f, x) - m.eval_v0(x).unwrap()).abs() < 1e-15);
            assert!((uv1_ft_at(&m, &f, x) - C64::new(2.0, -x).inv()).norm() < 1e-15);
        }
    }

    #[test]
    fn uv1_ft_at_zero_for_exp_window() {
        let f = KernelFn::exp_window(1.0, 1.0).unwrap();
        let v = uv1_ft_at(&gamma1(), &f, 0.0);
        assert!((v.re - (1.0 - 1.0 / E)).abs() < 1e-14 && v.im.abs() < 1e-15);
    }

    #[test]
    fn psi_routes_agree_and_drift_factorizes() {
        let f = KernelFn::exp_window(1.0, 1.0).unwrap();
        let g = Grid::symmetric(20.0, 40).unwrap();
        let a = compute_psi(&gamma1(), &f, 0.0, &g, &PsiConfig::default())
            .unwrap()
            .value;
        let b = psi_via_exponent(&gamma1(), &f, 0.0, &g).unwrap();
        for ((t, x), y) in a.iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-9, "t = {t}: {x} vs {y}");
        }
        let c = psi_via_exponent(&gamma1(), &f, 1.0, &g).unwrap();
        for ((t, x), y) in c.iter().zip(b.values()) {
            assert!((x - C64::new(0.0, t).exp() * y).norm() < 1e-12);
        }
        assert_eq!(b.values()[40], C64::new(1.0, 0.0));
    }

    #[test]
    fn mu_f_branches() {
        let f = KernelFn::exp_window(1.0, 1.0).unwrap();
        assert_eq!(compute_mu_f(&f, E).unwrap(), f.m_f(1.0).0);
        assert_eq!(compute_mu_f(&f, -E).unwrap(), compute_mu_f(&f, E).unwrap());
        assert!(compute_mu_f(&f, 0.0).is_err());
        let c = KernelFn::unit_cube(1).unwrap();
        assert_eq!(compute_mu_f(&c, 2.0).unwrap(), C64::new(1.0, 0.0));
    }
}
