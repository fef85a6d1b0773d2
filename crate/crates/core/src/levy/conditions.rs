use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::forward::{psi_at, uv1_ft_at};
use super::{KernelFn, LevyKind, LevyModel};
use crate::error::Result;
use crate::grid::Grid;
use crate::quad;

/// Result of the `(U_β)` lower-bound check on a finite grid.
#[derive(Debug, Clone, PartialEq)]
pub struct UBetaReport {
    pub holds: bool,
    /// `min_x |m_{f,±}(x)|·(1 + |x|^β)` over the grid.
    pub worst_margin: f64,
    pub worst_x: f64,
    /// Log-log slope of binned minima of the margin over the outer decades.
    pub tail_slope: f64,
}

/// Checks `|m_{f,±}(x)| ≳ (1 + |x|^β)⁻¹` on `grid`.
///
/// A positive minimum alone cannot distinguish a bound from slow decay on a
/// finite range, so the check also requires the minima over logarithmic bins
/// of `|x|` not to trend downward (slope ≥ −0.1).
pub fn check_u_beta(f: &KernelFn, beta: f64, grid: &Grid, floor: f64) -> UBetaReport {
    let x_top = grid.points().fold(0.0f64, |m, x| m.max(x.abs()));
    let x_bot = (x_top / 100.0).max(1.0);
    const BINS: usize = 10;
    let mut bin_min = [f64::INFINITY; BINS];
    let (mut worst, mut worst_x) = (f64::INFINITY, 0.0);
    for x in grid.points() {
        let (p, m) = f.m_f(x);
        let c = p.norm().min(m.norm()) * (1.0 + x.abs().powf(beta));
        if c < worst {
            worst = c;
            worst_x = x;
        }
        let ax = x.abs();
        if ax >= x_bot && x_top > x_bot {
            let k = ((ax / x_bot).ln() / (x_top / x_bot).ln() * BINS as f64) as usize;
            let k = k.min(BINS - 1);
            bin_min[k] = bin_min[k].min(c);
        }
    }
    let pts: Vec<(f64, f64)> = bin_min
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_finite() && **c > 0.0)
        .map(|(k, c)| {
            let centre = x_bot * (x_top / x_bot).powf((k as f64 + 0.5) / BINS as f64);
            (centre.ln(), c.ln())
        })
        .collect();
    let tail_slope = ls_slope(&pts).unwrap_or(0.0);
    UBetaReport {
        holds: worst > floor && tail_slope >= -0.1,
        worst_margin: worst,
        worst_x,
        tail_slope,
    }
}

pub(crate) fn ls_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx > 0.0 {
        Some(sxy / sxx)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionItem {
    pub verdict: Verdict,
    pub margin: f64,
    pub detail: String,
}

/// Items (1)–(5) of the standing assumptions, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub items: [AssumptionItem; 5],
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.items.iter().all(|i| i.verdict == Verdict::Holds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionConfig {
    /// Frequency range `[−x_max, x_max]` for items (4) and (5).
    pub x_max: f64,
    pub n_x: usize,
}

impl Default for AssumptionConfig {
    fn default() -> Self {
        AssumptionConfig {
            x_max: 1e3,
            n_x: 20_001,
        }
    }
}

pub fn check_assumptions(
    model: &LevyModel,
    f: &KernelFn,
    eps: f64,
    tau: f64,
    cfg: &AssumptionConfig,
) -> Result<AssumptionReport> {
    let item = |verdict, margin, detail: String| AssumptionItem {
        verdict,
        margin,
        detail,
    };

    // (1) compact support is structural; integrability of |f|^{2+τ}.
    let lp = f.lp_integral(2.0 + tau);
    let half = f.lp_integral(0.5);
    let i1 = item(
        if lp.is_finite() && half.is_finite() {
            Verdict::Holds
        } else {
            Verdict::Fails
        },
        lp,
        format!(
            "∫|f|^(2+τ) = {lp:.6e}, ∫|f|^(1/2) = {half:.6e}, diam = {}",
            f.diam()
        ),
    );

    // (2) uv₀ bounded and in L¹ ∩ L².
    let (lo, hi) = model.support();
    let rule = quad::composite(lo, hi, 2000, 8);
    let sup = rule
        .nodes
        .iter()
        .fold(0.0f64, |m, x| m.max(model.uv0(*x).abs()));
    let l1 = rule.integrate(|x| model.uv0(x).abs());
    let l2 = rule.integrate(|x| model.uv0(x).powi(2)).sqrt();
    let ok2 = sup.is_finite() && l1.is_finite() && l2.is_finite();
    let i2 = item(
        if ok2 { Verdict::Holds } else { Verdict::Fails },
        sup,
        format!("sup|uv₀| = {sup:.6e}, ‖uv₀‖₁ = {l1:.6e}, ‖uv₀‖₂ = {l2:.6e}"),
    );

    // (3) ∫|x|^{1+τ}|uv₀| < ∞.
    let mom = model.abs_moment_uv0(1.0 + tau);
    let i3 = item(
        if mom.is_finite() {
            Verdict::Holds
        } else {
            Verdict::Fails
        },
        mom,
        format!("∫|x|^(1+τ)|uv₀| = {mom:.6e}"),
    );

    // (4) |𝓕₊[uv₁](x)|·(1 + x²)^{1/2} bounded: compare the outer two decades.
    let grid = Grid::symmetric(cfg.x_max, cfg.n_x / 2)?;
    let (mut sup4, mut outer, mut inner) = (0.0f64, 0.0f64, 0.0f64);
    for x in grid.points() {
        let c = uv1_ft_at(model, f, x).norm() * (1.0 + x * x).sqrt();
        sup4 = sup4.max(c);
        if x.abs() >= cfg.x_max / 10.0 {
            outer = outer.max(c);
        } else if x.abs() >= cfg.x_max / 100.0 {
            inner = inner.max(c);
        }
    }
    let v4 = if outer <= 1.5 * inner {
        Verdict::Holds
    } else if outer > 3.0 * inner {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    let i4 = item(
        v4,
        sup4,
        format!(
            "sup (1+x²)^(1/2)|𝓕₊[uv₁]| = {sup4:.6e}; outer/inner decade = {:.4}",
            outer / inner
        ),
    );

    let i5 = item5(model, f, eps, cfg);
    Ok(AssumptionReport {
        items: [i1, i2, i3, i4, i5],
    })
}

fn item5(model: &LevyModel, f: &KernelFn, eps: f64, cfg: &AssumptionConfig) -> AssumptionItem {
    let x1 = cfg.x_max;
    let panels = (cfg.n_x / 8).max(16);
    // Equivalent general form: (1 + x²)^{−1/2+ε}/ψ ∈ L².
    let general = |x_max: f64| {
        quad::composite(-x_max, x_max, panels, 8).integrate(|x| {
            (1.0 + x * x).powf(-1.0 + 2.0 * eps) / psi_at(model, f, 0.0, x).norm_sqr()
        })
    };
    let (g1, g2) = (general(x1), general(2.0 * x1));
    match model.kind() {
        LevyKind::Gamma { b } => {
            let alpha: f64 = f.quad().iter().map(|(v, w)| w * (v * v / b).max(1.0)).sum();
            let gamma_form = |x_max: f64| {
                quad::composite(-x_max, x_max, panels, 8).integrate(|x| {
                    let e: f64 = f
                        .quad()
                        .iter()
                        .map(|(v, w)| w * (1.0 + x * x * v * v / b).ln())
                        .sum();
                    (1.0 + x * x).powf(-1.0 + eps) * e.exp()
                })
            };
            let (q1, q2) = (gamma_form(x1), gamma_form(2.0 * x1));
            let detail = format!(
                "α = {alpha:.6}; Gamma-form integral over |x| ≤ {x1}: {q1:.6e}, ≤ {}: {q2:.6e}; \
                 general form: {g1:.6e}, {g2:.6e}",
                2.0 * x1
            );
            if alpha < 0.5 && eps > 0.0 && eps < 0.5 - alpha {
                AssumptionItem {
                    verdict: Verdict::Holds,
                    margin: 0.5 - alpha - eps,
                    detail,
                }
            } else {
                AssumptionItem {
                    verdict: Verdict::Inconclusive,
                    margin: q1,
                    detail,
                }
            }
        }
        LevyKind::Tabulated { .. } => {
            let detail = format!(
                "general-form integral over |x| ≤ {x1}: {g1:.6e}, ≤ {}: {g2:.6e}",
                2.0 * x1
            );
            let verdict = if eps > 0.0 && (g2 - g1) <= 1e-3 * g1 {
                Verdict::Holds
            } else {
                Verdict::Inconclusive
            };
            AssumptionItem {
                verdict,
                margin: g1,
                detail,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wide() -> Grid {
        Grid::symmetric(1e3, 100_000).unwrap()
    }

    #[test]
    fn u_beta_on_exp_window_and_cube() {
        let f = KernelFn::exp_window(1.0, 1.0).unwrap();
        let r1 = check_u_beta(&f, 1.0, &wide(), 1e-6);
        assert!(r1.holds, "{r1:?}");
        let r0 = check_u_beta(&f, 0.0, &wide(), 1e-6);
        assert!(!r0.holds, "{r0:?}");
        assert!(r0.tail_slope < -0.8);
        let c = KernelFn::unit_cube(1).unwrap();
        let rc = check_u_beta(&c, 0.0, &wide(), 1e-6);
        assert!(rc.holds && (rc.worst_margin - 2.0).abs() < 1e-15);
    }

    #[test]
    fn assumption_five_sufficient_criterion() {
        let f = KernelFn::exp_window(1.0, 0.25).unwrap();
        let m = LevyModel::gamma(4.0).unwrap();
        let r = check_assumptions(
            &m,
            &f,
            0.2,
            1.0,
            &AssumptionConfig {
                x_max: 100.0,
                n_x: 2001,
            },
        )
        .unwrap();
        assert_eq!(r.items[4].verdict, Verdict::Holds);
        assert!((r.items[4].margin - (0.25 - 0.2)).abs() < 1e-9);
        assert!(
            r.items[..4].iter().all(|i| i.verdict == Verdict::Holds),
            "{r:?}"
        );
    }

    #[test]
    fn assumption_five_falls_back_when_alpha_large() {
        let f = KernelFn::exp_window(1.0, 1.0).unwrap();
        let m = LevyModel::gamma(1.0).unwrap();
        let r = check_assumptions(
            &m,
            &f,
            0.1,
            1.0,
            &AssumptionConfig {
                x_max: 100.0,
                n_x: 2001,
            },
        )
        .unwrap();
        assert_eq!(r.items[4].verdict, Verdict::Inconclusive);
        assert!(r.items[4].detail.contains("α = 1.0"));
        assert!(r.items[4].margin.is_finite() && r.items[4].margin > 0.0);
    }
}
