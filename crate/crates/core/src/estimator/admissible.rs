use alloc::format;
use alloc::vec::Vec;

use super::test_fn::TestFunction;
use crate::error::Result;
use crate::fft::Sign;
use crate::grid::{Grid, GridFn, LogGridFn};
use crate::levy::{ls_slope, AssumptionItem, KernelFn, Verdict};
use crate::xform::{
    apply_g_inv_adjoint_n_log, fourier_plus_padded, isometry_m_log, lattice_transform,
};
use crate::C64;

/// Numerical settings for [`check_admissible`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleConfig {
    pub log_grid: Grid,
    /// Cutoff used when `v` has no closed-form preimage.
    pub a_n: f64,
    /// `𝒢⁻¹*v` is sampled on `[−x_max, x_max]` at step `dx` before transforming.
    pub x_max: f64,
    pub dx: f64,
    pub t_max: f64,
}

impl Default for AdmissibleConfig {
    fn default() -> Self {
        AdmissibleConfig {
            log_grid: LogGridFn::default_grid(),
            a_n: 1e-6,
            x_max: 64.0,
            dx: 1.0 / 1024.0,
            t_max: 256.0,
        }
    }
}

/// Items (i)–(iii) of admissibility, plus the fitted decay exponent of
/// `|𝓕₊[𝒢⁻¹*v]|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub items: [AssumptionItem; 3],
    pub fitted_exponent: Option<f64>,
}

impl AdmissibilityReport {
    pub fn all_hold(&self) -> bool {
        self.items.iter().all(|i| i.verdict == Verdict::Holds)
    }
}

/// `S(T) = ∫_{|t| ≤ T} (1 + t²)^r |F(t)|² dt` at `T = t_max/4, t_max/2, t_max`
/// on a symmetric grid, judged by whether the dyadic increments shrink.
fn sobolev_trend(grid: &Grid, vals: &[C64], r: f64, t_max: f64) -> AssumptionItem {
    let peak = vals.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if r.is_infinite() || peak == 0.0 {
        // every order: require numerically vanishing mass beyond T/4
        let tail = grid
            .points()
            .zip(vals)
            .filter(|(t, _)| t.abs() > t_max / 4.0)
            .fold(0.0f64, |a, (_, z)| a.max(z.norm()));
        let ok = tail <= 1e-10 * peak;
        return AssumptionItem {
            verdict: if ok {
                Verdict::Holds
            } else {
                Verdict::Inconclusive
            },
            margin: if peak > 0.0 { 1.0 - tail / peak } else { 1.0 },
            detail: format!(
                "sup beyond T/4 relative to peak: {:.3e}",
                if peak > 0.0 { tail / peak } else { 0.0 }
            ),
        };
    }
    let s = |cap: f64| -> f64 {
        grid.points()
            .zip(vals)
            .filter(|(t, _)| t.abs() <= cap)
            .map(|(t, v)| (1.0 + t * t).powf(r) * v.norm_sqr())
            .sum::<f64>()
            * grid.step()
    };
    let (s1, s2, s3) = (s(t_max / 4.0), s(t_max / 2.0), s(t_max));
    let (d1, d2) = (s2 - s1, s3 - s2);
    let detail = format!("S = {s1:.6e}, {s2:.6e}, {s3:.6e} at T/4, T/2, T (T = {t_max})");
    let verdict = if s3 == 0.0 || d2 <= 1e-6 * s3 || (d1 > 0.0 && d2 / d1 < 0.95) {
        Verdict::Holds
    } else if d1 > 0.0 && d2 / d1 >= 1.0 {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    let margin = if d1 > 0.0 { 1.0 - d2 / d1 } else { 1.0 };
    AssumptionItem {
        verdict,
        margin,
        detail,
    }
}

/// Report-only numerical check of admissibility of index `(v.xi, v.beta2)`
/// for a model with constants `(ε, τ)` and `(U_β)` exponent `beta1`.
pub fn check_admissible(
    v: &TestFunction,
    f: &KernelFn,
    eps: f64,
    tau: f64,
    beta1: f64,
    cfg: &AdmissibleConfig,
) -> Result<AdmissibilityReport> {
    let lg = cfg.log_grid;
    let preimage = if v.has_inverse_adjoint() {
        LogGridFn::sample_real(lg, |x| v.inverse_adjoint(x).unwrap_or(0.0))?
    } else {
        let vl = LogGridFn::sample_real(lg, |x| v.eval(x))?;
        apply_g_inv_adjoint_n_log(&vl, f, cfg.a_n)?.value
    };
    let xg = Grid::symmetric(cfg.x_max, (cfg.x_max / cfg.dx).round() as usize)?;
    let sampled = GridFn::from_fn(xg, |x| {
        if x == 0.0 {
            v.inverse_adjoint(0.0)
                .map_or(C64::new(0.0, 0.0), |h| C64::new(h, 0.0))
        } else {
            preimage.interp(x).unwrap_or(C64::new(0.0, 0.0))
        }
    })?;
    let full = fourier_plus_padded(&sampled, (2 * xg.len()).next_power_of_two())?.value;
    let keep: Vec<usize> = (0..full.n_pts())
        .filter(|&i| full.grid().point(i).abs() <= cfg.t_max)
        .collect();
    let half = keep.len() / 2;
    let tg = Grid::symmetric(half as f64 * full.step(), half)?;
    let w: Vec<C64> = keep[keep.len() - (2 * half + 1)..]
        .iter()
        .map(|&i| full.values()[i])
        .collect();

    // (i)
    let item1 = sobolev_trend(&tg, &w, 1.5 - eps, tg.hi());

    // (ii): the branches s ↦ (𝓜v)(±e^s)
    let mv = isometry_m_log(&LogGridFn::sample_real(lg, |x| v.eval(x))?);
    let m = lg.len().next_power_of_two();
    let mut worst: Option<AssumptionItem> = None;
    for branch in [mv.pos(), mv.neg()] {
        let (sg, spectrum) = lattice_transform(branch, lg.lo(), lg.step(), m, Sign::Minus)?;
        let item = sobolev_trend(&sg, &spectrum, v.beta2, sg.hi() / 2.0);
        let rank = |i: &AssumptionItem| match i.verdict {
            Verdict::Fails => 0,
            Verdict::Inconclusive => 1,
            Verdict::Holds => 2,
        };
        if worst.as_ref().is_none_or(|w| rank(&item) < rank(w)) {
            worst = Some(item);
        }
    }
    let mut item2 = worst.expect("two branches were checked");
    if v.beta2 <= beta1 {
        item2.verdict = Verdict::Fails;
        item2.detail = format!(
            "declared β₂ = {} does not exceed β₁ = {beta1}; {}",
            v.beta2, item2.detail
        );
    }

    // (iii): |W(t)|(1 + t²)^{ξ/2} bounded, judged on [1, T/2] against [T/2, T]
    let max_w = w.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let outer: Vec<(f64, f64)> = tg
        .points()
        .zip(&w)
        .filter(|(t, z)| *t >= tg.hi() / 10.0 && z.norm() > 0.0)
        .map(|(t, z)| (t.ln(), z.norm().ln()))
        .collect();
    let fitted = ls_slope(&outer);
    let lower = TestFunction::xi_lower_bound(eps, tau);
    let item3 = if max_w == 0.0 {
        AssumptionItem {
            verdict: Verdict::Holds,
            margin: f64::INFINITY,
            detail: "𝓕₊[𝒢⁻¹*v] ≡ 0".into(),
        }
    } else if !(v.xi > lower) {
        AssumptionItem {
            verdict: Verdict::Fails,
            margin: v.xi - lower,
            detail: format!("declared ξ = {} is below the bound {lower:.4}", v.xi),
        }
    } else {
        let tail_max = tg
            .points()
            .zip(&w)
            .filter(|(t, _)| *t >= tg.hi() / 2.0)
            .fold(0.0f64, |a, (_, z)| a.max(z.norm()));
        if tail_max <= 1e-10 * max_w {
            AssumptionItem {
                verdict: Verdict::Holds,
                margin: f64::INFINITY,
                detail: format!(
                    "|𝓕₊[𝒢⁻¹*v]| below 1e-10 of its maximum beyond t = {}",
                    tg.hi() / 2.0
                ),
            }
        } else if v.xi.is_infinite() {
            AssumptionItem {
                verdict: Verdict::Fails,
                margin: fitted.unwrap_or(0.0),
                detail: format!("declared super-polynomial decay, fitted exponent {fitted:?}"),
            }
        } else {
            // slope of log|W| against log t on the outer decade, compared with −ξ
            let slope = fitted.unwrap_or(0.0);
            let margin = -slope - v.xi;
            let verdict = if margin >= -0.1 {
                Verdict::Holds
            } else if margin < -0.25 {
                Verdict::Fails
            } else {
                Verdict::Inconclusive
            };
            AssumptionItem {
                verdict,
                margin,
                detail: format!("fitted decay exponent {slope:.3} against −ξ = {:.3}", -v.xi),
            }
        }
    };
    Ok(AdmissibilityReport {
        items: [item1, item2, item3],
        fitted_exponent: fitted,
    })
}
