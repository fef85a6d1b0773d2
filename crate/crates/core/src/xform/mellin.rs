use alloc::vec::Vec;
use core::f64::consts::PI;

use super::fourier::{decay_warning, lattice_transform};
use crate::diag::{Checked, Warning};
use crate::error::{Error, Result};
use crate::fft::Sign;
use crate::grid::{Grid, GridFn, LogGridFn};
use crate::C64;

/// Resamples `v` at `x = ±e^s`, `s` on `log_grid`; points outside the range
/// of `v` are set to zero. The warning reports the fraction of `‖v‖²` lying
/// at `|x|` outside `[e^{s_lo}, e^{s_hi}]`.
pub fn to_log_grid(v: &GridFn, log_grid: &Grid) -> Checked<LogGridFn> {
    let at = |x: f64| v.interp_cubic(x).unwrap_or(C64::new(0.0, 0.0));
    let pos = log_grid.points().map(|s| at(s.exp())).collect();
    let neg = log_grid.points().map(|s| at(-s.exp())).collect();
    let w = LogGridFn::new(*log_grid, pos, neg).expect("interpolated values are finite");
    let (a, b) = (log_grid.lo().exp(), log_grid.hi().exp());
    let (mut out, mut total) = (0.0, 0.0);
    for (x, y) in v.iter() {
        let m = y.norm_sqr();
        total += m;
        if x.abs() < a || x.abs() > b {
            out += m;
        }
    }
    let mut warnings = Vec::new();
    if total > 0.0 && out > 0.0 {
        warnings.push(Warning::Truncation {
            fraction: out / total,
        });
    }
    Checked::new(w, warnings)
}

/// Resamples a log-grid function onto a uniform grid; the origin and points
/// beyond the log range map to zero. The warning reports the fraction of
/// `∫|w|² dx` at `|x|` beyond the uniform grid.
pub fn from_log_grid(w: &LogGridFn, grid: &Grid) -> Checked<GridFn> {
    let v = GridFn::from_fn(*grid, |x| w.interp(x).unwrap_or(C64::new(0.0, 0.0)))
        .expect("interpolated values are finite");
    let (mut out, mut total) = (0.0, 0.0);
    for (i, s) in w.grid().points().enumerate() {
        let x = s.exp();
        for (val, sign) in [(w.pos()[i], 1.0), (w.neg()[i], -1.0)] {
            let m = val.norm_sqr() * x;
            total += m;
            if !grid.contains(sign * x) {
                out += m;
            }
        }
    }
    let mut warnings = Vec::new();
    if total > 0.0 && out > 1e-12 * total {
        warnings.push(Warning::Truncation {
            fraction: out / total,
        });
    }
    Checked::new(v, warnings)
}

/// `(𝓜v)(x) = |x|^{1/2} v(x)`.
pub fn isometry_m(v: &GridFn) -> GridFn {
    v.map(|x, y| y * x.abs().sqrt())
        .expect("finite input stays finite")
}

/// `|x|^{−1/2} v(x)`; a grid point at the origin must carry a zero value.
pub fn isometry_m_inv(v: &GridFn) -> Result<GridFn> {
    for (x, y) in v.iter() {
        if x == 0.0 && y != C64::new(0.0, 0.0) {
            return Err(Error::OutOfDomain {
                what: "𝓜⁻¹",
                value: 0.0,
            });
        }
    }
    v.map(|x, y| if x == 0.0 { y } else { y / x.abs().sqrt() })
}

pub fn isometry_m_log(w: &LogGridFn) -> LogGridFn {
    w.map_branches(|s, _, v| v * (0.5 * s).exp())
}

pub fn isometry_m_log_inv(w: &LogGridFn) -> LogGridFn {
    w.map_branches(|s, _, v| v * (-0.5 * s).exp())
}

fn require_pow2(g: &Grid) -> Result<()> {
    if g.len().is_power_of_two() {
        Ok(())
    } else {
        Err(Error::Shape(
            "log-grid transforms need a power-of-two grid length",
        ))
    }
}

/// `𝓕_×` in log coordinates: with `p`, `q` the branches at `x = ±e^s`,
/// `pos(τ) = ∫(p + q)(s) e^{−isτ} ds` and `neg(τ) = ∫(p − q)(s) e^{−isτ} ds`,
/// the output `τ = log|y|` lying on the conjugate centered grid.
pub fn mellin_fx(w: &LogGridFn) -> Result<Checked<LogGridFn>> {
    let g = *w.grid();
    require_pow2(&g)?;
    let sum: Vec<C64> = w.pos().iter().zip(w.neg()).map(|(p, q)| p + q).collect();
    let dif: Vec<C64> = w.pos().iter().zip(w.neg()).map(|(p, q)| p - q).collect();
    let (tg, a) = lattice_transform(&sum, g.lo(), g.step(), g.len(), Sign::Minus)?;
    let (_, b) = lattice_transform(&dif, g.lo(), g.step(), g.len(), Sign::Minus)?;
    let warnings = decay_warning(w.pos())
        .into_iter()
        .chain(decay_warning(w.neg()))
        .collect();
    Ok(Checked::new(LogGridFn::new(tg, a, b)?, warnings))
}

/// Inverse of [`mellin_fx`]: `A = (2π)⁻¹∫ pos·e^{isτ} dτ`, `B` likewise from
/// `neg`, then `p = (A + B)/2` and `q = (A − B)/2`.
pub fn mellin_fx_inv(w: &LogGridFn) -> Result<Checked<LogGridFn>> {
    let g = *w.grid();
    require_pow2(&g)?;
    let (sg, a) = lattice_transform(w.pos(), g.lo(), g.step(), g.len(), Sign::Plus)?;
    let (_, b) = lattice_transform(w.neg(), g.lo(), g.step(), g.len(), Sign::Plus)?;
    let c = 1.0 / (4.0 * PI);
    let pos = a.iter().zip(&b).map(|(x, y)| (x + y) * c).collect();
    let neg = a.iter().zip(&b).map(|(x, y)| (x - y) * c).collect();
    let warnings = decay_warning(w.pos())
        .into_iter()
        .chain(decay_warning(w.neg()))
        .collect();
    Ok(Checked::new(LogGridFn::new(sg, pos, neg)?, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::log_grid;

    fn bump(s: f64) -> C64 {
        C64::new((-s * s / 2.0).exp(), 0.3 * s * (-s * s).exp())
    }

    #[test]
    fn positive_branch_only_collapses() {
        let g = log_grid(12.0, 1 << 10);
        let w = LogGridFn::new(
            g,
            g.points().map(bump).collect(),
            alloc::vec![C64::new(0.0, 0.0); g.len()],
        )
        .unwrap();
        let f = mellin_fx(&w).unwrap().value;
        assert_eq!(f.pos(), f.neg());
    }

    #[test]
    fn equal_branches_kill_negative_output() {
        let g = log_grid(12.0, 1 << 10);
        let b: Vec<C64> = g.points().map(bump).collect();
        let f = mellin_fx(&LogGridFn::new(g, b.clone(), b).unwrap())
            .unwrap()
            .value;
        assert!(f.neg().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn round_trip_is_identity() {
        let g = log_grid(12.0, 1 << 12);
        let w = LogGridFn::new(
            g,
            g.points().map(bump).collect(),
            g.points().map(|s| bump(s - 1.0) * 0.5).collect(),
        )
        .unwrap();
        let f = mellin_fx(&w).unwrap();
        assert!(f.warnings.is_empty());
        let back = mellin_fx_inv(&f.value).unwrap().value;
        assert!(back.rel_l2_error(&w).unwrap() < 1e-12);
    }

    #[test]
    fn isometry_preserves_norm() {
        let g = log_grid(14.0, 1 << 14);
        let w = LogGridFn::sample_real(g, |x| x * (-x * x).exp()).unwrap();
        let mw = isometry_m_log(&w);
        // ‖v‖²_{L²(ℝ)} = 2∫₀^∞ x² e^{−2x²} dx = √(π/2)/4
        let exact = (PI / 2.0).sqrt() / 4.0;
        assert!((mw.norm_sq() - exact).abs() < 1e-9 * exact);
        assert!(isometry_m_log_inv(&mw).rel_l2_error(&w).unwrap() < 1e-15);
    }

    #[test]
    fn resampling_round_trip() {
        let real = Grid::symmetric(20.0, 20_000).unwrap();
        let v = GridFn::from_real_fn(real, |x| x * x * (-x * x).exp()).unwrap();
        let lg = to_log_grid(&v, &log_grid(12.0, 1 << 14));
        let back = from_log_grid(&lg.value, &real).value;
        assert!(back.rel_l2_error_on(&v, -20.0, 20.0).unwrap() < 1e-4);

        let narrow = GridFn::from_real_fn(Grid::symmetric(1e-7, 10).unwrap(), |x| 1.0 + x).unwrap();
        let t = to_log_grid(&narrow, &log_grid(12.0, 1 << 10));
        assert_eq!(t.value.max_abs(), 0.0);
        assert_eq!(
            t.warnings,
            alloc::vec![Warning::Truncation { fraction: 1.0 }]
        );
    }
}
