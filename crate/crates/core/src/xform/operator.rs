use alloc::vec::Vec;

use super::mellin::{
    from_log_grid, isometry_m_log, isometry_m_log_inv, mellin_fx, mellin_fx_inv, to_log_grid,
};
use crate::diag::{Checked, Warning};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFn, LogGridFn};
use crate::levy::KernelFn;
use crate::C64;

/// `μ_f` sampled on a log-frequency grid: `pos[i] = m_{f,+}(τᵢ)`,
/// `neg[i] = m_{f,−}(τᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub grid: Grid,
    pub pos: Vec<C64>,
    pub neg: Vec<C64>,
}

pub fn symbol_on(f: &KernelFn, tau: &Grid) -> Symbol {
    let (pos, neg) = tau.points().map(|t| f.m_f(t)).unzip();
    Symbol {
        grid: *tau,
        pos,
        neg,
    }
}

/// `(1/μ)·1{|μ| > a_n}`, conjugated for the adjoint. Ties are zeroed.
pub fn cutoff_multiplier(mu: C64, a_n: f64, adjoint: bool) -> C64 {
    if mu.norm() > a_n {
        let m = if adjoint { mu.conj() } else { mu };
        m.inv()
    } else {
        C64::new(0.0, 0.0)
    }
}

/// `𝓜⁻¹ 𝓕_×⁻¹ (mult · 𝓕_× 𝓜 v)` with `mult` chosen per branch value of `μ_f`.
fn spectral(v: &LogGridFn, f: &KernelFn, mult: impl Fn(C64) -> C64) -> Result<Checked<LogGridFn>> {
    let mut warnings = Vec::new();
    let spectrum = mellin_fx(&isometry_m_log(v))?.drain_into(&mut warnings);
    let sym = symbol_on(f, spectrum.grid());
    let (pos, neg) = spectrum.into_branches();
    let pos = pos
        .iter()
        .zip(&sym.pos)
        .map(|(x, m)| x * mult(*m))
        .collect();
    let neg = neg
        .iter()
        .zip(&sym.neg)
        .map(|(x, m)| x * mult(*m))
        .collect();
    let spectrum = LogGridFn::new(sym.grid, pos, neg)?;
    let back = mellin_fx_inv(&spectrum)?.drain_into(&mut warnings);
    Ok(Checked::new(isometry_m_log_inv(&back), warnings))
}

fn check_cutoff(a_n: f64) -> Result<()> {
    if a_n.is_finite() && a_n >= 0.0 {
        Ok(())
    } else {
        Err(Error::config("cutoff a_n must be finite and non-negative"))
    }
}

fn regularized(v: &LogGridFn, f: &KernelFn, a_n: f64, adjoint: bool) -> Result<Checked<LogGridFn>> {
    check_cutoff(a_n)?;
    let mut out = spectral(v, f, |m| cutoff_multiplier(m, a_n, adjoint))?;
    if a_n == 0.0 {
        let tau = mellin_fx(&LogGridFn::zeros(*v.grid()))?.value;
        let sym = symbol_on(f, tau.grid());
        let nodes = sym
            .pos
            .iter()
            .chain(&sym.neg)
            .filter(|m| m.norm() == 0.0)
            .count();
        if nodes > 0 {
            out.warnings.push(Warning::VanishingSymbol { nodes });
        }
    }
    Ok(out)
}

/// `𝒢ₙ⁻¹v` on a log grid.
pub fn apply_g_inv_n_log(v: &LogGridFn, f: &KernelFn, a_n: f64) -> Result<Checked<LogGridFn>> {
    regularized(v, f, a_n, false)
}

/// `𝒢ₙ⁻¹*v` on a log grid.
pub fn apply_g_inv_adjoint_n_log(
    v: &LogGridFn,
    f: &KernelFn,
    a_n: f64,
) -> Result<Checked<LogGridFn>> {
    regularized(v, f, a_n, true)
}

/// `𝒢v` through its symbol.
pub fn apply_g_spectral_log(v: &LogGridFn, f: &KernelFn) -> Result<Checked<LogGridFn>> {
    spectral(v, f, |m| m)
}

/// `𝒢v(x) = ∫ sgn(f(s)) v(x / f(s)) ds` by quadrature, interpolating `v` in
/// `log|x|`. Arguments falling off the grid count as zero.
pub fn apply_g_log(v: &LogGridFn, f: &KernelFn) -> Checked<LogGridFn> {
    let g = *v.grid();
    let (mut dropped, mut total) = (0usize, 0usize);
    let mut eval = |s: f64, pos_branch: bool| {
        let mut acc = C64::new(0.0, 0.0);
        for &(fv, w) in f.quad() {
            total += 1;
            let x = if pos_branch { 1.0 } else { -1.0 } * (s - fv.abs().ln()).exp() / fv.signum();
            match v.interp(x) {
                Some(y) => acc += y * (w * fv.signum()),
                None => dropped += 1,
            }
        }
        acc
    };
    let pos = g.points().map(|s| eval(s, true)).collect();
    let neg = g.points().map(|s| eval(s, false)).collect();
    let out = LogGridFn::new(g, pos, neg).expect("finite input stays finite");
    let warnings = if dropped > 0 {
        alloc::vec![Warning::Truncation {
            fraction: dropped as f64 / total as f64
        }]
    } else {
        Vec::new()
    };
    Checked::new(out, warnings)
}

/// `𝒢v` on a uniform grid by quadrature with cubic interpolation.
pub fn apply_g(v: &GridFn, f: &KernelFn) -> Checked<GridFn> {
    let (mut dropped, mut total) = (0usize, 0usize);
    let mut values = Vec::with_capacity(v.n_pts());
    for x in v.grid().points() {
        let mut acc = C64::new(0.0, 0.0);
        for &(fv, w) in f.quad() {
            total += 1;
            match v.interp_cubic(x / fv) {
                Some(y) => acc += y * (w * fv.signum()),
                None => dropped += 1,
            }
        }
        values.push(acc);
    }
    let out = GridFn::new(*v.grid(), values).expect("finite input stays finite");
    let warnings = if dropped > 0 {
        alloc::vec![Warning::Truncation {
            fraction: dropped as f64 / total as f64
        }]
    } else {
        Vec::new()
    };
    Checked::new(out, warnings)
}

fn via_log(
    v: &GridFn,
    f: &KernelFn,
    a_n: f64,
    log_grid: &Grid,
    adjoint: bool,
) -> Result<Checked<GridFn>> {
    let mut warnings = Vec::new();
    let w = to_log_grid(v, log_grid).drain_into(&mut warnings);
    let r = regularized(&w, f, a_n, adjoint)?.drain_into(&mut warnings);
    let out = from_log_grid(&r, v.grid()).drain_into(&mut warnings);
    Ok(Checked::new(out, warnings))
}

/// `𝒢ₙ⁻¹v` for `v` on a uniform grid, computed on `log_grid` and resampled.
pub fn apply_g_inv_n(
    v: &GridFn,
    f: &KernelFn,
    a_n: f64,
    log_grid: &Grid,
) -> Result<Checked<GridFn>> {
    via_log(v, f, a_n, log_grid, false)
}

pub fn apply_g_inv_adjoint_n(
    v: &GridFn,
    f: &KernelFn,
    a_n: f64,
    log_grid: &Grid,
) -> Result<Checked<GridFn>> {
    via_log(v, f, a_n, log_grid, true)
}
