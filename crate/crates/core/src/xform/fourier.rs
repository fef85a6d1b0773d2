use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::diag::{Checked, Warning};
use crate::error::{Error, Result};
use crate::fft::{fft, Sign};
use crate::grid::{Grid, GridFn};
use crate::C64;

/// `out(x_j) = step · Σ_k h_k e^{i·sign·x_j·(lo + k·step)}` on the centered
/// conjugate grid `x_j = (j − m/2)·2π/(m·step)`, `j < m`.
///
/// `values` are zero-padded to `m`, which must be a power of two no smaller
/// than `values.len()`.
pub fn lattice_transform(
    values: &[C64],
    lo: f64,
    step: f64,
    m: usize,
    sign: Sign,
) -> Result<(Grid, Vec<C64>)> {
    if m < values.len() || !m.is_power_of_two() || m < 2 {
        return Err(Error::Shape(
            "lattice transform length must be a power of two covering the input",
        ));
    }
    let mut buf = alloc::vec![C64::new(0.0, 0.0); m];
    for (k, v) in values.iter().enumerate() {
        buf[k] = if k % 2 == 0 { *v } else { -*v };
    }
    fft(&mut buf, sign)?;
    let out = Grid::centered(2.0 * PI / (m as f64 * step), m)?;
    let s = sign.value();
    for (j, b) in buf.iter_mut().enumerate() {
        let x = out.point(j);
        *b *= C64::from_polar(step, s * lo * x);
    }
    Ok((out, buf))
}

pub(crate) fn decay_warning(values: &[C64]) -> Option<Warning> {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let (lo, hi) = (values.first()?.norm(), values.last()?.norm());
    (max > 0.0 && lo.max(hi) > 1e-3 * max).then_some(Warning::InsufficientDecay { lo, hi, max })
}

fn checked(values: &[C64], grid: Grid, out: Vec<C64>) -> Result<Checked<GridFn>> {
    let warnings = decay_warning(values).into_iter().collect();
    Ok(Checked::new(GridFn::new(grid, out)?, warnings))
}

/// `𝓕₊g` on the conjugate grid of `g` padded to the next power of two.
pub fn fourier_plus(g: &GridFn) -> Result<Checked<GridFn>> {
    fourier_plus_padded(g, g.n_pts().next_power_of_two())
}

pub fn fourier_plus_padded(g: &GridFn, m: usize) -> Result<Checked<GridFn>> {
    let (grid, out) = lattice_transform(g.values(), g.lo(), g.step(), m, Sign::Plus)?;
    checked(g.values(), grid, out)
}

/// `𝓕₊⁻¹G(t) = (2π)⁻¹ ∫ e^{−itx} G(x) dx` on the conjugate grid.
pub fn fourier_plus_inv(g: &GridFn) -> Result<Checked<GridFn>> {
    fourier_plus_inv_padded(g, g.n_pts().next_power_of_two())
}

pub fn fourier_plus_inv_padded(g: &GridFn, m: usize) -> Result<Checked<GridFn>> {
    let (grid, mut out) = lattice_transform(g.values(), g.lo(), g.step(), m, Sign::Minus)?;
    for v in &mut out {
        *v /= 2.0 * PI;
    }
    checked(g.values(), grid, out)
}
