//! Uniform grids and the sampled-function carriers built on them.
//!
//! [`GridFn`] holds a complex function sampled on a uniform real grid.
//! [`LogGridFn`] holds a function on `ℝ^× = ℝ∖{0}` as two branches
//! `x = +e^s` and `x = −e^s` sharing one uniform grid in `s = log|x|`; the
//! origin is never a grid point.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::C64;

/// A uniform grid `lo, lo + step, …, lo + (len − 1)·step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    lo: f64,
    step: f64,
    len: usize,
}

impl Grid {
    /// Grid with both endpoints included.
    pub fn new(lo: f64, hi: f64, n_pts: usize) -> Result<Self> {
        if n_pts < 2 {
            return Err(Error::config("a grid needs at least two points"));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::config("grid endpoints must be finite with hi > lo"));
        }
        Ok(Grid {
            lo,
            step: (hi - lo) / (n_pts - 1) as f64,
            len: n_pts,
        })
    }

    pub fn from_step(lo: f64, step: f64, len: usize) -> Result<Self> {
        if len < 2 || !(step.is_finite() && step > 0.0) || !lo.is_finite() {
            return Err(Error::config(
                "grid needs len ≥ 2 and a positive finite step",
            ));
        }
        Ok(Grid { lo, step, len })
    }

    /// The lattice-transform convention: `x_k = (k − len/2)·step`.
    pub fn centered(step: f64, len: usize) -> Result<Self> {
        Self::from_step(-((len / 2) as f64) * step, step, len)
    }

    /// Symmetric grid `−x_max, …, 0, …, x_max` with `2·half + 1` points.
    pub fn symmetric(x_max: f64, half: usize) -> Result<Self> {
        Self::new(-x_max, x_max, 2 * half + 1)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.point(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        let tol = 1e-9 * self.step;
        x >= self.lo - tol && x <= self.hi() + tol
    }

    /// True when the grid is (numerically) symmetric about zero.
    pub fn is_symmetric(&self) -> bool {
        (self.lo + self.hi()).abs() <= 1e-9 * self.step.max(self.hi().abs())
    }

    /// Index of the point nearest to `x`, if `x` lies on the grid range.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let i = ((x - self.lo) / self.step).round();
        Some((i.max(0.0) as usize).min(self.len - 1))
    }

    /// Same spacing and origin convention, checked point for point.
    pub fn aligned_with(&self, other: &Grid) -> bool {
        self.len == other.len
            && (self.lo - other.lo).abs() <= 1e-12 * (1.0 + self.lo.abs())
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }

    /// Cubic (four-point Lagrange) interpolation weights for `x`. Near the
    /// ends the stencil is shifted inward; a two-point grid falls back to
    /// linear weights. Returns `None` outside `[lo, hi]`.
    fn stencil(&self, x: f64) -> Option<(usize, [f64; 4], usize)> {
        if !self.contains(x) {
            return None;
        }
        let u = ((x - self.lo) / self.step).clamp(0.0, (self.len - 1) as f64);
        if self.len < 4 {
            let i = (u.floor() as usize).min(self.len - 2);
            let r = u - i as f64;
            return Some((i, [1.0 - r, r, 0.0, 0.0], 2));
        }
        let i = (u.floor() as isize - 1).clamp(0, self.len as isize - 4) as usize;
        let r = u - i as f64;
        // Lagrange basis on nodes 0, 1, 2, 3 evaluated at r.
        let w0 = -(r - 1.0) * (r - 2.0) * (r - 3.0) / 6.0;
        let w1 = r * (r - 2.0) * (r - 3.0) / 2.0;
        let w2 = -r * (r - 1.0) * (r - 3.0) / 2.0;
        let w3 = r * (r - 1.0) * (r - 2.0) / 6.0;
        Some((i, [w0, w1, w2, w3], 4))
    }
}

fn interp_with(grid: &Grid, values: &[C64], x: f64) -> Option<C64> {
    let (i, w, k) = grid.stencil(x)?;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..k {
        acc += values[i + j] * w[j];
    }
    Some(acc)
}

fn linear_with(grid: &Grid, values: &[C64], x: f64) -> Option<C64> {
    if !grid.contains(x) {
        return None;
    }
    let u = ((x - grid.lo) / grid.step).clamp(0.0, (grid.len - 1) as f64);
    let i = (u.floor() as usize).min(grid.len - 2);
    let r = u - i as f64;
    Some(values[i] * (1.0 - r) + values[i + 1] * r)
}

/// Complex values sampled on a uniform real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    grid: Grid,
    values: Vec<C64>,
}

impl GridFn {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape("value count differs from grid length"));
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite("GridFn::new"));
        }
        Ok(GridFn { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFn {
            grid,
            values: alloc::vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Result<Self> {
        Self::new(grid, grid.points().map(f).collect())
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().map(|x| C64::new(f(x), 0.0)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lo(&self) -> f64 {
        self.grid.lo()
    }

    pub fn hi(&self) -> f64 {
        self.grid.hi()
    }

    pub fn n_pts(&self) -> usize {
        self.grid.len()
    }

    pub fn step(&self) -> f64 {
        self.grid.step()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, C64)> + '_ {
        self.grid.points().zip(self.values.iter().copied())
    }

    pub fn interp_cubic(&self, x: f64) -> Option<C64> {
        interp_with(&self.grid, &self.values, x)
    }

    pub fn interp_linear(&self, x: f64) -> Option<C64> {
        linear_with(&self.grid, &self.values, x)
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Result<Self> {
        Self::new(self.grid, self.iter().map(|(x, v)| f(x, v)).collect())
    }

    /// Pointwise product; the grids must be aligned.
    pub fn mul(&self, other: &GridFn) -> Result<Self> {
        if !self.grid.aligned_with(&other.grid) {
            return Err(Error::Shape("pointwise product of misaligned grids"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Self::new(self.grid, values)
    }

    pub fn scale(&self, c: C64) -> Self {
        GridFn {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `∫|g|²` by the rectangle rule.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.step()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `⟨self, other⟩ = ∫ self · conj(other)` on aligned grids.
    pub fn inner(&self, other: &GridFn) -> Result<C64> {
        if !self.grid.aligned_with(&other.grid) {
            return Err(Error::Shape("inner product of misaligned grids"));
        }
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.step())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// `‖a − b‖ / ‖b‖` over the points with `x ∈ [lo, hi]`.
    pub fn rel_l2_error_on(&self, reference: &GridFn, lo: f64, hi: f64) -> Result<f64> {
        if !self.grid.aligned_with(&reference.grid) {
            return Err(Error::Shape("error norm of misaligned grids"));
        }
        let (mut num, mut den) = (0.0, 0.0);
        for ((x, a), b) in self.iter().zip(&reference.values) {
            if x >= lo && x <= hi {
                num += (a - b).norm_sqr();
                den += b.norm_sqr();
            }
        }
        Ok(if den > 0.0 {
            (num / den).sqrt()
        } else {
            num.sqrt()
        })
    }
}

/// A function on `ℝ^×` sampled at `x = ±e^s` on a shared uniform `s`-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LogGridFn {
    grid: Grid,
    pos: Vec<C64>,
    neg: Vec<C64>,
}

impl LogGridFn {
    pub fn new(grid: Grid, pos: Vec<C64>, neg: Vec<C64>) -> Result<Self> {
        if pos.len() != grid.len() || neg.len() != grid.len() {
            return Err(Error::Shape("branch length differs from the log grid"));
        }
        if pos
            .iter()
            .chain(&neg)
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite("LogGridFn::new"));
        }
        Ok(LogGridFn { grid, pos, neg })
    }

    pub fn zeros(grid: Grid) -> Self {
        let z = alloc::vec![C64::new(0.0, 0.0); grid.len()];
        LogGridFn {
            grid,
            pos: z.clone(),
            neg: z,
        }
    }

    /// Samples `f` at `x = +e^s` and `x = −e^s`.
    pub fn sample(grid: Grid, f: impl Fn(f64) -> C64) -> Result<Self> {
        let pos = grid.points().map(|s| f(s.exp())).collect();
        let neg = grid.points().map(|s| f(-s.exp())).collect();
        Self::new(grid, pos, neg)
    }

    pub fn sample_real(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::sample(grid, |x| C64::new(f(x), 0.0))
    }

    /// Default carrier: `s ∈ [−12, 12)`, 2¹⁴ points per branch.
    pub fn default_grid() -> Grid {
        log_grid(12.0, 1 << 14)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn s_lo(&self) -> f64 {
        self.grid.lo()
    }

    pub fn s_hi(&self) -> f64 {
        self.grid.hi()
    }

    pub fn n_pts(&self) -> usize {
        self.grid.len()
    }

    pub fn pos(&self) -> &[C64] {
        &self.pos
    }

    pub fn neg(&self) -> &[C64] {
        &self.neg
    }

    pub fn pos_mut(&mut self) -> &mut [C64] {
        &mut self.pos
    }

    pub fn neg_mut(&mut self) -> &mut [C64] {
        &mut self.neg
    }

    pub fn into_branches(self) -> (Vec<C64>, Vec<C64>) {
        (self.pos, self.neg)
    }

    /// Value at `x ≠ 0` by cubic interpolation in `log|x|` on the matching
    /// branch; `None` outside the grid range or at the origin.
    pub fn interp(&self, x: f64) -> Option<C64> {
        if x == 0.0 || !x.is_finite() {
            return None;
        }
        let s = x.abs().ln();
        let branch = if x > 0.0 { &self.pos } else { &self.neg };
        interp_with(&self.grid, branch, s)
    }

    /// `∫_{ℝ^×} |w|² dx/|x|`.
    pub fn norm_sq(&self) -> f64 {
        let s: f64 = self.pos.iter().chain(&self.neg).map(|v| v.norm_sqr()).sum();
        s * self.grid.step()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `∫_{ℝ^×} w · conj(u) dx/|x|` on identical grids.
    pub fn inner(&self, other: &LogGridFn) -> Result<C64> {
        if !self.grid.aligned_with(&other.grid) {
            return Err(Error::Shape("inner product of misaligned log grids"));
        }
        let s: C64 = self
            .pos
            .iter()
            .zip(&other.pos)
            .chain(self.neg.iter().zip(&other.neg))
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.step())
    }

    pub fn max_abs(&self) -> f64 {
        self.pos
            .iter()
            .chain(&self.neg)
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn map_branches(&self, f: impl Fn(f64, bool, C64) -> C64) -> Self {
        let pos = self
            .grid
            .points()
            .zip(&self.pos)
            .map(|(s, v)| f(s, true, *v))
            .collect();
        let neg = self
            .grid
            .points()
            .zip(&self.neg)
            .map(|(s, v)| f(s, false, *v))
            .collect();
        LogGridFn {
            grid: self.grid,
            pos,
            neg,
        }
    }

    /// Relative L² distance in `L²(ℝ^×, dx/|x|)`.
    pub fn rel_l2_error(&self, reference: &LogGridFn) -> Result<f64> {
        if !self.grid.aligned_with(&reference.grid) {
            return Err(Error::Shape("error norm of misaligned log grids"));
        }
        let num: f64 = self
            .pos
            .iter()
            .zip(&reference.pos)
            .chain(self.neg.iter().zip(&reference.neg))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den = reference.norm_sq() / reference.grid.step();
        Ok(if den > 0.0 {
            (num / den).sqrt()
        } else {
            num.sqrt()
        })
    }
}

/// Log grid `s ∈ [−s_max, s_max)` with `n` points in the lattice-transform
/// convention (so transforms on it round-trip exactly).
pub fn log_grid(s_max: f64, n: usize) -> Grid {
    Grid::centered(2.0 * s_max / n as f64, n).expect("log grid parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let g = Grid::new(-2.0, 3.0, 11).unwrap();
        let f = |x: f64| C64::new(x * x * x - 2.0 * x + 1.0, 0.5 * x * x);
        let gf = GridFn::from_fn(g, f).unwrap();
        for &x in &[-2.0, -1.93, 0.0, 0.77, 2.99, 3.0] {
            let v = gf.interp_cubic(x).unwrap();
            assert!((v - f(x)).norm() < 1e-12, "x = {x}");
        }
        assert!(gf.interp_cubic(3.1).is_none());
    }

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(Grid::new(1.0, 0.0, 5).is_err());
        assert!(GridFn::new(
            Grid::new(0.0, 1.0, 2).unwrap(),
            alloc::vec![C64::new(f64::NAN, 0.0); 2]
        )
        .is_err());
    }

    #[test]
    fn centered_grid_places_zero_at_half_length() {
        let g = Grid::centered(0.5, 8).unwrap();
        assert_eq!(g.point(4), 0.0);
        assert_eq!(g.lo(), -2.0);
        assert!(Grid::symmetric(3.0, 30).unwrap().is_symmetric());
    }

    #[test]
    fn log_grid_interp_uses_the_right_branch() {
        let g = log_grid(3.0, 64);
        let w = LogGridFn::sample_real(g, |x| if x > 0.0 { 1.0 } else { -1.0 }).unwrap();
        assert!((w.interp(1.5).unwrap().re - 1.0).abs() < 1e-12);
        assert!((w.interp(-1.5).unwrap().re + 1.0).abs() < 1e-12);
        assert!(w.interp(0.0).is_none());
    }
}
