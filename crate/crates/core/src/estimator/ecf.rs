use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFn};
use crate::C64;

/// Empirical characteristic function `ψ̂(t) = n⁻¹ Σ e^{itY_j}` and its
/// companion `θ̂(t) = n⁻¹ Σ Y_j e^{itY_j}` on a symmetric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecf {
    grid: Grid,
    psi: Vec<C64>,
    theta: Vec<C64>,
    n: usize,
}

/// Phases are resynchronized with an exact `sin_cos` this often.
const RESYNC: usize = 64;

/// Adds `weight·e^{i t_k x}` (for `k ≥ 0`, `t_k = k·dt`) into `acc[k]` via a
/// rotation recurrence.
#[inline]
pub(crate) fn accumulate_phases(x: f64, dt: f64, weight: C64, acc: &mut [C64]) {
    let rot = C64::from_polar(1.0, dt * x);
    let mut z = C64::new(1.0, 0.0);
    for (k, a) in acc.iter_mut().enumerate() {
        if k % RESYNC == 0 && k > 0 {
            z = C64::from_polar(1.0, k as f64 * dt * x);
        }
        *a += z * weight;
        z *= rot;
    }
}

impl Ecf {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn psi(&self) -> &[C64] {
        &self.psi
    }

    pub fn theta(&self) -> &[C64] {
        &self.theta
    }

    pub fn psi_fn(&self) -> GridFn {
        GridFn::new(self.grid, self.psi.clone()).expect("ecf values are finite")
    }

    pub fn theta_fn(&self) -> GridFn {
        GridFn::new(self.grid, self.theta.clone()).expect("ecf values are finite")
    }
}

/// Builds the normalized ECF on `grid`, which must be symmetric with an odd
/// number of points (so that `t = 0` is a node). Values at `−t` are the exact
/// conjugates of those at `t`.
pub fn ecf(ys: &[f64], grid: &Grid) -> Result<Ecf> {
    if ys.is_empty() {
        return Err(Error::EmptySample);
    }
    if grid.len().is_multiple_of(2) || !grid.is_symmetric() {
        return Err(Error::config(
            "ECF grid must be symmetric about 0 with an odd number of points",
        ));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::NonFinite("ECF sample"));
    }
    let half = grid.len() / 2;
    let dt = grid.step();
    let mut psi_h = alloc::vec![C64::new(0.0, 0.0); half + 1];
    let mut theta_h = alloc::vec![C64::new(0.0, 0.0); half + 1];
    let mut tmp = alloc::vec![C64::new(0.0, 0.0); half + 1];
    for &y in ys {
        tmp.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        accumulate_phases(y, dt, C64::new(1.0, 0.0), &mut tmp);
        for k in 0..=half {
            psi_h[k] += tmp[k];
            theta_h[k] += tmp[k] * y;
        }
    }
    let inv = 1.0 / ys.len() as f64;
    psi_h[0] = C64::new(1.0, 0.0);
    let mut psi = alloc::vec![C64::new(0.0, 0.0); grid.len()];
    let mut theta = psi.clone();
    for k in 0..=half {
        let (p, t) = if k == 0 {
            (psi_h[0], theta_h[0] * inv)
        } else {
            (psi_h[k] * inv, theta_h[k] * inv)
        };
        psi[half + k] = p;
        theta[half + k] = t;
        psi[half - k] = p.conj();
        theta[half - k] = t.conj();
    }
    theta[half] = C64::new(theta[half].re, 0.0);
    Ok(Ecf {
        grid: *grid,
        psi,
        theta,
        n: ys.len(),
    })
}

/// `1/ψ̂` where `|ψ̂| > n^{−1/2}`, zero elsewhere.
pub fn psi_tilde(e: &Ecf) -> Vec<C64> {
    let thr = 1.0 / (e.n as f64).sqrt();
    e.psi
        .iter()
        .map(|p| {
            if p.norm() > thr {
                p.inv()
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect()
}
