use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::window::{for_each_index, m_bound, Window};
use crate::error::{Error, Result};
use crate::levy::{KernelFn, LevyModel};
use crate::C64;

/// Cells per RNG stream along the last axis.
const BLOCK: i64 = 64;

/// Observations `Y_j = X(jΔ)` on the box `∏ [lo_i, lo_i + shape_i)`, stored
/// row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    lo: Vec<i64>,
    shape: Vec<usize>,
    values: Vec<f64>,
    pub delta: f64,
    pub h: f64,
    pub m: usize,
    pub seed: u64,
    pub drift: f64,
    pub model: LevyModel,
    pub kernel: KernelFn,
}

impl FieldSample {
    /// Wraps externally produced observations, e.g. read back from disk.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        lo: Vec<i64>,
        shape: Vec<usize>,
        values: Vec<f64>,
        delta: f64,
        h: f64,
        seed: u64,
        drift: f64,
        model: LevyModel,
        kernel: KernelFn,
    ) -> Result<Self> {
        if lo.len() != shape.len() || lo.len() != kernel.dim() {
            return Err(Error::Shape("window and kernel dimensions differ"));
        }
        if values.len() != shape.iter().product::<usize>() {
            return Err(Error::Shape("sample length differs from the window size"));
        }
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field sample"));
        }
        let m = m_bound(&kernel, delta)?;
        Ok(FieldSample {
            lo,
            shape,
            values,
            delta,
            h,
            m,
            seed,
            drift,
            model,
            kernel,
        })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn window(&self) -> Window {
        Window::boxed(&self.lo, &self.shape).expect("sample shape is consistent")
    }

    /// `(j, Y_j)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, f64)> + '_ {
        let mut pts = Vec::with_capacity(self.n());
        for_each_index(&self.shape, |idx| {
            pts.push(
                idx.iter()
                    .zip(&self.lo)
                    .map(|(i, l)| *i as i64 + l)
                    .collect(),
            )
        });
        pts.into_iter().zip(self.values.iter().copied())
    }

    pub(crate) fn offset(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (i, s)| acc * s + i)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for the block of cells whose leading coordinates are `prefix` and
/// whose last coordinate lies in `[BLOCK·k, BLOCK·(k + 1))`.
fn block_rng(seed: u64, prefix: &[i64], k: i64) -> ChaCha8Rng {
    let mut z = splitmix(seed);
    for &c in prefix.iter().chain(core::iter::once(&k)) {
        z = splitmix(z ^ c as u64);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        z = splitmix(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Independent `Gamma(h^d, b)` masses of the cells `[kh, (k + 1)h)` for the
/// integer box `∏ [lo_i, lo_i + shape_i)`, row-major.
///
/// Each run of 64 cells along the last axis has its own stream keyed by the
/// seed and the absolute block position, so enlarging the box leaves the
/// draws of cells already inside it unchanged.
pub fn simulate_gamma_basis(
    lo: &[i64],
    shape: &[usize],
    h: f64,
    b: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if lo.len() != shape.len() || lo.is_empty() {
        return Err(Error::Shape("region corner and shape differ in dimension"));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::config("cell size h must be positive"));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::config("Gamma rate b must be positive"));
    }
    let alpha = h.powi(lo.len() as i32);
    if alpha < 1e-6 {
        return Err(Error::config(
            "cell volume below 1e-6 is outside the Gamma sampler's validated range",
        ));
    }
    let dist = Gamma::new(alpha, 1.0 / b).map_err(|_| Error::config("invalid Gamma parameters"))?;
    let d = lo.len();
    let n_last = shape[d - 1];
    let mut out = Vec::with_capacity(shape.iter().product());
    let rows = &shape[..d - 1];
    let mut emit_row = |prefix: &[i64]| {
        let start = lo[d - 1];
        let end = start + n_last as i64;
        let mut k = start.div_euclid(BLOCK);
        while k * BLOCK < end {
            let mut rng = block_rng(seed, prefix, k);
            for c in k * BLOCK..(k + 1) * BLOCK {
                let x: f64 = dist.sample(&mut rng);
                if c >= start && c < end {
                    out.push(x);
                }
            }
            k += 1;
        }
    };
    if rows.is_empty() {
        emit_row(&[]);
    } else {
        for_each_index(rows, |idx| {
            let prefix: Vec<i64> = idx.iter().zip(lo).map(|(i, l)| *i as i64 + l).collect();
            emit_row(&prefix);
        });
    }
    Ok(out)
}

/// Discretized moving average `Y_j = Σ_r W_r M_{jq − r}`: `q = Δ/h` and the
/// taps `(r, W_r)` with `W_r` the cell weight of `f` on `∏ [(r_i − 1)h, r_i h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub q: i64,
    pub h: f64,
    pub taps: Vec<(Vec<i64>, f64)>,
    r_lo: Vec<i64>,
    r_hi: Vec<i64>,
}

impl Stencil {
    /// `h` must divide `Δ`.
    pub fn new(f: &KernelFn, delta: f64, h: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0 && h.is_finite() && h > 0.0) {
            return Err(Error::config("Δ and h must be positive"));
        }
        let qf = delta / h;
        let q = qf.round();
        if q < 1.0 || (qf - q).abs() > 1e-9 * qf {
            return Err(Error::config("cell size h must divide Δ"));
        }
        let sup = f.support_box();
        let r_lo: Vec<i64> = sup
            .iter()
            .map(|(a, _)| (a / h).floor() as i64 + 1)
            .collect();
        let r_hi: Vec<i64> = sup.iter().map(|(_, c)| (c / h).ceil() as i64).collect();
        let r_shape: Vec<usize> = r_lo
            .iter()
            .zip(&r_hi)
            .map(|(a, c)| (c - a + 1).max(0) as usize)
            .collect();
        let mut taps = Vec::new();
        for_each_index(&r_shape, |idx| {
            let r: Vec<i64> = idx.iter().zip(&r_lo).map(|(i, a)| *i as i64 + a).collect();
            let cell: Vec<f64> = r.iter().map(|ri| (*ri - 1) as f64 * h).collect();
            let w = f.cell_weight(&cell, h);
            if w != 0.0 {
                taps.push((r, w));
            }
        });
        Ok(Stencil {
            q: q as i64,
            h,
            taps,
            r_lo,
            r_hi,
        })
    }

    pub fn dim(&self) -> usize {
        self.r_lo.len()
    }

    /// `log 𝔼 exp(i Σ u_j Y_j)` for `Gamma(h^d, b)` cell masses, where
    /// `coeffs` lists the pairs `(j, u_j)`.
    pub fn log_joint_cf(&self, b: f64, coeffs: &[(Vec<i64>, f64)]) -> C64 {
        let mut per_cell: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (j, u) in coeffs {
            for (r, w) in &self.taps {
                let k: Vec<i64> = j.iter().zip(r).map(|(ji, ri)| ji * self.q - ri).collect();
                *per_cell.entry(k).or_insert(0.0) += u * w;
            }
        }
        let alpha = self.h.powi(self.dim() as i32);
        per_cell
            .values()
            .map(|c| -C64::new(1.0, -c / b).ln() * alpha)
            .sum()
    }

    /// `ψ(t) = 𝔼 e^{itY₀}` of the discretized field without drift.
    pub fn psi(&self, b: f64, t: f64) -> C64 {
        self.log_joint_cf(b, &[(alloc::vec![0; self.dim()], t)])
            .exp()
    }

    /// `θ(t) = 𝔼 Y₀e^{itY₀} = ψ(t)·h^d Σ_r W_r/(b − itW_r)`.
    pub fn theta(&self, b: f64, t: f64) -> C64 {
        let alpha = self.h.powi(self.dim() as i32);
        let s: C64 = self
            .taps
            .iter()
            .map(|(_, w)| C64::new(b, -t * w).inv() * (alpha * w))
            .sum();
        self.psi(b, t) * s
    }
}

/// Simulates `X(t) = ∫ f(t − x) Λ(dx)` for a Gamma basis at `t = jΔ`, `j` in
/// the box `[0, side)^d`, plus a constant drift.
///
/// The basis is discretized into cells of side `h`, which must divide `Δ`;
/// see [`Stencil`].
pub fn simulate_field(
    model: &LevyModel,
    f: &KernelFn,
    delta: f64,
    side: usize,
    h: f64,
    seed: u64,
    drift: f64,
) -> Result<FieldSample> {
    let b = model
        .gamma_rate()
        .ok_or_else(|| Error::config("only Gamma bases can be simulated"))?;
    if side == 0 {
        return Err(Error::config("window side must be positive"));
    }
    if !drift.is_finite() {
        return Err(Error::NonFinite("drift"));
    }
    let st = Stencil::new(f, delta, h)?;
    let (q, d) = (st.q, f.dim());

    // cells k = jq − r over the window
    let k_lo: Vec<i64> = st.r_hi.iter().map(|c| -c).collect();
    let k_shape: Vec<usize> = st
        .r_lo
        .iter()
        .zip(&k_lo)
        .map(|(a, kl)| ((side as i64 - 1) * q - a - kl + 1).max(1) as usize)
        .collect();
    let masses = simulate_gamma_basis(&k_lo, &k_shape, h, b, seed)?;
    let at = |k: &[i64]| -> f64 {
        let mut off = 0usize;
        for ((ki, kl), s) in k.iter().zip(&k_lo).zip(&k_shape) {
            off = off * s + (ki - kl) as usize;
        }
        masses[off]
    };

    let shape = alloc::vec![side; d];
    let mut values = Vec::with_capacity(side.pow(d as u32));
    let mut k = alloc::vec![0i64; d];
    for_each_index(&shape, |j| {
        let mut y = drift;
        for (r, w) in &st.taps {
            for a in 0..d {
                k[a] = j[a] as i64 * q - r[a];
            }
            y += w * at(&k);
        }
        values.push(y);
    });
    FieldSample::from_parts(
        alloc::vec![0; d],
        shape,
        values,
        delta,
        h,
        seed,
        drift,
        model.clone(),
        f.clone(),
    )
}
