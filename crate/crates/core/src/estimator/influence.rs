use alloc::vec::Vec;
use core::f64::consts::PI;

use super::ecf::accumulate_phases;
use super::functional::SpectralPlan;
use crate::diag::{Checked, Warning};
use crate::error::{Error, Result};
use crate::field::{simulate_field, FieldSample};
use crate::grid::{Grid, GridFn};
use crate::levy::forward::{psi_at, uv1_ft_at};
use crate::levy::{KernelFn, LevyModel};
use crate::C64;

/// Tabulated influence functions
/// `g⁽¹⁾(y) = (2π)⁻¹ y ∫ e^{ity} W(−t)K(t)/ψ(t) dt` and
/// `g⁽²⁾(y) = (2π)⁻¹ ∫ e^{ity} W(−t)K(t)θ(t)/ψ(t)² dt`,
/// with `W = 𝓕₊[𝒢ₙ⁻¹*v]` and `K = 𝓕₊[K_b]` taken from a [`SpectralPlan`].
#[derive(Debug, Clone, PartialEq)]
pub struct InfluencePlan {
    g1: GridFn,
    g2: GridFn,
}

impl InfluencePlan {
    /// `ψ` and `θ` are the model's, with drift `gamma`.
    pub fn new(
        plan: &SpectralPlan,
        model: &LevyModel,
        f: &KernelFn,
        gamma: f64,
        y_grid: &Grid,
    ) -> Result<Checked<Self>> {
        let Some(tg) = plan.t_grid() else {
            return Ok(Checked::clean(InfluencePlan {
                g1: GridFn::zeros(*y_grid),
                g2: GridFn::zeros(*y_grid),
            }));
        };
        let half = tg.len() / 2;
        let dt = tg.step();
        // a(t) = W(−t)K(t)/ψ(t), c(t) = a(t)θ(t)/ψ(t), stored for t = k·dt, k ∈ [−half, half]
        let mut a = Vec::with_capacity(tg.len());
        let mut c = Vec::with_capacity(tg.len());
        for (i, t) in tg.points().enumerate() {
            let psi = psi_at(model, f, gamma, t);
            if psi.norm() == 0.0 {
                return Err(Error::OutOfDomain {
                    what: "ψ vanishes on the band",
                    value: t,
                });
            }
            let theta = psi * (uv1_ft_at(model, f, t) + gamma);
            let wk = plan.w()[tg.len() - 1 - i] * plan.kernel().ft(t);
            let ai = wk / psi;
            a.push(ai);
            c.push(ai * theta / psi);
        }
        let mut g1 = Vec::with_capacity(y_grid.len());
        let mut g2 = Vec::with_capacity(y_grid.len());
        let mut z = alloc::vec![C64::new(0.0, 0.0); half + 1];
        let (mut max_re, mut max_im) = (0.0f64, 0.0f64);
        for y in y_grid.points() {
            z.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            accumulate_phases(y, dt, C64::new(1.0, 0.0), &mut z);
            let (mut s1, mut s2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for k in 0..=half {
                let zp = z[k];
                s1 += a[half + k] * zp;
                s2 += c[half + k] * zp;
                if k > 0 {
                    s1 += a[half - k] * zp.conj();
                    s2 += c[half - k] * zp.conj();
                }
            }
            let s1 = s1 * (y * dt / (2.0 * PI));
            let s2 = s2 * (dt / (2.0 * PI));
            let d = s1 - s2;
            max_re = max_re.max(d.re.abs());
            max_im = max_im.max(d.im.abs());
            g1.push(C64::new(s1.re, 0.0));
            g2.push(C64::new(s2.re, 0.0));
        }
        let mut warnings = Vec::new();
        if max_re > 0.0 && max_im > 1e-6 * max_re {
            warnings.push(Warning::ImaginaryResidual {
                relative: max_im / max_re,
            });
        }
        Ok(Checked::new(
            InfluencePlan {
                g1: GridFn::new(*y_grid, g1)?,
                g2: GridFn::new(*y_grid, g2)?,
            },
            warnings,
        ))
    }

    pub fn y_grid(&self) -> &Grid {
        self.g1.grid()
    }

    /// `(g⁽¹⁾(y), g⁽²⁾(y))`, `None` off the table.
    pub fn eval(&self, y: f64) -> Option<(f64, f64)> {
        Some((self.g1.interp_cubic(y)?.re, self.g2.interp_cubic(y)?.re))
    }

    /// Per-site pairs `(Z⁽¹⁾_j, Z⁽²⁾_j)`.
    pub fn z_statistics(&self, ys: &[f64]) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(ys.len());
        let mut missing = 0usize;
        for &y in ys {
            match self.eval(y) {
                Some(p) => out.push(p),
                None => missing += 1,
            }
        }
        if missing > 0 {
            return Err(Error::Extrapolation { count: missing });
        }
        Ok(out)
    }

    /// `g = g⁽¹⁾ − g⁽²⁾` at every site.
    pub fn g_values(&self, ys: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .z_statistics(ys)?
            .into_iter()
            .map(|(a, b)| a - b)
            .collect())
    }
}

/// Accumulates lagwise cross products of `k` site-indexed series over
/// patches, for `σ_{st} = Σ_{‖j‖∞ ≤ m} Cov(g_s(Y_j), g_t(Y_0))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagCovAccumulator {
    k: usize,
    m: usize,
    dim: usize,
    lags: Vec<Vec<i64>>,
    /// `[lag][s][t]` sums of `g_s(j)·g_t(j + lag)`.
    prods: Vec<f64>,
    pairs: Vec<f64>,
    sums: Vec<f64>,
    sites: f64,
}

impl LagCovAccumulator {
    pub fn new(k: usize, dim: usize, m: usize) -> Self {
        let side = 2 * m + 1;
        let mut lags = Vec::new();
        crate::field::for_each_index(&alloc::vec![side; dim], |idx| {
            lags.push(idx.iter().map(|i| *i as i64 - m as i64).collect())
        });
        let nl = lags.len();
        LagCovAccumulator {
            k,
            m,
            dim,
            lags,
            prods: alloc::vec![0.0; nl * k * k],
            pairs: alloc::vec![0.0; nl],
            sums: alloc::vec![0.0; k],
            sites: 0.0,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Adds one patch: `series[s]` holds `g_s` at the sites of the box
    /// `shape`, row-major.
    pub fn add_patch(&mut self, shape: &[usize], series: &[Vec<f64>]) -> Result<()> {
        let n: usize = shape.iter().product();
        if shape.len() != self.dim || series.len() != self.k || series.iter().any(|s| s.len() != n)
        {
            return Err(Error::Shape("patch does not match the accumulator"));
        }
        let k = self.k;
        for (s, ser) in series.iter().enumerate() {
            self.sums[s] += ser.iter().sum::<f64>();
        }
        self.sites += n as f64;
        let offset = |idx: &[usize]| {
            idx.iter()
                .zip(shape)
                .fold(0usize, |acc, (i, s)| acc * s + i)
        };
        let mut other = alloc::vec![0usize; self.dim];
        for (li, lag) in self.lags.iter().enumerate() {
            crate::field::for_each_index(shape, |j| {
                for a in 0..j.len() {
                    let t = j[a] as i64 + lag[a];
                    if t < 0 || t >= shape[a] as i64 {
                        return;
                    }
                    other[a] = t as usize;
                }
                let (p, q) = (offset(j), offset(&other));
                self.pairs[li] += 1.0;
                for s in 0..k {
                    for t in 0..k {
                        self.prods[(li * k + s) * k + t] += series[s][p] * series[t][q];
                    }
                }
            });
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &LagCovAccumulator) -> Result<()> {
        if self.k != other.k || self.m != other.m || self.dim != other.dim {
            return Err(Error::Shape("merging incompatible accumulators"));
        }
        self.prods
            .iter_mut()
            .zip(&other.prods)
            .for_each(|(a, b)| *a += b);
        self.pairs
            .iter_mut()
            .zip(&other.pairs)
            .for_each(|(a, b)| *a += b);
        self.sums
            .iter_mut()
            .zip(&other.sums)
            .for_each(|(a, b)| *a += b);
        self.sites += other.sites;
        Ok(())
    }

    /// Symmetrized `k × k` matrix, row-major. Negative diagonal entries are
    /// clamped to zero with a warning.
    pub fn finish(&self) -> Result<Checked<Vec<f64>>> {
        if self.sites == 0.0 {
            return Err(Error::EmptySample);
        }
        let k = self.k;
        let mean: Vec<f64> = self.sums.iter().map(|s| s / self.sites).collect();
        let mut sig = alloc::vec![0.0; k * k];
        for li in 0..self.lags.len() {
            if self.pairs[li] == 0.0 {
                continue;
            }
            for s in 0..k {
                for t in 0..k {
                    sig[s * k + t] +=
                        self.prods[(li * k + s) * k + t] / self.pairs[li] - mean[s] * mean[t];
                }
            }
        }
        for s in 0..k {
            for t in s + 1..k {
                let avg = 0.5 * (sig[s * k + t] + sig[t * k + s]);
                sig[s * k + t] = avg;
                sig[t * k + s] = avg;
            }
        }
        let mut warnings = Vec::new();
        for s in 0..k {
            if sig[s * k + s] < 0.0 {
                warnings.push(Warning::ClampedVariance {
                    raw: sig[s * k + s],
                });
                sig[s * k + s] = 0.0;
            }
        }
        Ok(Checked::new(sig, warnings))
    }
}

fn series_of(plans: &[&InfluencePlan], ys: &[f64]) -> Result<Vec<Vec<f64>>> {
    plans.iter().map(|p| p.g_values(ys)).collect()
}

/// Plug-in `Σ` from the lag-window covariances of one sample.
pub fn sigma_plugin(plans: &[&InfluencePlan], sample: &FieldSample) -> Result<Checked<Vec<f64>>> {
    let mut acc = LagCovAccumulator::new(plans.len(), sample.dim(), sample.m);
    acc.add_patch(sample.shape(), &series_of(plans, sample.values())?)?;
    acc.finish()
}

/// Simulation settings for the model-based variance.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchConfig {
    pub delta: f64,
    pub h: f64,
    pub side: usize,
    pub drift: f64,
}

/// Accumulates lag-window products over independent field patches, one per
/// seed. Patches can be split across workers and merged in seed order.
pub fn accumulate_patches(
    plans: &[&InfluencePlan],
    model: &LevyModel,
    f: &KernelFn,
    cfg: &PatchConfig,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<LagCovAccumulator> {
    let m = crate::field::m_bound(f, cfg.delta)?;
    let mut acc = LagCovAccumulator::new(plans.len(), f.dim(), m);
    for seed in seeds {
        let s = simulate_field(model, f, cfg.delta, cfg.side, cfg.h, seed, cfg.drift)?;
        acc.add_patch(s.shape(), &series_of(plans, s.values())?)?;
    }
    Ok(acc)
}

/// Model-based `Σ` from `patches` simulated patches with seeds
/// `seed, seed + 1, …`.
pub fn sigma_model_mc(
    plans: &[&InfluencePlan],
    model: &LevyModel,
    f: &KernelFn,
    cfg: &PatchConfig,
    patches: u64,
    seed: u64,
) -> Result<Checked<Vec<f64>>> {
    accumulate_patches(
        plans,
        model,
        f,
        cfg,
        (0..patches).map(|p| seed.wrapping_add(p)),
    )?
    .finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_noise_lag_window() {
        let mut acc = LagCovAccumulator::new(2, 1, 1);
        // alternating ±1 has lag-1 covariance −1 per pair
        let a: Vec<f64> = (0..1000)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let b: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
        acc.add_patch(&[1000], &[a, b]).unwrap();
        let s = acc.finish().unwrap();
        // 1 − 1 − 1 = −1 on the first diagonal entry, clamped
        assert_eq!(s.value[0], 0.0);
        assert!(matches!(s.warnings[0], Warning::ClampedVariance { .. }));
        assert!((s.value[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn merge_equals_single_pass() {
        let xs: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64).collect();
        let mut one = LagCovAccumulator::new(1, 1, 2);
        one.add_patch(&[32], &[xs[..32].to_vec()]).unwrap();
        one.add_patch(&[32], &[xs[32..].to_vec()]).unwrap();
        let mut a = LagCovAccumulator::new(1, 1, 2);
        a.add_patch(&[32], &[xs[..32].to_vec()]).unwrap();
        let mut b = LagCovAccumulator::new(1, 1, 2);
        b.add_patch(&[32], &[xs[32..].to_vec()]).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a, one);
    }
}
