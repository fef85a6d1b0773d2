use alloc::vec::Vec;
use core::f64::consts::PI;

use super::ecf::{accumulate_phases, ecf, psi_tilde, Ecf};
use super::smoothing::SmoothingKernel;
use super::test_fn::TestFunction;
use crate::diag::{Checked, Warning};
use crate::error::{Error, Result};
use crate::fft::Sign;
use crate::grid::{Grid, GridFn, LogGridFn};
use crate::levy::{KernelFn, LevyKind, LevyModel};
use crate::quad;
use crate::xform::{
    apply_g_inv_adjoint_n_log, apply_g_inv_n, apply_g_inv_n_log, lattice_transform, to_log_grid,
};
use crate::C64;

/// Relative agreement required between the direct and adjoint routes.
pub const INTEGRITY_TOL: f64 = 1e-4;

/// `θ̂·ψ̃·𝓕₊[K_b]` on the ECF grid.
fn smoothed_ratio(e: &Ecf, kernel: &SmoothingKernel) -> Vec<C64> {
    let pt = psi_tilde(e);
    e.grid()
        .points()
        .zip(e.theta())
        .zip(&pt)
        .map(|((t, th), p)| th * p * kernel.ft(t))
        .collect()
}

/// `ûv₁ = 𝓕₊⁻¹[θ̂·ψ̃·𝓕₊[K_b]]` on the conjugate grid of the ECF grid padded
/// to `pad` points. The real part is returned; a relative imaginary residual
/// above 1e-8 is reported.
pub fn estimate_uv1(e: &Ecf, kernel: &SmoothingKernel, pad: usize) -> Result<Checked<GridFn>> {
    if e.grid().hi() < kernel.band() * (1.0 - 1e-12) {
        return Err(Error::config(
            "ECF grid does not cover the kernel band [−1/b, 1/b]",
        ));
    }
    let phi = smoothed_ratio(e, kernel);
    let (xg, vals) = lattice_transform(&phi, e.grid().lo(), e.grid().step(), pad, Sign::Minus)?;
    let scale = 1.0 / (2.0 * PI);
    let max_re = vals.iter().fold(0.0f64, |m, v| m.max(v.re.abs()));
    let max_im = vals.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    let mut warnings = Vec::new();
    if max_re > 0.0 && max_im > 1e-8 * max_re {
        warnings.push(Warning::ImaginaryResidual {
            relative: max_im / max_re,
        });
    }
    let out = GridFn::new(
        xg,
        vals.iter().map(|v| C64::new(v.re * scale, 0.0)).collect(),
    )?;
    Ok(Checked::new(out, warnings))
}

/// `ûv₀ = 𝒢ₙ⁻¹ ûv₁`.
pub fn estimate_uv0(
    uv1_hat: &GridFn,
    f: &KernelFn,
    a_n: f64,
    log_grid: &Grid,
) -> Result<Checked<GridFn>> {
    apply_g_inv_n(uv1_hat, f, a_n, log_grid)
}

/// `∫ a·conj(b) dx` for functions on the same log grid.
pub(crate) fn inner_dx(a: &LogGridFn, b: &LogGridFn) -> Result<C64> {
    if !a.grid().aligned_with(b.grid()) {
        return Err(Error::Shape("inner product of misaligned log grids"));
    }
    let g = a.grid();
    let mut acc = C64::new(0.0, 0.0);
    for (i, s) in g.points().enumerate() {
        let x = s.exp();
        acc += (a.pos()[i] * b.pos()[i].conj() + a.neg()[i] * b.neg()[i].conj()) * x;
    }
    Ok(acc * g.step())
}

/// Grids for the two-route functional.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalConfig {
    pub a_n: f64,
    pub b_n: f64,
    /// Symmetric ECF grid; the kernel band is clipped to it.
    pub t_grid: Grid,
    /// Padding of the inverse transform producing `ûv₁`.
    pub pad: usize,
    pub log_grid: Grid,
}

impl FunctionalConfig {
    /// ECF step `2π/512` up to `t_max`, `ûv₁` on `|x| < 256` at step 1/128,
    /// log grid `[−12, 12)` with 2¹⁴ points.
    pub fn with_defaults(a_n: f64, b_n: f64, t_max: f64) -> Result<Self> {
        let dt = 2.0 * PI / 512.0;
        let half = (t_max / dt).ceil() as usize;
        Ok(FunctionalConfig {
            a_n,
            b_n,
            t_grid: Grid::symmetric(half as f64 * dt, half)?,
            pad: 1 << 16,
            log_grid: LogGridFn::default_grid(),
        })
    }
}

/// Both evaluations of `L̂_W v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalValue {
    /// `⟨v, 𝒢ₙ⁻¹ ûv₁⟩`.
    pub direct: f64,
    /// `⟨𝒢ₙ⁻¹*v, ûv₁⟩`.
    pub adjoint: f64,
}

/// `L̂_W v = ⟨v, 𝒢ₙ⁻¹ ûv₁⟩` computed on the log grid, checked against the
/// adjoint route `⟨𝒢ₙ⁻¹*v, ûv₁⟩`. Disagreement beyond [`INTEGRITY_TOL`]
/// (relative to the larger magnitude, with an absolute floor of 1e-12 times
/// the norms) is an error.
pub fn functional(
    v: &TestFunction,
    ys: &[f64],
    f: &KernelFn,
    cfg: &FunctionalConfig,
) -> Result<Checked<FunctionalValue>> {
    let mut warnings = Vec::new();
    let e = ecf(ys, &cfg.t_grid)?;
    let b_eff = cfg.b_n.max(1.0 / e.grid().hi());
    if b_eff > cfg.b_n {
        warnings.push(Warning::Truncation {
            fraction: 1.0 - cfg.b_n / b_eff,
        });
    }
    let kernel = SmoothingKernel::sinc(b_eff)?;
    let uv1 = estimate_uv1(&e, &kernel, cfg.pad)?.drain_into(&mut warnings);
    let uv1_log = to_log_grid(&uv1, &cfg.log_grid).drain_into(&mut warnings);
    let v_log = LogGridFn::sample_real(cfg.log_grid, |x| v.eval(x))?;
    let uv0_log = apply_g_inv_n_log(&uv1_log, f, cfg.a_n)?.drain_into(&mut warnings);
    let w_log = apply_g_inv_adjoint_n_log(&v_log, f, cfg.a_n)?.drain_into(&mut warnings);
    let direct = inner_dx(&v_log, &uv0_log)?.re;
    let adjoint = inner_dx(&w_log, &uv1_log)?.re;
    check_integrity(direct, adjoint, v_log.l2_norm() * uv1_log.l2_norm())?;
    Ok(Checked::new(FunctionalValue { direct, adjoint }, warnings))
}

fn check_integrity(direct: f64, adjoint: f64, scale: f64) -> Result<()> {
    let tol = INTEGRITY_TOL * direct.abs().max(adjoint.abs()).max(1e-12 * scale);
    if (direct - adjoint).abs() > tol || !direct.is_finite() {
        return Err(Error::Integrity { direct, adjoint });
    }
    Ok(())
}

/// Settings for [`SpectralPlan`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig {
    pub log_grid: Grid,
    /// Frequency step; the implied alias period `2π/dt` must exceed the
    /// spread of the data plus the support of `𝒢ₙ⁻¹*v`.
    pub dt: f64,
    /// Largest frequency considered before trimming.
    pub t_max: f64,
    /// The band is cut where the energy of `W` beyond it falls below this
    /// fraction of the total.
    pub tail_energy: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            log_grid: LogGridFn::default_grid(),
            dt: 2.0 * PI / 512.0,
            t_max: 64.0,
            tail_energy: 1e-9,
        }
    }
}

/// Precomputed `W = 𝓕₊[𝒢ₙ⁻¹*v]` on the effective band, so that
/// `L̂_W v = Re (2π)⁻¹ ∫ W·conj(θ̂ψ̃𝓕₊[K_b]) dt` costs one ECF per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPlan {
    /// Symmetric frequency grid of the effective band, `None` when `W ≡ 0`.
    t_grid: Option<Grid>,
    w: Vec<C64>,
    kernel: SmoothingKernel,
    a_n: f64,
    /// `𝒢ₙ⁻¹*v` on the log grid.
    preimage: LogGridFn,
}

/// `∫ e^{itx} w(x) dx` for `t = k·dt`, `k = −half..=half`, with `w` given on
/// a log grid.
pub(crate) fn ft_from_log(w: &LogGridFn, dt: f64, half: usize) -> Vec<C64> {
    let g = w.grid();
    let floor = 1e-18 * w.max_abs();
    let mut plus = alloc::vec![C64::new(0.0, 0.0); half + 1];
    let mut minus = plus.clone();
    let mut zs = alloc::vec![C64::new(0.0, 0.0); half + 1];
    for (i, s) in g.points().enumerate() {
        let (p, q) = (w.pos()[i], w.neg()[i]);
        if p.norm() <= floor && q.norm() <= floor {
            continue;
        }
        let x = s.exp();
        let wt = x * g.step();
        zs.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        accumulate_phases(x, dt, C64::new(1.0, 0.0), &mut zs);
        for k in 0..=half {
            let z = zs[k];
            plus[k] += (p * z + q * z.conj()) * wt;
            minus[k] += (p * z.conj() + q * z) * wt;
        }
    }
    let mut out = Vec::with_capacity(2 * half + 1);
    out.extend(minus[1..].iter().rev());
    out.extend(plus.iter());
    out
}

impl SpectralPlan {
    pub fn new(
        v: &TestFunction,
        f: &KernelFn,
        a_n: f64,
        kernel: SmoothingKernel,
        cfg: &SpectralConfig,
    ) -> Result<Checked<Self>> {
        let mut warnings = Vec::new();
        let v_log = LogGridFn::sample_real(cfg.log_grid, |x| v.eval(x))?;
        let preimage = apply_g_inv_adjoint_n_log(&v_log, f, a_n)?.drain_into(&mut warnings);
        Self::from_preimage(preimage, kernel, a_n, cfg, warnings)
    }

    /// Uses the exact `𝒢⁻¹*v` of `v` instead of the regularized inverse.
    pub fn from_closed_form(
        v: &TestFunction,
        kernel: SmoothingKernel,
        cfg: &SpectralConfig,
    ) -> Result<Checked<Self>> {
        if !v.has_inverse_adjoint() {
            return Err(Error::config("test function has no closed-form preimage"));
        }
        let preimage =
            LogGridFn::sample_real(cfg.log_grid, |x| v.inverse_adjoint(x).unwrap_or(0.0))?;
        Self::from_preimage(preimage, kernel, 0.0, cfg, Vec::new())
    }

    fn from_preimage(
        preimage: LogGridFn,
        kernel: SmoothingKernel,
        a_n: f64,
        cfg: &SpectralConfig,
        mut warnings: Vec<Warning>,
    ) -> Result<Checked<Self>> {
        if !(cfg.dt > 0.0 && cfg.t_max > cfg.dt) {
            return Err(Error::config("spectral grid needs 0 < dt < t_max"));
        }
        let band = kernel.band().min(cfg.t_max);
        let half = (band / cfg.dt).floor() as usize;
        let w_full = ft_from_log(&preimage, cfg.dt, half);
        let max = w_full.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let mut plan = SpectralPlan {
            t_grid: None,
            w: Vec::new(),
            kernel,
            a_n,
            preimage,
        };
        if max == 0.0 {
            return Ok(Checked::new(plan, warnings));
        }
        let total: f64 = w_full.iter().map(|z| z.norm_sqr()).sum();
        let mut tail = 0.0;
        let mut keep = half;
        while keep > 0 {
            let next = tail + w_full[half + keep].norm_sqr() + w_full[half - keep].norm_sqr();
            if next > cfg.tail_energy * total {
                break;
            }
            tail = next;
            keep -= 1;
        }
        if keep == half && kernel.band() > cfg.t_max {
            let edge = w_full[0].norm().max(w_full[2 * half].norm());
            warnings.push(Warning::InsufficientDecay {
                lo: edge,
                hi: edge,
                max,
            });
        }
        let keep = keep.max(1);
        plan.t_grid = Some(Grid::symmetric(keep as f64 * cfg.dt, keep)?);
        plan.w = w_full[half - keep..=half + keep].to_vec();
        Ok(Checked::new(plan, warnings))
    }

    pub fn t_grid(&self) -> Option<&Grid> {
        self.t_grid.as_ref()
    }

    /// `𝓕₊[𝒢ₙ⁻¹*v]` on [`Self::t_grid`].
    pub fn w(&self) -> &[C64] {
        &self.w
    }

    pub fn kernel(&self) -> &SmoothingKernel {
        &self.kernel
    }

    pub fn a_n(&self) -> f64 {
        self.a_n
    }

    pub fn preimage(&self) -> &LogGridFn {
        &self.preimage
    }

    /// Half-width of the effective band.
    pub fn band(&self) -> f64 {
        self.t_grid.map_or(0.0, |g| g.hi())
    }

    pub fn ecf(&self, ys: &[f64]) -> Result<Option<Ecf>> {
        match &self.t_grid {
            Some(g) => ecf(ys, g).map(Some),
            None if ys.is_empty() => Err(Error::EmptySample),
            None => Ok(None),
        }
    }

    pub fn estimate_from_ecf(&self, e: &Ecf) -> Result<f64> {
        let g = self
            .t_grid
            .as_ref()
            .ok_or(Error::Shape("plan has an empty band"))?;
        if !e.grid().aligned_with(g) {
            return Err(Error::Shape("ECF grid differs from the plan's band grid"));
        }
        let phi = smoothed_ratio(e, &self.kernel);
        let s: C64 = self.w.iter().zip(&phi).map(|(w, p)| w * p.conj()).sum();
        Ok(s.re * g.step() / (2.0 * PI))
    }

    /// `L̂_W v` for the sample `ys`.
    pub fn estimate(&self, ys: &[f64]) -> Result<f64> {
        match self.ecf(ys)? {
            Some(e) => self.estimate_from_ecf(&e),
            None => Ok(0.0),
        }
    }
}

/// `𝓛v = ∫ v·uv₀` by adaptive quadrature to absolute error 1e-8.
pub fn true_functional(v: &TestFunction, model: &LevyModel) -> Result<f64> {
    let (lo, hi) = model.support();
    let mut breaks: Vec<f64> = match model.kind() {
        LevyKind::Gamma { b } => [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|x| x / b)
            .collect(),
        LevyKind::Tabulated { .. } => (0..=16).map(|i| lo + (hi - lo) * i as f64 / 16.0).collect(),
    };
    breaks.retain(|x| *x >= lo && *x < hi);
    breaks.push(hi);
    let tol = 1e-8 / breaks.len() as f64;
    let (mut total, mut err) = (0.0, 0.0);
    for w in breaks.windows(2) {
        let (val, e) = quad::adaptive(|x| v.eval(x) * model.uv0(x), w[0], w[1], tol);
        total += val;
        err += e;
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("true functional"));
    }
    if err > 1e-8 {
        return Err(Error::Precision {
            what: "true functional",
            tail_bound: err,
        });
    }
    Ok(total)
}

/// `err_W(v) = √n (L̂_W v − 𝓛v)`.
pub fn err_w(l_hat: f64, l_true: f64, n: usize) -> f64 {
    (n as f64).sqrt() * (l_hat - l_true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_test_function_gives_zero() {
        let f = KernelFn::exp_window(1.0, 1.0).unwrap();
        let k = SmoothingKernel::sinc(0.01).unwrap();
        let p = SpectralPlan::new(
            &TestFunction::zero(),
            &f,
            1e-3,
            k,
            &SpectralConfig::default(),
        )
        .unwrap()
        .value;
        assert!(p.t_grid().is_none());
        assert_eq!(p.estimate(&[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn err_scaling() {
        assert_eq!(err_w(1.5, 1.5, 100), 0.0);
        assert!((err_w(1.25, 1.0, 100) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn true_functional_matches_closed_form() {
        // ∫₀^∞ x e^{−x²/2} e^{−x} dx = 1 − √(π/2)·e^{1/2}·erfc(1/√2)
        let f = KernelFn::unit_cube(1).unwrap();
        let v = TestFunction::gaussian_moment(1, 1.0, &f);
        let m = LevyModel::gamma(1.0).unwrap();
        let exact = 1.0 - (PI / 2.0).sqrt() * 0.5f64.exp() * libm::erfc(1.0 / 2.0f64.sqrt());
        assert!((true_functional(&v, &m).unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn uv1_needs_band_coverage() {
        let g = Grid::symmetric(2.0, 20).unwrap();
        let e = ecf(&[1.0], &g).unwrap();
        assert!(estimate_uv1(&e, &SmoothingKernel::sinc(0.1).unwrap(), 64).is_err());
        let zero = ecf(&[0.0, 0.0], &g).unwrap();
        let u = estimate_uv1(&zero, &SmoothingKernel::sinc(0.5).unwrap(), 64)
            .unwrap()
            .value;
        assert_eq!(u.max_abs(), 0.0);
    }
}
