//! Core objects built from a [`Config`].

use std::f64::consts::PI;

use anyhow::{bail, Context, Result};
use levyma_core::estimator::{
    BandwidthSchedule, InfluencePlan, SmoothingKernel, SpectralConfig, SpectralPlan, TestFunction,
};
use levyma_core::field::{m_bound, simulate_field, FieldSample};
use levyma_core::grid::{Grid, LogGridFn};
use levyma_core::levy::{KernelFn, LevyModel};
use levyma_core::xform::CutoffSchedule;
use levyma_core::Warning;
use serde::Serialize;

use crate::config::{Config, TestFnConfig};

#[derive(Debug, Clone)]
pub struct Scenario {
    pub model: LevyModel,
    pub kernel: KernelFn,
    pub delta: f64,
    pub h: f64,
    pub drift: f64,
    pub m: usize,
    pub bandwidth: BandwidthSchedule,
    pub cutoff: CutoffSchedule,
    pub spectral: SpectralConfig,
    pub eps: f64,
    pub beta1: f64,
    pub test_fns: Vec<TestFunction>,
}

/// `(a_n, b_n)` and the effective band actually used at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tuning {
    pub n: usize,
    pub a_n: f64,
    pub b_n: f64,
    pub band: f64,
}

pub fn build_model(cfg: &Config) -> Result<LevyModel> {
    let l = &cfg.levy;
    let m = match l.kind.as_str() {
        "gamma" => LevyModel::gamma(l.b.unwrap_or(1.0))?,
        "tabulated" => {
            let path = l.path.as_ref().context("[levy] key `path`")?;
            #[derive(serde::Deserialize)]
            struct Row {
                x: f64,
                v0: f64,
            }
            let rows: Vec<Row> = crate::io::read_csv(path)?;
            if rows.len() < 2 {
                bail!("[levy] `path`: tabulated density needs at least two rows");
            }
            let grid = Grid::new(rows[0].x, rows[rows.len() - 1].x, rows.len())?;
            LevyModel::tabulated(
                grid,
                rows.iter().map(|r| r.v0).collect(),
                l.a0.unwrap_or(0.0),
            )?
        }
        other => bail!("[levy] key `kind`: unknown Lévy model {other:?}"),
    };
    Ok(match l.tau {
        Some(t) => m.with_tau(t)?,
        None => m,
    })
}

pub fn build_kernel(cfg: &Config) -> Result<KernelFn> {
    let k = &cfg.kernel;
    Ok(match k.kind.as_str() {
        "exp_window" => KernelFn::exp_window(k.lambda.unwrap_or(1.0), k.theta.unwrap_or(1.0))?,
        "indicator_cube" => KernelFn::indicator_cube(k.sides.clone().unwrap_or_else(|| vec![1.0]))?,
        other => bail!("[kernel] key `kind`: unknown kernel {other:?}"),
    })
}

pub fn build_test_fn(tf: &TestFnConfig, f: &KernelFn) -> TestFunction {
    let mut v = match tf.kind.as_str() {
        "zero" => TestFunction::zero(),
        "reciprocal_tail" => TestFunction::reciprocal_tail(tf.t),
        _ => TestFunction::gaussian_moment(tf.k, tf.sigma, f),
    };
    if tf.scale != 1.0 {
        v = v.scaled(tf.scale);
    }
    let (xi, beta2) = (tf.xi.unwrap_or(v.xi), tf.beta2.unwrap_or(v.beta2));
    v.with_index(xi, beta2)
}

impl Scenario {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let model = build_model(cfg)?;
        let kernel = build_kernel(cfg)?;
        let e = &cfg.estimator;
        let spectral = SpectralConfig {
            log_grid: LogGridFn::default_grid(),
            dt: 2.0 * PI / 512.0,
            t_max: e.t_max,
            tail_energy: e.tail_energy,
        };
        Ok(Scenario {
            m: m_bound(&kernel, cfg.sim.delta)?,
            test_fns: e
                .test_functions
                .iter()
                .map(|s| build_test_fn(s, &kernel))
                .collect(),
            model,
            kernel,
            delta: cfg.sim.delta,
            h: cfg.sim.h,
            drift: cfg.sim.drift,
            bandwidth: BandwidthSchedule::new(e.bandwidth_c, e.eps, e.eta)?,
            cutoff: CutoffSchedule::new(e.cutoff_c, e.cutoff_exponent)?.with_floor(e.cutoff_floor),
            spectral,
            eps: e.eps,
            beta1: e.beta1,
        })
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// Window side `L` with `L^d = n`.
    pub fn side(&self, n: usize) -> Result<usize> {
        if n == 0 {
            bail!("sample size n must be positive");
        }
        let d = self.dim() as u32;
        let l = (n as f64).powf(1.0 / d as f64).round() as usize;
        if l.pow(d) != n {
            bail!("sample size n = {n} is not a perfect power {d} (window is a cube)");
        }
        Ok(l)
    }

    pub fn simulate(&self, n: usize, seed: u64, drift: f64) -> Result<FieldSample> {
        Ok(simulate_field(
            &self.model,
            &self.kernel,
            self.delta,
            self.side(n)?,
            self.h,
            seed,
            drift,
        )?)
    }

    pub fn a_n(&self, n: usize) -> f64 {
        self.cutoff.a_n(n)
    }

    pub fn b_n(&self, n: usize) -> f64 {
        self.bandwidth.b_n(n)
    }

    /// Spectral plan for `v` at sample size `n`.
    pub fn plan(
        &self,
        v: &TestFunction,
        n: usize,
        warnings: &mut Vec<Warning>,
    ) -> Result<(SpectralPlan, Tuning)> {
        let (a_n, b_n) = (self.a_n(n), self.b_n(n));
        let plan = SpectralPlan::new(
            v,
            &self.kernel,
            a_n,
            SmoothingKernel::sinc(b_n)?,
            &self.spectral,
        )?
        .drain_into(warnings);
        let band = plan.band();
        Ok((plan, Tuning { n, a_n, b_n, band }))
    }

    /// Evaluation grid for influence functions: covers the drift-shifted
    /// support of `Y₀` out to 40 standard deviations.
    pub fn y_grid(&self, drifts: &[f64]) -> Result<Grid> {
        let b = self
            .model
            .gamma_rate()
            .context("influence functions need a Gamma model")?;
        let (lo_f, hi_f) = self
            .kernel
            .quad()
            .iter()
            .fold((0.0f64, 0.0f64), |(lo, hi), &(v, _)| (lo.min(v), hi.max(v)));
        let mass: f64 = self.kernel.quad().iter().map(|(v, w)| v.abs() * w).sum();
        let l2: f64 = self.kernel.quad().iter().map(|(v, w)| v * v * w).sum();
        let spread = mass / b + 40.0 * l2.sqrt() / b;
        let (dmin, dmax) = drifts
            .iter()
            .fold((0.0f64, 0.0f64), |(a, c), d| (a.min(*d), c.max(*d)));
        let lo = dmin - 1.0 - if lo_f < 0.0 { spread } else { 0.0 };
        let hi = dmax + 1.0 + if hi_f > 0.0 { spread } else { 0.0 };
        let pts = ((hi - lo) / 0.01).ceil() as usize + 1;
        Ok(Grid::new(lo, hi, pts)?)
    }

    pub fn influence(
        &self,
        plan: &SpectralPlan,
        drift: f64,
        y_grid: &Grid,
        warnings: &mut Vec<Warning>,
    ) -> Result<InfluencePlan> {
        Ok(
            InfluencePlan::new(plan, &self.model, &self.kernel, drift, y_grid)?
                .drain_into(warnings),
        )
    }
}

/// Warnings rendered for JSON output, deduplicated by kind and counted.
pub fn summarize_warnings(ws: &[Warning]) -> Vec<String> {
    let mut out: Vec<(String, usize)> = Vec::new();
    for w in ws {
        let key = format!("{w:?}")
            .split([' ', '{', '('])
            .next()
            .unwrap_or("")
            .to_string();
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, c)) => *c += 1,
            None => out.push((key, 1)),
        }
    }
    out.into_iter().map(|(k, c)| format!("{k} x{c}")).collect()
}
