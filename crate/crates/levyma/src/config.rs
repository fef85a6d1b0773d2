//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [levy]
//! kind = "gamma"
//! b = 1.0
//!
//! [kernel]
//! kind = "exp_window"
//! lambda = 1.0
//! theta = 1.0
//! ```
//!
//! Every section other than `[levy]` and `[kernel]` has defaults. Unknown keys
//! are rejected, and semantic errors name the offending key.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub levy: LevySection,
    pub kernel: KernelSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevySection {
    pub kind: String,
    /// Gamma rate.
    pub b: Option<f64>,
    /// Declared moment exponent `τ`.
    pub tau: Option<f64>,
    /// Tabulated `v₀`: CSV with columns `x, v0`.
    pub path: Option<PathBuf>,
    pub a0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub kind: String,
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
    /// Side lengths of an indicator box; its length is the dimension.
    pub sides: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    /// Lattice mesh `Δ`.
    pub delta: f64,
    /// Cell size of the discretized basis; must divide `Δ`.
    pub h: f64,
    /// Known drift `γ` added to every observation.
    pub drift: f64,
    /// Number of observations `n = side^d` for single runs.
    pub n: usize,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            delta: 1.0,
            h: 1.0,
            drift: 0.0,
            n: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    /// `b_n = C n^{−1/(1−2ε)} (log n)^{η + 1/(1−2ε)}`.
    #[serde(rename = "bandwidth_C")]
    pub bandwidth_c: f64,
    pub eps: f64,
    pub eta: f64,
    /// `a_n = max(C n^{−p}, floor)`.
    #[serde(rename = "cutoff_C")]
    pub cutoff_c: f64,
    pub cutoff_exponent: f64,
    pub cutoff_floor: f64,
    /// Largest frequency of the spectral plan.
    pub t_max: f64,
    /// Relative tail energy at which the band is trimmed.
    pub tail_energy: f64,
    /// `β₁` of `(U_β)` used by the admissibility check.
    pub beta1: f64,
    pub test_functions: Vec<TestFnConfig>,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        EstimatorSection {
            bandwidth_c: 1.0,
            eps: 0.1,
            eta: 0.0,
            cutoff_c: 1e-3,
            cutoff_exponent: 0.0,
            cutoff_floor: 0.0,
            t_max: 64.0,
            tail_energy: 1e-9,
            beta1: 1.0,
            test_functions: vec![TestFnConfig::default()],
        }
    }
}

/// `kind` is one of `gauss_moment` (`𝒢⁻¹*v = x^k e^{−x²/(2σ²)}`), `zero`
/// or `reciprocal_tail` (`v = x⁻¹1{|x| > t}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestFnConfig {
    pub kind: String,
    pub k: i32,
    pub sigma: f64,
    pub t: f64,
    pub scale: f64,
    pub xi: Option<f64>,
    pub beta2: Option<f64>,
}

impl Default for TestFnConfig {
    fn default() -> Self {
        TestFnConfig {
            kind: "gauss_moment".into(),
            k: 1,
            sigma: 1.0,
            t: 1.0,
            scale: 1.0,
            xi: None,
            beta2: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    /// Sample sizes, strictly increasing.
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Drifts compared in paired CLT runs; the first is the reference.
    pub gammas: Vec<f64>,
    /// Number and side of the patches used for the model-based variance.
    pub patches: u64,
    pub patch_side: usize,
    /// Admissible window for the consistency slope.
    pub slope_window: [f64; 2],
    pub ks_p_min: f64,
    pub var_tol: f64,
    pub cov_tol: f64,
    pub drift_ks_max: f64,
    /// Frequency `t` of the bounded fields in the inequality checks.
    pub ineq_t: f64,
    /// Truncation level `K` of the truncated fields.
    pub ineq_k: f64,
    /// `x` values of the Bernstein check, in units of `B_V`.
    pub bernstein_x: Vec<f64>,
    /// `x` values of the exponential-inequality check, in units of `√n`.
    pub exp_tail_x: Vec<f64>,
    /// Frequency `u` and sample sizes of the moment-bound check.
    pub moment_u: f64,
    pub moment_sizes: Vec<usize>,
    pub moment_reps: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            sizes: vec![4096],
            reps: 200,
            seed: 1,
            gammas: vec![0.0],
            patches: 100_000,
            patch_side: 16,
            slope_window: [-0.65, -0.35],
            ks_p_min: 0.01,
            var_tol: 0.2,
            cov_tol: 0.25,
            drift_ks_max: 0.1,
            ineq_t: 1.0,
            ineq_k: 4.0,
            bernstein_x: vec![0.0, 0.5, 1.0, 2.0, 3.0, 4.0],
            exp_tail_x: vec![0.0, 1.0, 2.0, 4.0, 8.0],
            moment_u: 1.0,
            moment_sizes: vec![256, 1024, 4096],
            moment_reps: 200,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| anyhow!("malformed config: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Range and consistency checks that the type system does not cover.
    pub fn validate(&self) -> Result<()> {
        match self.levy.kind.as_str() {
            "gamma" => {
                let b = self.levy.b.ok_or_else(|| anyhow!("[levy] kind = \"gamma\" needs key `b`"))?;
                if !(b.is_finite() && b > 0.0) {
                    bail!("[levy] key `b` must be positive, got {b}");
                }
            }
            "tabulated" => {
                if self.levy.path.is_none() {
                    bail!("[levy] kind = \"tabulated\" needs key `path`");
                }
            }
            other => bail!("[levy] key `kind`: unknown Lévy model {other:?} (expected \"gamma\" or \"tabulated\")"),
        }
        match self.kernel.kind.as_str() {
            "exp_window" => {
                for (key, v) in [("lambda", self.kernel.lambda), ("theta", self.kernel.theta)] {
                    let v = v.ok_or_else(|| anyhow!("[kernel] kind = \"exp_window\" needs key `{key}`"))?;
                    if !(v.is_finite() && v > 0.0) {
                        bail!("[kernel] key `{key}` must be positive, got {v}");
                    }
                }
            }
            "indicator_cube" => {
                let s = self.kernel.sides.as_ref().ok_or_else(|| anyhow!("[kernel] kind = \"indicator_cube\" needs key `sides`"))?;
                if s.is_empty() || s.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    bail!("[kernel] key `sides` must be a non-empty list of positive lengths");
                }
            }
            other => bail!("[kernel] key `kind`: unknown kernel {other:?} (expected \"exp_window\" or \"indicator_cube\")"),
        }
        let s = &self.sim;
        if !(s.delta.is_finite() && s.delta > 0.0) {
            bail!("[sim] key `delta` must be positive");
        }
        if !(s.h.is_finite() && s.h > 0.0) {
            bail!("[sim] key `h` must be positive");
        }
        if s.n == 0 {
            bail!("[sim] key `n` must be positive");
        }
        if !s.drift.is_finite() {
            bail!("[sim] key `drift` must be finite");
        }
        let e = &self.estimator;
        if !(e.eps > 0.0 && e.eps < 0.5) {
            bail!("[estimator] key `eps` must lie in (0, 1/2), got {}", e.eps);
        }
        if !(e.bandwidth_c > 0.0 && e.cutoff_c > 0.0 && e.cutoff_exponent >= 0.0 && e.t_max > 0.0) {
            bail!("[estimator] keys `bandwidth_C`, `cutoff_C`, `t_max` must be positive and `cutoff_exponent` non-negative");
        }
        for (i, t) in e.test_functions.iter().enumerate() {
            if !matches!(t.kind.as_str(), "gauss_moment" | "zero" | "reciprocal_tail") {
                bail!(
                    "[[estimator.test_functions]] #{i} key `kind`: unknown test function {:?}",
                    t.kind
                );
            }
            if t.kind == "gauss_moment" && !(t.sigma > 0.0 && t.k >= 0) {
                bail!("[[estimator.test_functions]] #{i}: `sigma` must be positive and `k` non-negative");
            }
        }
        if e.test_functions.is_empty() {
            bail!("[estimator] key `test_functions` must not be empty");
        }
        let x = &self.experiment;
        if x.sizes.is_empty() || x.sizes.windows(2).any(|w| w[1] <= w[0]) || x.sizes[0] == 0 {
            bail!("[experiment] key `sizes` must be positive and strictly increasing");
        }
        if x.reps == 0 {
            bail!("[experiment] key `reps` must be positive");
        }
        if x.gammas.is_empty() {
            bail!("[experiment] key `gammas` must not be empty");
        }
        if x.patch_side == 0 {
            bail!("[experiment] key `patch_side` must be positive");
        }
        Ok(())
    }
}

/// Built-in scenarios, also shipped under `configs/`.
pub mod presets {
    pub const CONSISTENCY: &str = include_str!("../../../configs/consistency.toml");
    pub const CLT: &str = include_str!("../../../configs/clt.toml");
    pub const CLT_MULTI: &str = include_str!("../../../configs/clt_multi.toml");
    pub const INEQUALITIES: &str = include_str!("../../../configs/inequalities.toml");
}
