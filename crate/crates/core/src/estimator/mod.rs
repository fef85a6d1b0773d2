//! Empirical characteristic functions, the smoothed `uv₁` estimator, the
//! plug-in functional `L̂_W v`, influence functions and variance estimates.

mod admissible;
mod ecf;
mod functional;
mod influence;
mod smoothing;
mod test_fn;

pub use admissible::{check_admissible, AdmissibilityReport, AdmissibleConfig};
pub use ecf::{ecf, psi_tilde, Ecf};
pub use functional::{
    err_w, estimate_uv0, estimate_uv1, functional, true_functional, FunctionalConfig,
    FunctionalValue, SpectralConfig, SpectralPlan, INTEGRITY_TOL,
};
pub use influence::{
    accumulate_patches, sigma_model_mc, sigma_plugin, InfluencePlan, LagCovAccumulator, PatchConfig,
};
pub use smoothing::{BandwidthSchedule, SmoothingKernel};
pub use test_fn::{RealFn, TestFunction};
