//! Lévy densities, kernel functions and the population-level forward maps.

mod conditions;
pub(crate) mod forward;
mod kernel;
mod model;

pub(crate) use conditions::ls_slope;
pub use conditions::{
    check_assumptions, check_u_beta, AssumptionConfig, AssumptionItem, AssumptionReport,
    UBetaReport, Verdict,
};
pub use forward::{
    compute_mu_f, compute_psi, compute_theta, compute_uv1_ft, compute_v1, psi_via_exponent, uv1,
    v1, PsiConfig,
};
pub use kernel::{KernelFn, KernelKind};
pub use model::{LevyKind, LevyModel};
