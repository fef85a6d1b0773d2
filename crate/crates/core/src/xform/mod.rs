//! Fourier analysis on `ℝ` and on the multiplicative group `ℝ^×`, and the
//! dilation operator `𝒢` with its regularized inverses.
//!
//! Convention: `𝓕₊g(x) = ∫ e^{itx} g(t) dt`, inverse with `1/(2π)`.

mod fourier;
mod mellin;
mod operator;
mod schedule;

pub use fourier::{
    fourier_plus, fourier_plus_inv, fourier_plus_inv_padded, fourier_plus_padded, lattice_transform,
};
pub use mellin::{
    from_log_grid, isometry_m, isometry_m_inv, isometry_m_log, isometry_m_log_inv, mellin_fx,
    mellin_fx_inv, to_log_grid,
};
pub use operator::{
    apply_g, apply_g_inv_adjoint_n, apply_g_inv_adjoint_n_log, apply_g_inv_n, apply_g_inv_n_log,
    apply_g_log, apply_g_spectral_log, cutoff_multiplier, symbol_on, Symbol,
};
pub use schedule::CutoffSchedule;
