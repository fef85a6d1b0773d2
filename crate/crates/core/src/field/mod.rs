//! Gamma-driven moving-average fields on lattices, observation windows and
//! m-dependence accounting.

mod dependence;
mod sim;
mod window;

pub use dependence::{autocovariance, dependence_diagnostic, DependenceReport, LagRow};
pub use sim::{simulate_field, simulate_gamma_basis, FieldSample, Stencil};
pub(crate) use window::for_each_index;
pub use window::{
    boundary, m_bound, regular_growth_report, vh_blocks, GrowthReport, GrowthRow, RealBox, Window,
    WindowSequence,
};
