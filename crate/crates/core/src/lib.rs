//! Estimation of linear functionals of the Lévy density of infinitely
//! divisible moving-average random fields.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the whole numerical
//! pipeline:
//!
//! - [`levy`]: parametric Lévy densities, kernel functions and the
//!   population-level forward maps `v₀ ↦ v₁, ψ, θ, m_{f,±}, μ_f`;
//! - [`xform`]: the Fourier transform `𝓕₊`, the multiplicative-group
//!   transform `𝓕_×`, the isometry `𝓜` and the operators `𝒢`, `𝒢ₙ⁻¹`, `𝒢ₙ⁻¹*`;
//! - [`field`]: simulation of Gamma-driven moving-average fields, lattice
//!   windows and m-dependence accounting;
//! - [`estimator`]: empirical characteristic functions, the smoothed `uv₁`
//!   estimator, the plug-in functional `L̂_W`, influence functions and the
//!   asymptotic variance.
//!
//! IO, configuration and Monte Carlo orchestration live in the `levyma` crate.

#![no_std]
#![allow(clippy::needless_range_loop)]
// `!(x <= tol)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// grids always hold at least one point
#![allow(clippy::len_without_is_empty)]

extern crate alloc;

pub mod diag;
pub mod error;
pub mod estimator;
pub mod fft;
pub mod field;
pub mod grid;
pub mod levy;
pub mod quad;
pub mod xform;

pub use diag::{Checked, Warning};
pub use error::{Error, Result};
pub use grid::{Grid, GridFn, LogGridFn};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
