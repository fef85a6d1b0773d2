use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quad::{self, Rule};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum LevyKind {
    /// `v₀(x) = x⁻¹ e^{−bx}` on `(0, ∞)`.
    Gamma { b: f64 },
    /// Non-negative values on a grid, linearly interpolated; zero is not
    /// assumed outside the grid, queries there fail.
    Tabulated { grid: Grid, values: Vec<f64> },
}

/// A purely non-Gaussian Lévy basis with triplet `(a₀, 0, v₀)`.
///
/// `a0` is the drift in the Lévy–Khintchine form truncated at `|x| ≤ 1`;
/// `tau` is the moment exponent the model is declared to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    kind: LevyKind,
    a0: f64,
    tau: f64,
}

impl LevyModel {
    pub fn gamma(b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::config("Gamma rate b must be positive and finite"));
        }
        Ok(LevyModel {
            kind: LevyKind::Gamma { b },
            a0: (1.0 - (-b).exp()) / b,
            tau: 1.0,
        })
    }

    pub fn tabulated(grid: Grid, values: Vec<f64>, a0: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(
                "tabulated Lévy density length differs from its grid",
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::config(
                "tabulated Lévy density must be finite and non-negative",
            ));
        }
        let m = LevyModel {
            kind: LevyKind::Tabulated { grid, values },
            a0,
            tau: 0.0,
        };
        let mass: f64 = m
            .rule()
            .integrate(|x| x.powi(2).min(1.0) * m.v0_unchecked(x));
        if !mass.is_finite() {
            return Err(Error::NonFinite("∫min{1, x²}v₀"));
        }
        Ok(m)
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::config("moment exponent τ must be non-negative"));
        }
        self.tau = tau;
        Ok(self)
    }

    pub fn kind(&self) -> &LevyKind {
        &self.kind
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Rate `b` of a Gamma model.
    pub fn gamma_rate(&self) -> Option<f64> {
        match self.kind {
            LevyKind::Gamma { b } => Some(b),
            LevyKind::Tabulated { .. } => None,
        }
    }

    pub fn eval_v0(&self, x: f64) -> Result<f64> {
        match &self.kind {
            LevyKind::Gamma { b } => Ok(if x > 0.0 { (-b * x).exp() / x } else { 0.0 }),
            LevyKind::Tabulated { grid, .. } => {
                if !grid.contains(x) {
                    return Err(Error::OutOfDomain {
                        what: "tabulated v₀",
                        value: x,
                    });
                }
                Ok(self.v0_unchecked(x))
            }
        }
    }

    /// `v₀(x)`, with zero outside a tabulated grid. Used where the integration
    /// range is the model's support anyway.
    pub(crate) fn v0_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            LevyKind::Gamma { b } => {
                if x > 0.0 {
                    (-b * x).exp() / x
                } else {
                    0.0
                }
            }
            LevyKind::Tabulated { grid, values } => {
                if !grid.contains(x) {
                    return 0.0;
                }
                let u = ((x - grid.lo()) / grid.step()).clamp(0.0, (grid.len() - 1) as f64);
                let i = (u.floor() as usize).min(grid.len() - 2);
                let r = u - i as f64;
                values[i] * (1.0 - r) + values[i + 1] * r
            }
        }
    }

    /// `x·v₀(x)`; for Gamma the removable singularity at `0⁺` is filled in.
    pub fn uv0(&self, x: f64) -> f64 {
        match &self.kind {
            LevyKind::Gamma { b } => {
                if x > 0.0 {
                    (-b * x).exp()
                } else {
                    0.0
                }
            }
            LevyKind::Tabulated { .. } => x * self.v0_unchecked(x),
        }
    }

    /// Interval outside which `v₀` vanishes or is negligible (`e^{−50}` for
    /// Gamma with the default factor).
    pub fn support(&self) -> (f64, f64) {
        self.support_with(50.0)
    }

    pub(crate) fn support_with(&self, gamma_tail: f64) -> (f64, f64) {
        match &self.kind {
            LevyKind::Gamma { b } => (0.0, gamma_tail / b),
            LevyKind::Tabulated { grid, .. } => (grid.lo(), grid.hi()),
        }
    }

    /// `𝓕₊[uv₀](x) = ∫ e^{ixy} y v₀(y) dy`.
    pub fn uv0_ft(&self, x: f64) -> C64 {
        match &self.kind {
            LevyKind::Gamma { b } => C64::new(*b, -x).inv(),
            LevyKind::Tabulated { .. } => {
                let mut acc = C64::new(0.0, 0.0);
                for (y, w) in self.rule().iter() {
                    acc += C64::new(0.0, x * y).exp() * (w * self.uv0(y));
                }
                acc
            }
        }
    }

    /// Lévy exponent `ϕ₀(t) = ∫(e^{ity} − 1) v₀(y) dy`.
    pub fn exponent(&self, t: f64) -> C64 {
        match &self.kind {
            LevyKind::Gamma { b } => -C64::new(1.0, -t / b).ln(),
            LevyKind::Tabulated { .. } => {
                let mut acc = C64::new(0.0, 0.0);
                for (y, w) in self.rule().iter() {
                    // (e^{ity} − 1)/y stays bounded near the origin
                    let e = if (t * y).abs() < 1e-8 {
                        C64::new(0.0, t)
                    } else {
                        (C64::new(0.0, t * y).exp() - 1.0) / y
                    };
                    acc += e * (w * self.uv0(y));
                }
                acc
            }
        }
    }

    /// `∫|x|^p |uv₀(x)| dx`.
    pub fn abs_moment_uv0(&self, p: f64) -> f64 {
        match &self.kind {
            LevyKind::Gamma { b } => libm::tgamma(p + 1.0) / b.powf(p + 1.0),
            LevyKind::Tabulated { .. } => self
                .rule()
                .integrate(|x| x.abs().powf(p) * self.uv0(x).abs()),
        }
    }

    /// Quadrature rule over the tabulated support: four Gauss points per
    /// grid cell, so piecewise-linear integrands are integrated exactly.
    fn rule(&self) -> Rule {
        match &self.kind {
            LevyKind::Tabulated { grid, .. } => {
                quad::composite(grid.lo(), grid.hi(), grid.len() - 1, 4)
            }
            LevyKind::Gamma { b } => quad::composite(0.0, 50.0 / b, 400, 16),
        }
    }
}
