//! Non-fatal numerical diagnostics attached to results.

use alloc::vec::Vec;

/// A condition worth reporting that does not invalidate the result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Input does not decay at the grid ends; periodic wrap-around may bias
    /// a lattice Fourier transform.
    InsufficientDecay { lo: f64, hi: f64, max: f64 },
    /// Fraction of L² mass dropped because it lies outside the target grid.
    Truncation { fraction: f64 },
    /// Spectral multiplier nodes zeroed by the cutoff although `a_n = 0`.
    VanishingSymbol { nodes: usize },
    /// A variance estimate came out negative and was clamped to zero.
    ClampedVariance { raw: f64 },
    /// Imaginary part left over after taking the real part of a result.
    ImaginaryResidual { relative: f64 },
    /// A truncated integral or trend test could not settle the question.
    Inconclusive { what: &'static str, value: f64 },
}

/// A value together with the warnings produced while computing it.
#[derive(Debug, Clone)]
pub struct Checked<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Checked<T> {
    pub fn clean(value: T) -> Self {
        Checked {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn new(value: T, warnings: Vec<Warning>) -> Self {
        Checked { value, warnings }
    }

    pub fn into_value(self) -> T {
        self.value
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Checked<U> {
        Checked {
            value: f(self.value),
            warnings: self.warnings,
        }
    }

    /// Moves the warnings into `sink` and returns the bare value.
    pub fn drain_into(self, sink: &mut Vec<Warning>) -> T {
        sink.extend(self.warnings);
        self.value
    }
}
