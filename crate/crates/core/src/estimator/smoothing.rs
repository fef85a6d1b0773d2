use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Band-limited smoothing kernel `K_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothingKernel {
    /// `K_b(x) = sin(x/b)/(πx)`, whose transform is the indicator of
    /// `[−1/b, 1/b]`.
    Sinc { b: f64 },
}

impl SmoothingKernel {
    pub fn sinc(b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::config("bandwidth b must be positive"));
        }
        Ok(SmoothingKernel::Sinc { b })
    }

    pub fn bandwidth(&self) -> f64 {
        match self {
            SmoothingKernel::Sinc { b } => *b,
        }
    }

    /// Half-width of the support of `𝓕₊[K_b]`.
    pub fn band(&self) -> f64 {
        1.0 / self.bandwidth()
    }

    /// `𝓕₊[K_b](x)`.
    pub fn ft(&self, x: f64) -> f64 {
        match self {
            SmoothingKernel::Sinc { b } => {
                if x.abs() * b <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SmoothingKernel::Sinc { b } => {
                if x == 0.0 {
                    1.0 / (PI * b)
                } else {
                    (x / b).sin() / (PI * x)
                }
            }
        }
    }
}

/// `b_n = C·n^{−1/(1−2ε)}·(log n)^{η + 1/(1−2ε)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthSchedule {
    pub c: f64,
    pub eps: f64,
    pub eta: f64,
}

impl BandwidthSchedule {
    pub fn new(c: f64, eps: f64, eta: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::config("bandwidth constant must be positive"));
        }
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::config("ε must lie in (0, 1/2)"));
        }
        if !eta.is_finite() {
            return Err(Error::NonFinite("η"));
        }
        Ok(BandwidthSchedule { c, eps, eta })
    }

    pub fn b_n(&self, n: usize) -> f64 {
        let n = n.max(2) as f64;
        let p = 1.0 / (1.0 - 2.0 * self.eps);
        self.c * n.powf(-p) * n.ln().powf(self.eta + p)
    }
}
