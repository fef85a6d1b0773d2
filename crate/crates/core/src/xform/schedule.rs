/// Spectral cutoff `a_n = max(C·n^{−p}, floor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSchedule {
    pub c: f64,
    pub exponent: f64,
    pub floor: f64,
}

impl CutoffSchedule {
    pub fn new(c: f64, exponent: f64) -> crate::Result<Self> {
        if !(c.is_finite() && c > 0.0 && exponent.is_finite() && exponent >= 0.0) {
            return Err(crate::error::Error::config(
                "cutoff schedule needs C > 0 and exponent ≥ 0",
            ));
        }
        Ok(CutoffSchedule {
            c,
            exponent,
            floor: 0.0,
        })
    }

    /// A cutoff that does not shrink with `n`.
    pub fn constant(a: f64) -> crate::Result<Self> {
        Self::new(a, 0.0)
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor.max(0.0);
        self
    }

    pub fn a_n(&self, n: usize) -> f64 {
        (self.c * (n.max(1) as f64).powf(-self.exponent)).max(self.floor)
    }

    /// True when `a_n → 0`.
    pub fn vanishes(&self) -> bool {
        self.exponent > 0.0 && self.floor == 0.0
    }
}
