use alloc::vec::Vec;

use super::sim::FieldSample;
use super::window::for_each_index;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LagRow {
    pub lag: Vec<i64>,
    pub correlation: f64,
    /// `‖lag‖∞ > m` and `|correlation| > 3/√n`.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    /// One row per lag up to sign, `‖lag‖∞ ≤ max_lag`, zero lag first.
    pub rows: Vec<LagRow>,
    pub m: usize,
    pub threshold: f64,
}

impl DependenceReport {
    pub fn any_flag(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }
}

/// Empirical autocovariance `(1/n) Σ (Y_j − Ȳ)(Y_{j+lag} − Ȳ)` over pairs
/// inside the window.
pub fn autocovariance(sample: &FieldSample, lag: &[i64]) -> f64 {
    let n = sample.n() as f64;
    let mean = sample.values().iter().sum::<f64>() / n;
    let shape = sample.shape();
    let vals = sample.values();
    let mut acc = 0.0;
    let mut other = alloc::vec![0usize; shape.len()];
    for_each_index(shape, |j| {
        for a in 0..j.len() {
            let t = j[a] as i64 + lag[a];
            if t < 0 || t >= shape[a] as i64 {
                return;
            }
            other[a] = t as usize;
        }
        acc += (vals[sample.offset(j)] - mean) * (vals[sample.offset(&other)] - mean);
    });
    acc / n
}

/// Lagwise empirical autocorrelations, flagging significant ones beyond the
/// declared dependence range.
pub fn dependence_diagnostic(sample: &FieldSample, max_lag: usize) -> Result<DependenceReport> {
    if max_lag < sample.m {
        return Err(Error::config(
            "max_lag must be at least the dependence range m",
        ));
    }
    let d = sample.dim();
    let var = autocovariance(sample, &alloc::vec![0; d]);
    let n = sample.n() as f64;
    let threshold = 3.0 / n.sqrt();
    let side = 2 * max_lag + 1;
    let mut rows = Vec::new();
    for_each_index(&alloc::vec![side; d], |idx| {
        let lag: Vec<i64> = idx.iter().map(|i| *i as i64 - max_lag as i64).collect();
        // keep one of ±lag: first nonzero coordinate positive
        if lag.iter().find(|c| **c != 0).is_some_and(|c| *c < 0) {
            return;
        }
        let correlation = if var > 0.0 {
            autocovariance(sample, &lag) / var
        } else {
            0.0
        };
        let norm = lag
            .iter()
            .map(|c| c.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        rows.push(LagRow {
            flagged: norm > sample.m && correlation.abs() > threshold,
            lag,
            correlation,
        });
    });
    rows.sort_by_key(|r| r.lag.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0));
    Ok(DependenceReport {
        rows,
        m: sample.m,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::simulate_field;
    use crate::levy::{KernelFn, LevyModel};

    #[test]
    fn lag_zero_is_one_and_range_checked() {
        let m = LevyModel::gamma(1.0).unwrap();
        let f = KernelFn::exp_window(1.0, 1.0).unwrap();
        let s = simulate_field(&m, &f, 0.5, 400, 0.05, 2, 0.0).unwrap();
        assert_eq!(s.m, 3);
        assert!(dependence_diagnostic(&s, 2).is_err());
        let r = dependence_diagnostic(&s, 5).unwrap();
        assert_eq!(r.rows[0].lag, alloc::vec![0]);
        assert!((r.rows[0].correlation - 1.0).abs() < 1e-12);
        assert_eq!(r.rows.len(), 6);
        assert!(r.rows[1].correlation > 0.2);
    }
}
