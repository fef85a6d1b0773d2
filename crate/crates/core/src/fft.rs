//! In-place radix-2 FFT.

use core::f64::consts::PI;

use crate::{Error, Result, C64};

/// Sign of the exponent in `sum_k a_k exp(sign * 2 pi i j k / n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Unnormalized DFT of `data` in place. Length must be a power of two.
pub fn fft(data: &mut [C64], sign: Sign) -> Result<()> {
    let n = data.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Shape("FFT length must be a nonzero power of two"));
    }
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let s = sign.value();
    let mut len = 2;
    while len <= n {
        let ang = s * 2.0 * PI / len as f64;
        let half = len / 2;
        for k in 0..half {
            // direct twiddles avoid drift from repeated multiplication
            let w = C64::new((ang * k as f64).cos(), (ang * k as f64).sin());
            for start in (0..n).step_by(len) {
                let u = data[start + k];
                let v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn naive(a: &[C64], sign: Sign) -> Vec<C64> {
        let n = a.len();
        (0..n)
            .map(|j| {
                a.iter()
                    .enumerate()
                    .map(|(k, &x)| {
                        let ang = sign.value() * 2.0 * PI * (j * k) as f64 / n as f64;
                        x * C64::new(ang.cos(), ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1usize, 2, 8, 64] {
            let a: Vec<C64> = (0..n)
                .map(|k| C64::new((k as f64 * 0.7).sin(), 0.3 * k as f64))
                .collect();
            for sign in [Sign::Plus, Sign::Minus] {
                let mut b = a.clone();
                fft(&mut b, sign).unwrap();
                let r = naive(&a, sign);
                for (x, y) in b.iter().zip(&r) {
                    assert!((x - y).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn round_trip_and_rejects_bad_length() {
        let a: Vec<C64> = (0..256)
            .map(|k| C64::new(k as f64, -(k as f64).sqrt()))
            .collect();
        let mut b = a.clone();
        fft(&mut b, Sign::Minus).unwrap();
        fft(&mut b, Sign::Plus).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y / 256.0).norm() < 1e-9);
        }
        let mut c = alloc::vec![C64::new(0.0, 0.0); 6];
        assert!(fft(&mut c, Sign::Plus).is_err());
    }
}
