//! Goodness-of-fit statistics and regression used to judge experiments.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Unbiased covariance matrix of the rows, row-major `k × k`.
pub fn covariance_matrix(rows: &[Vec<f64>]) -> Vec<f64> {
    let k = rows[0].len();
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..k)
        .map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / n)
        .collect();
    let mut c = vec![0.0; k * k];
    for r in rows {
        for s in 0..k {
            for t in 0..k {
                c[s * k + t] += (r[s] - means[s]) * (r[t] - means[t]);
            }
        }
    }
    c.iter_mut().for_each(|x| *x /= n - 1.0);
    c
}

/// `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}`, the Kolmogorov tail.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov distance and p-value, with the Stephens
/// finite-sample correction of the asymptotic distribution.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    (d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d))
}

pub fn ks_normal(xs: &[f64]) -> (f64, f64) {
    let z = Normal::standard();
    ks_one_sample(xs, |x| z.cdf(x))
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Anderson–Darling `A²` against N(0, 1) and its asymptotic p-value
/// (Marsaglia and Marsaglia's approximation of the limiting law).
pub fn anderson_darling_normal(xs: &[f64]) -> (f64, f64) {
    let z = Normal::standard();
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let lo = z.cdf(s[i]).clamp(1e-300, 1.0 - 1e-16);
        let hi = z.cdf(s[n - 1 - i]).clamp(1e-300, 1.0 - 1e-16);
        acc += (2 * i + 1) as f64 * (lo.ln() + (1.0 - hi).ln());
    }
    let a2 = -nf - acc / nf;
    (a2, 1.0 - ad_limit_cdf(a2))
}

fn ad_limit_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z < 2.0 {
        (-1.2337141 / z).exp() / z.sqrt()
            * (2.00012
                + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z)
                    * z)
    } else {
        (-(1.0776
            - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z)
            .exp())
        .exp()
    }
}

/// Ordinary least squares `y ≈ a + b x`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
    /// 95% confidence interval of the slope.
    pub slope_ci: [f64; 2],
}

pub fn ols(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let dof = n - 2.0;
    let (slope_se, half) = if dof > 0.0 {
        let se = (rss / dof / sxx).sqrt();
        let q = StudentsT::new(0.0, 1.0, dof)
            .map(|t| t.inverse_cdf(0.975))
            .unwrap_or(f64::NAN);
        (se, q * se)
    } else {
        (f64::NAN, f64::NAN)
    };
    LinearFit {
        intercept,
        slope,
        slope_se,
        slope_ci: [slope - half, slope + half],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::Normal as SNormal;

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        use rand::distr::Distribution;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rand::distr::StandardUniform;
        let z = SNormal::standard();
        (0..n)
            .map(|_| {
                z.inverse_cdf(Distribution::<f64>::sample(&d, &mut rng).clamp(1e-12, 1.0 - 1e-12))
            })
            .collect()
    }

    #[test]
    fn kolmogorov_tail_reference_values() {
        // Q(1.3581) ≈ 0.05, Q(1.6276) ≈ 0.01
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 2e-4);
    }

    #[test]
    fn anderson_darling_reference_values() {
        // limiting law: P(A² > 2.492) ≈ 0.05, P(A² > 3.857) ≈ 0.01
        assert!((1.0 - ad_limit_cdf(2.492) - 0.05).abs() < 1e-3);
        assert!((1.0 - ad_limit_cdf(3.857) - 0.01).abs() < 5e-4);
    }

    #[test]
    fn normal_sample_passes_and_shifted_fails() {
        let xs = normals(2000, 1);
        assert!(ks_normal(&xs).1 > 0.01);
        assert!(anderson_darling_normal(&xs).1 > 0.01);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.3).collect();
        assert!(ks_normal(&shifted).1 < 1e-4);
        assert!(anderson_darling_normal(&shifted).1 < 1e-4);
        assert_eq!(ks_two_sample(&xs, &xs), 0.0);
        assert!((ks_two_sample(&xs, &shifted) - ks_normal(&shifted).0).abs() < 0.15);
    }

    #[test]
    fn ols_recovers_a_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = ols(&x, &y);
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.intercept - 2.0).abs() < 1e-12);
        assert!(f.slope_se < 1e-10);
    }

    #[test]
    fn covariance_of_linear_combination() {
        let xs = normals(500, 4);
        let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x, 2.0 * x]).collect();
        let c = covariance_matrix(&rows);
        assert!((c[3] - 4.0 * c[0]).abs() < 1e-12 && (c[1] - 2.0 * c[0]).abs() < 1e-12);
        assert!((c[0] - variance(&xs)).abs() < 1e-12);
    }
}
