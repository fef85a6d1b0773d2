use std::collections::BTreeSet;

use levyma_core::field::*;
use levyma_core::levy::{KernelFn, LevyModel};
use levyma_core::C64;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Gamma};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
}

fn ks_stat(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn cube_field_has_gamma_marginals() {
    // unit cube, Δ = 1: each Y_j is the mass of one unit cell, Gamma(1, b)
    let b = 2.0;
    let s = simulate_field(
        &LevyModel::gamma(b).unwrap(),
        &KernelFn::unit_cube(1).unwrap(),
        1.0,
        4000,
        0.1,
        11,
        0.0,
    )
    .unwrap();
    let g = Gamma::new(1.0, b).unwrap();
    let d = ks_stat(s.values(), |x| g.cdf(x));
    assert!(d < 1.36 / (s.n() as f64).sqrt(), "KS {d}");

    let n = s.n() as f64;
    for t in [0.5, 1.0, 3.0, 8.0] {
        let emp: C64 = s
            .values()
            .iter()
            .map(|y| C64::new(0.0, t * y).exp())
            .sum::<C64>()
            / n;
        let exact = C64::new(1.0, -t / b).inv();
        assert!((emp - exact).norm() < 4.0 / n.sqrt(), "t = {t}");
    }
}

#[test]
fn gamma_masses_are_additive() {
    // ten cells of volume 0.1 sum to Gamma(1, b)
    let b = 1.5;
    let m = simulate_gamma_basis(&[0], &[30000], 0.1, b, 3).unwrap();
    let sums: Vec<f64> = m.chunks(10).map(|c| c.iter().sum()).collect();
    let g = Gamma::new(1.0, b).unwrap();
    let d = ks_stat(&sums, |x| g.cdf(x));
    assert!(d < 1.36 / (sums.len() as f64).sqrt(), "KS {d}");
}

fn exp_weights(f: &KernelFn, h: f64) -> Vec<f64> {
    (1..)
        .map(|r| f.cell_weight(&[(r - 1) as f64 * h], h))
        .take_while(|w| *w != 0.0)
        .collect()
}

#[test]
fn exp_window_moments_and_lag_covariance() {
    let (b, h, delta) = (1.0, 0.05, 0.5);
    let f = KernelFn::exp_window(1.0, 1.0).unwrap();
    let s = simulate_field(&LevyModel::gamma(b).unwrap(), &f, delta, 40000, h, 5, 0.0).unwrap();
    assert_eq!(s.m, 3);
    let w = exp_weights(&f, h);
    let q = (delta / h).round() as usize;
    let mean = h / b * w.iter().sum::<f64>();
    let var = h / (b * b) * w.iter().map(|x| x * x).sum::<f64>();
    let cov1 = h / (b * b) * w.iter().zip(&w[q..]).map(|(a, c)| a * c).sum::<f64>();

    let (m, v) = mean_var(s.values());
    assert!((m - mean).abs() < 0.01 * mean, "{m} vs {mean}");
    assert!((v - var).abs() < 0.05 * var, "{v} vs {var}");
    let c1 = autocovariance(&s, &[1]);
    assert!((c1 - cov1).abs() < 0.08 * cov1, "{c1} vs {cov1}");
    // beyond the support the lags decorrelate
    assert!(autocovariance(&s, &[4]).abs() < 0.05 * var);
}

#[test]
fn refining_cells_converges_to_the_continuum_moments() {
    let (b, lambda) = (1.0, 1.0);
    let f = KernelFn::exp_window(lambda, 1.0).unwrap();
    let var_exact = (1.0 - (-2.0 * lambda).exp()) / (2.0 * lambda) / (b * b);
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let w = exp_weights(&f, h);
            (h * w.iter().map(|x| x * x).sum::<f64>() - var_exact).abs()
        })
        .collect();
    assert!(errs.windows(2).all(|e| e[1] < 0.3 * e[0]), "{errs:?}");
    assert!(errs[2] < 1e-4);
}

#[test]
fn simulation_is_reproducible() {
    let f = KernelFn::exp_window(1.0, 1.0).unwrap();
    let m = LevyModel::gamma(1.0).unwrap();
    let a = simulate_field(&m, &f, 0.5, 300, 0.05, 42, 0.0).unwrap();
    assert_eq!(a, simulate_field(&m, &f, 0.5, 300, 0.05, 42, 0.0).unwrap());
    assert_ne!(
        a.values(),
        simulate_field(&m, &f, 0.5, 300, 0.05, 43, 0.0)
            .unwrap()
            .values()
    );
    let shifted = simulate_field(&m, &f, 0.5, 300, 0.05, 42, 2.5).unwrap();
    assert!(a
        .values()
        .iter()
        .zip(shifted.values())
        .all(|(x, y)| (y - x - 2.5).abs() < 1e-12));
}

#[test]
fn independent_field_raises_no_dependence_flags() {
    let s = simulate_field(
        &LevyModel::gamma(1.0).unwrap(),
        &KernelFn::unit_cube(2).unwrap(),
        1.0,
        80,
        0.25,
        9,
        0.0,
    )
    .unwrap();
    let rep = dependence_diagnostic(&s, s.m + 1).unwrap();
    assert!(!rep.any_flag(), "{rep:?}");
    assert!(dependence_diagnostic(&s, s.m - 1).is_err());
}

#[test]
fn growth_report_for_dyadic_cubes() {
    for d in 1..=3 {
        let seq = WindowSequence::dyadic(d, 6).unwrap();
        let rep = regular_growth_report(&seq, 7);
        assert!(rep.decreasing);
        for (k, row) in rep.rows.iter().enumerate().take(4) {
            assert_eq!(row.boundary, boundary(&seq.window(k).unwrap()).len());
        }
    }
}

fn brute_boundary(w: &Window) -> BTreeSet<Vec<i64>> {
    let d = w.dim();
    let mut out = BTreeSet::new();
    for p in w.points() {
        for code in 0..3usize.pow(d as u32) {
            let mut c = code;
            let q: Vec<i64> = p
                .iter()
                .map(|x| {
                    let o = (c % 3) as i64 - 1;
                    c /= 3;
                    x + o
                })
                .collect();
            if !w.contains(&q) {
                out.insert(q);
            }
        }
    }
    out
}

fn brute_vh(u: &RealBox, a: &[f64]) -> (usize, usize) {
    let d = a.len();
    let ranges: Vec<(i64, i64)> = (0..d)
        .map(|i| {
            (
                (u.lo[i] / a[i]).floor() as i64 - 2,
                (u.hi[i] / a[i]).ceil() as i64 + 2,
            )
        })
        .collect();
    let (mut inside, mut meeting) = (0, 0);
    let mut k: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let (mut all_in, mut all_meet) = (true, true);
        for i in 0..d {
            let (lo, hi) = (k[i] as f64 * a[i], (k[i] + 1) as f64 * a[i]);
            all_in &= lo >= u.lo[i] && hi <= u.hi[i];
            all_meet &= if u.closed {
                hi >= u.lo[i] && lo < u.hi[i]
            } else {
                hi > u.lo[i] && lo < u.hi[i]
            };
        }
        inside += all_in as usize;
        meeting += all_meet as usize;
        let mut i = 0;
        loop {
            if i == d {
                return (inside, meeting);
            }
            k[i] += 1;
            if k[i] <= ranges[i].1 {
                break;
            }
            k[i] = ranges[i].0;
            i += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_matches_brute_force(d in 1usize..=3, pts in prop::collection::vec(prop::collection::vec(-3i64..3, 3), 1..20)) {
        let w = Window::from_points(d, pts.into_iter().map(|p| p[..d].to_vec())).unwrap();
        let b = boundary(&w);
        prop_assert!(b.points().all(|p| !w.contains(p)));
        prop_assert_eq!(b.points().cloned().collect::<BTreeSet<_>>(), brute_boundary(&w));
    }

    #[test]
    fn cube_boundary_closed_form(d in 1usize..=3, side in 1usize..=6) {
        let w = Window::cube(d, side).unwrap();
        prop_assert_eq!(boundary(&w).len(), (side + 2).pow(d as u32) - side.pow(d as u32));
    }

    #[test]
    fn van_hove_counts_match_enumeration(
        d in 1usize..=3,
        lo in prop::collection::vec(-3.0f64..3.0, 3),
        len in prop::collection::vec(0.0f64..4.0, 3),
        a in prop::collection::vec(0.25f64..1.5, 3),
        closed in any::<bool>(),
    ) {
        let u = RealBox { lo: lo[..d].to_vec(), hi: (0..d).map(|i| lo[i] + len[i]).collect(), closed };
        let rep = vh_blocks(&u, &a[..d]).unwrap();
        let (inside, meeting) = brute_vh(&u, &a[..d]);
        prop_assert_eq!((rep.j_minus, rep.j_plus), (inside, meeting));
        prop_assert!(rep.j_minus <= rep.j_plus);
    }

    #[test]
    fn m_bound_is_the_next_integer(theta in 0.05f64..5.0, delta in 0.05f64..2.0) {
        let f = KernelFn::exp_window(1.0, theta).unwrap();
        let m = m_bound(&f, delta).unwrap() as f64;
        let r = theta / delta;
        prop_assert!(m > r - 1e-9 * r && m - 1.0 <= r + 1e-9 * r);
    }
}
