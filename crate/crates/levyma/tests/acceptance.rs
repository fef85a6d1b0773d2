//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL` line before asserting.

use std::sync::OnceLock;
use std::time::Instant;

use levyma::cli::run_experiment;
use levyma::config::{presets, Config};
use levyma::experiment::ExperimentResult;
use levyma_core::estimator::ecf;
use levyma_core::field::{dependence_diagnostic, m_bound, simulate_field};
use levyma_core::grid::{log_grid, Grid, LogGridFn};
use levyma_core::levy::{KernelFn, LevyModel};
use levyma_core::xform::*;
use levyma_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(k: usize, pass: bool, detail: &str) {
    println!(
        "criterion {k}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {k}: {detail}");
}

/// Relative L² error in `dx` over `lo ≤ |x| ≤ hi`.
fn err_dx(got: &LogGridFn, want: &LogGridFn, lo: f64, hi: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, s) in got.grid().points().enumerate() {
        let x = s.exp();
        if x < lo || x > hi {
            continue;
        }
        for (a, b) in [(got.pos()[i], want.pos()[i]), (got.neg()[i], want.neg()[i])] {
            num += (a - b).norm_sqr() * x;
            den += b.norm_sqr() * x;
        }
    }
    (num / den).sqrt()
}

fn inner_dx(a: &LogGridFn, b: &LogGridFn) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (i, s) in a.grid().points().enumerate() {
        acc += (a.pos()[i] * b.pos()[i].conj() + a.neg()[i] * b.neg()[i].conj()) * s.exp();
    }
    acc * a.grid().step()
}

fn verdicts_line(res: &ExperimentResult, filter: impl Fn(&str) -> bool) -> (bool, String) {
    let picked: Vec<_> = res.verdicts.iter().filter(|v| filter(&v.name)).collect();
    let pass = !picked.is_empty() && picked.iter().all(|v| v.pass);
    let detail = picked
        .iter()
        .map(|v| {
            format!(
                "[{} {}: {}]",
                if v.pass { "ok" } else { "fail" },
                v.name,
                v.detail
            )
        })
        .collect::<Vec<_>>()
        .join(" ");
    (pass, detail)
}

fn preset(text: &str, kind: &str) -> ExperimentResult {
    let cfg = Config::from_toml(text).unwrap();
    cfg.validate().unwrap();
    run_experiment(&cfg, kind).unwrap()
}

fn clt_run() -> &'static ExperimentResult {
    static RES: OnceLock<ExperimentResult> = OnceLock::new();
    RES.get_or_init(|| preset(presets::CLT, "clt"))
}

#[test]
fn criterion_01_golden_inverse_adjoint() {
    // v(x) = x⁻¹ 1{|x| > t} against the published closed form of 𝒢⁻¹*v
    let start = Instant::now();
    let (lambda, theta, t) = (1.0, 1.0, 1.0);
    let f = KernelFn::exp_window(lambda, theta).unwrap();
    let g = LogGridFn::default_grid();
    let v = LogGridFn::sample_real(g, |x| if x.abs() > t { 1.0 / x } else { 0.0 }).unwrap();
    let got = apply_g_inv_adjoint_n_log(&v, &f, 1e-6).unwrap().value;
    let top = t * (lambda * theta).exp();
    let want = LogGridFn::sample_real(g, |x| {
        let ax = x.abs();
        if ax > t && ax <= top {
            (ax / t).ln() / (2.0 * x)
        } else if ax > top {
            lambda * theta / (2.0 * x)
        } else {
            0.0
        }
    })
    .unwrap();
    let e = err_dx(&got, &want, 1.05, 50.0);
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        e < 1e-2 && secs < 10.0,
        &format!("relative L² error {e:.4} on 1.05 ≤ |x| ≤ 50 (< 1e-2), {secs:.2}s"),
    );
}

#[test]
fn criterion_02_operator_round_trip() {
    let start = Instant::now();
    let f = KernelFn::exp_window(1.0, 1.0).unwrap();
    let m = LevyModel::gamma(1.0).unwrap();
    let g = log_grid(12.0, 1 << 14);
    let uv0 = LogGridFn::sample_real(g, |x| m.uv0(x)).unwrap();
    let uv1 = apply_g_log(&uv0, &f).value;
    let back = apply_g_inv_n_log(&uv1, &f, 1e-4).unwrap().value;
    let e = err_dx(&back, &uv0, 0.1, 10.0);
    let secs = start.elapsed().as_secs_f64();
    report(
        2,
        e < 1e-2 && secs < 10.0,
        &format!("relative L² error {e:.3e} on 0.1 ≤ |x| ≤ 10, {secs:.2}s"),
    );
}

#[test]
fn criterion_03_transform_algebra() {
    let f = KernelFn::exp_window(1.0, 1.0).unwrap();
    let g = log_grid(12.0, 1 << 12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut smooth = || {
        let c: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        LogGridFn::sample(g, move |x| {
            let a = (-(x - c[0]).powi(2) * (1.0 + c[1].abs())).exp();
            let b = x * (-(x + c[2]).powi(2) / (1.0 + c[3].abs())).exp();
            C64::new(a, 0.5 * b)
        })
        .unwrap()
    };
    let (mut iso, mut trip, mut adj) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let (v, w) = (smooth(), smooth());
        let nv = inner_dx(&v, &v).re.sqrt();
        let nw = inner_dx(&w, &w).re.sqrt();
        let mv = isometry_m_log(&v);
        iso = iso.max((mv.l2_norm() - nv).abs() / nv);
        let back = mellin_fx_inv(&mellin_fx(&mv).unwrap().value).unwrap().value;
        trip = trip.max(back.rel_l2_error(&mv).unwrap());
        let lhs = inner_dx(&v, &apply_g_inv_n_log(&w, &f, 1e-3).unwrap().value);
        let rhs = inner_dx(&apply_g_inv_adjoint_n_log(&v, &f, 1e-3).unwrap().value, &w);
        adj = adj.max((lhs - rhs).norm() / (nv * nw));
    }
    report(
        3,
        iso < 1e-6 && trip < 1e-6 && adj < 1e-6,
        &format!("20 pairs: isometry {iso:.1e}, 𝓕_× round trip {trip:.1e}, adjoint {adj:.1e} (all < 1e-6)"),
    );
}

#[test]
fn criterion_04_simulator_marginal_law() {
    let start = Instant::now();
    let model = LevyModel::gamma(1.0).unwrap();
    let cube = KernelFn::indicator_cube(vec![1.0]).unwrap();
    let grid = Grid::symmetric(5.0, 500).unwrap();
    let mut good = 0;
    let mut worst = Vec::new();
    for seed in 0..100 {
        let s = simulate_field(&model, &cube, 1.0, 10_000, 1.0, seed, 0.0).unwrap();
        let e = ecf(s.values(), &grid).unwrap();
        let sup = grid
            .points()
            .zip(e.psi())
            .map(|(t, p)| (p - C64::new(1.0, -t).inv()).norm())
            .fold(0.0, f64::max);
        if sup < 0.02 {
            good += 1;
        }
        worst.push(sup);
    }
    worst.sort_by(f64::total_cmp);
    let secs = start.elapsed().as_secs_f64();
    report(
        4,
        good >= 95 && secs < 60.0,
        &format!(
            "{good}/100 seeds with sup|ψ̂ − ψ| < 0.02 (median {:.4}, max {:.4}), {secs:.1}s",
            worst[50], worst[99]
        ),
    );
}

#[test]
fn criterion_05_m_dependence() {
    let model = LevyModel::gamma(1.0).unwrap();
    let f = KernelFn::exp_window(1.0, 1.0).unwrap();
    let m = m_bound(&f, 0.5).unwrap();
    let mut flagged = Vec::new();
    for seed in 0..20 {
        let s = simulate_field(&model, &f, 0.5, 10_000, 0.05, seed, 0.0).unwrap();
        if dependence_diagnostic(&s, m + 2).unwrap().any_flag() {
            flagged.push(seed);
        }
    }
    report(
        5,
        flagged.is_empty(),
        &format!("m = {m}; seeds with a flag beyond m: {flagged:?} of 20"),
    );
}

#[test]
fn criterion_06_consistency_rate() {
    let start = Instant::now();
    let res = preset(presets::CONSISTENCY, "consistency");
    let (pass, detail) = verdicts_line(&res, |n| n.starts_with("consistency"));
    let secs = start.elapsed().as_secs_f64();
    report(6, pass && secs < 900.0, &format!("{detail} {secs:.1}s"));
}

#[test]
fn criterion_07_univariate_clt() {
    let start = Instant::now();
    let res = clt_run();
    let (pass, detail) =
        verdicts_line(res, |n| n.ends_with("normality") || n.ends_with("variance"));
    let secs = start.elapsed().as_secs_f64();
    report(7, pass && secs < 1200.0, &detail);
}

#[test]
fn criterion_08_multivariate_clt() {
    let res = preset(presets::CLT_MULTI, "clt-multi");
    let (pass, detail) = verdicts_line(&res, |n| n.contains("covariance") || n.contains("scaling"));
    report(8, pass, &detail);
}

#[test]
fn criterion_09_drift_invariance() {
    let (pass, detail) = verdicts_line(clt_run(), |n| n.contains("drift"));
    report(9, pass, &detail);
}

#[test]
fn criterion_10_tail_and_moment_inequalities() {
    let res = preset(presets::INEQUALITIES, "inequalities");
    let (pass, detail) = verdicts_line(&res, |_| true);
    report(10, pass, &detail);
}
