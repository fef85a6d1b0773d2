use std::f64::consts::PI;

use levyma_core::estimator::TestFunction;
use levyma_core::grid::{log_grid, Grid, GridFn, LogGridFn};
use levyma_core::levy::{KernelFn, LevyModel};
use levyma_core::xform::*;
use levyma_core::C64;
use proptest::prelude::*;

/// Relative L² error in `dx` measure over `lo ≤ |x| ≤ hi`.
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

fn norm_dx(a: &LogGridFn) -> f64 {
    inner_dx(a, a).re.sqrt()
}

#[test]
fn inverse_adjoint_recovers_a_known_preimage() {
    let f = KernelFn::exp_window(1.0, 1.0).unwrap();
    let v = TestFunction::gaussian_moment(1, 1.0, &f);
    let g = LogGridFn::default_grid();
    let vl = LogGridFn::sample_real(g, |x| v.eval(x)).unwrap();
    let h = LogGridFn::sample_real(g, |x| v.inverse_adjoint(x).unwrap()).unwrap();
    let got = apply_g_inv_adjoint_n_log(&vl, &f, 1e-6).unwrap().value;
    let e = err_dx(&got, &h, 0.05, 5.0);
    assert!(e < 1e-3, "relative error {e}");
}

#[test]
fn forward_then_regularized_inverse_round_trip() {
    let f = KernelFn::exp_window(1.0, 1.0).unwrap();
    let m = LevyModel::gamma(1.0).unwrap();
    let g = log_grid(12.0, 1 << 14);
    let uv0 = LogGridFn::sample_real(g, |x| m.uv0(x)).unwrap();
    let uv1 = apply_g_log(&uv0, &f).value;
    for a in [1e-2, 1e-4] {
        let back = apply_g_inv_n_log(&uv1, &f, a).unwrap().value;
        let e = err_dx(&back, &uv0, 0.1, 10.0);
        assert!(e < 1e-2, "a = {a}: {e}");
    }
}

#[test]
fn forward_operator_matches_direct_quadrature_of_uv1() {
    let f = KernelFn::exp_window(1.0, 1.0).unwrap();
    let m = LevyModel::gamma(1.0).unwrap();
    let g = log_grid(12.0, 1 << 14);
    let uv0 = LogGridFn::sample_real(g, |x| m.uv0(x)).unwrap();
    let got = apply_g_log(&uv0, &f).value;
    let want = LogGridFn::sample_real(g, |x| levyma_core::levy::uv1(&m, &f, x)).unwrap();
    assert!(err_dx(&got, &want, 0.01, 20.0) < 1e-8);
}

#[test]
fn uniform_grid_wrappers_agree_with_log_versions() {
    let f = KernelFn::exp_window(2.0, 0.5).unwrap();
    let grid = Grid::symmetric(20.0, 8000).unwrap();
    let v = GridFn::from_real_fn(grid, |x| x * (-x * x).exp()).unwrap();
    let lg = log_grid(12.0, 1 << 14);
    let out = apply_g_inv_n(&apply_g(&v, &f).value, &f, 1e-5, &lg)
        .unwrap()
        .value;
    assert!(out.rel_l2_error_on(&v, 0.2, 3.0).unwrap() < 1e-2);
}

#[test]
fn multiplicative_transform_matches_mellin_closed_form() {
    // w(x) = x² e^{−x²/2} on x > 0: ∫ w(eˢ) e^{−isτ} ds = 2^{−iτ/2} Γ(1 − iτ/2)
    let g = log_grid(12.0, 1 << 12);
    let w = LogGridFn::sample_real(g, |x| {
        if x > 0.0 {
            x * x * (-x * x / 2.0).exp()
        } else {
            0.0
        }
    })
    .unwrap();
    let spectrum = mellin_fx(&w).unwrap().value;
    let i0 = spectrum.grid().nearest(0.0).unwrap();
    assert!(
        (spectrum.pos()[i0].re - 1.0).abs() < 1e-9,
        "{}",
        spectrum.pos()[i0].re
    );
    assert_eq!(spectrum.pos()[i0], spectrum.neg()[i0]);
}

fn smooth_pair(c: [f64; 4]) -> LogGridFn {
    let g = log_grid(12.0, 1 << 12);
    LogGridFn::sample(g, |x| {
        let a = (-(x - c[0]).powi(2) * (1.0 + c[1].abs())).exp();
        let b = x * (-(x + c[2]).powi(2) / (1.0 + c[3].abs())).exp();
        C64::new(a, 0.5 * b)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn isometry_and_round_trip(c in prop::array::uniform4(-2.0f64..2.0)) {
        let w = smooth_pair(c);
        let m = isometry_m_log(&w);
        // ‖𝓜w‖ in dx/|x| equals ‖w‖ in dx
        let rel = (m.l2_norm() - norm_dx(&w)).abs() / norm_dx(&w);
        prop_assert!(rel < 1e-6);
        let back = mellin_fx_inv(&mellin_fx(&m).unwrap().value).unwrap().value;
        prop_assert!(back.rel_l2_error(&m).unwrap() < 1e-6);
    }

    #[test]
    fn regularized_inverse_adjoint_identity(a in prop::array::uniform4(-2.0f64..2.0), b in prop::array::uniform4(-2.0f64..2.0), cut in 1e-4f64..0.3) {
        let f = KernelFn::exp_window(1.0, 1.0).unwrap();
        let (v, w) = (smooth_pair(a), smooth_pair(b));
        let lhs = inner_dx(&v, &apply_g_inv_n_log(&w, &f, cut).unwrap().value);
        let rhs = inner_dx(&apply_g_inv_adjoint_n_log(&v, &f, cut).unwrap().value, &w);
        prop_assert!((lhs - rhs).norm() < 1e-6 * norm_dx(&v) * norm_dx(&w), "{lhs} vs {rhs}");
    }

    #[test]
    fn lattice_transform_is_linear(x in prop::collection::vec(-1.0f64..1.0, 16), y in prop::collection::vec(-1.0f64..1.0, 16), k in -3.0f64..3.0) {
        let cx: Vec<C64> = x.iter().map(|v| C64::new(*v, 0.0)).collect();
        let cy: Vec<C64> = y.iter().map(|v| C64::new(0.0, *v)).collect();
        let sum: Vec<C64> = cx.iter().zip(&cy).map(|(a, b)| a + b * k).collect();
        let (_, fx) = lattice_transform(&cx, -1.0, 0.125, 32, levyma_core::fft::Sign::Plus).unwrap();
        let (_, fy) = lattice_transform(&cy, -1.0, 0.125, 32, levyma_core::fft::Sign::Plus).unwrap();
        let (_, fs) = lattice_transform(&sum, -1.0, 0.125, 32, levyma_core::fft::Sign::Plus).unwrap();
        for i in 0..32 {
            prop_assert!((fs[i] - fx[i] - fy[i] * k).norm() < 1e-12);
        }
    }

    #[test]
    fn plancherel_for_fourier_plus(c in prop::array::uniform4(-2.0f64..2.0)) {
        let g = Grid::centered(0.02, 2048).unwrap();
        let v = GridFn::from_fn(g, |t| C64::new((-(t - c[0]).powi(2)).exp(), c[1] * (-(t + c[2]).powi(2) * 2.0).exp())).unwrap();
        let f = fourier_plus(&v).unwrap().value;
        prop_assert!((f.norm_sq() - 2.0 * PI * v.norm_sq()).abs() < 1e-9 * v.norm_sq());
    }

    #[test]
    fn cutoff_multiplier_is_bounded(re in -2.0f64..2.0, im in -2.0f64..2.0, a in 0.0f64..1.0) {
        let mu = C64::new(re, im);
        let m = cutoff_multiplier(mu, a, false);
        if mu.norm() > a {
            prop_assert!((m * mu - 1.0).norm() < 1e-12);
            prop_assert_eq!(cutoff_multiplier(mu, a, true), m.conj());
        } else {
            prop_assert_eq!(m, C64::new(0.0, 0.0));
        }
    }
}
