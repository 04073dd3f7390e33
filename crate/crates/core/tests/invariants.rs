use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use whlab::gridfn::{forward_transform, inverse_transform, twist, Grid, SampledFunction};
use whlab::operators::{apply_wh, gaussian_kernel, spectral_radius, Direction, WienerHopfOperator};
use whlab::spaces::{luxemburg_norm, lp_norm, translation_norm, zigzag_profile, OrliczFunction, SpaceSpec, Weight};
use whlab::symbol::{apply_symbol, kernel_symbol, shift_symbol};
use whlab::vector::inner;

fn samples(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| C64::new(a, b)), len)
}

fn weights() -> impl Strategy<Value = Weight> {
    prop_oneof![
        Just(Weight::constant()),
        (0.1..2.0f64).prop_map(Weight::exponential),
        (0.1..2.0f64).prop_map(Weight::power),
        (0.1..1.5f64).prop_map(Weight::dyadic_zigzag),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transform_matches_direct_sum(v in samples(24), origin in -2.0..2.0f64, h in 0.05..0.5f64) {
        let grid = Grid::new(origin, h, v.len()).unwrap();
        let f = SampledFunction::new(grid, v.clone()).unwrap();
        let spec = forward_transform(&f).unwrap();
        for k in 0..spec.len() {
            let xi = spec.frequency(k);
            let direct: C64 = v.iter().enumerate().map(|(j, z)| z * C64::from_polar(h, -xi * (origin + j as f64 * h))).sum();
            prop_assert!((direct - spec.values()[k]).norm() < 1e-9 * (1.0 + direct.norm()));
        }
        let back = inverse_transform(&spec).unwrap();
        for (a, b) in back.values().iter().zip(&v) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn twist_inverts(v in samples(40), a in -3.0..3.0f64) {
        let f = SampledFunction::new(Grid::new(0.0, 0.1, v.len()).unwrap(), v.clone()).unwrap();
        let back = twist(&twist(&f, a).unwrap(), -a).unwrap();
        for (x, y) in back.values().iter().zip(&v) {
            prop_assert!((x - y).norm() < 1e-12 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn lp_norm_is_a_norm(v in samples(50), u in samples(50), c in (-4.0..4.0f64, -4.0..4.0f64), p in 1.0..4.0f64, w in weights()) {
        let grid = Grid::new(0.0, 0.1, 50).unwrap();
        let f = SampledFunction::new(grid, v).unwrap();
        let g = SampledFunction::new(grid, u).unwrap();
        let c = C64::new(c.0, c.1);
        let nf = lp_norm(&f, p, &w).unwrap();
        let scaled = lp_norm(&f.scaled(c).unwrap(), p, &w).unwrap();
        prop_assert!((scaled - c.norm() * nf).abs() <= 1e-10 * (1.0 + scaled));
        let sum = lp_norm(&f.add(&g).unwrap(), p, &w).unwrap();
        prop_assert!(sum <= (nf + lp_norm(&g, p, &w).unwrap()) * (1.0 + 1e-10));
    }

    #[test]
    fn luxemburg_power_is_weighted_lp(v in samples(60), p in 1.0..4.0f64, w in weights()) {
        // The Luxemburg integral uses the measure ω dx, so it equals the
        // L^p norm of f·ω^{1/p}.
        let grid = Grid::new(0.0, 0.05, 60).unwrap();
        let f = SampledFunction::new(grid, v).unwrap();
        let lux = luxemburg_norm(&f, &OrliczFunction::Power { p }, Some(&w)).unwrap();
        let g = f.map(|x, z| z * w.value(x).powf(1.0 / p)).unwrap();
        let sum: f64 = g.values().iter().enumerate().map(|(k, z)| if k == 0 || k == 59 { 0.5 } else { 1.0 } * z.norm().powf(p)).sum();
        let lp = (sum * 0.05).powf(1.0 / p);
        prop_assert!((lux - lp).abs() <= 1e-8 * lp, "{lux} vs {lp}");
    }

    #[test]
    fn translation_norms_are_submultiplicative(w in weights(), m in 1u32..6, n in 1u32..6, sign in prop_oneof![Just(1.0), Just(-1.0)]) {
        let (m, n) = (sign * m as f64, sign * n as f64);
        let lhs = translation_norm(&w, 2.0, m + n);
        let rhs = translation_norm(&w, 2.0, m) * translation_norm(&w, 2.0, n);
        prop_assert!(lhs <= rhs * (1.0 + 1e-9), "{lhs} > {rhs}");
    }

    #[test]
    fn spectral_radii_bracket_the_unit_circle(w in weights()) {
        let f = spectral_radius(&w, 2.0, Direction::Forward);
        let b = spectral_radius(&w, 2.0, Direction::Backward);
        prop_assert!(f.estimate * b.estimate >= 1.0 - 1e-9);
        prop_assert!(f.estimate <= f.upper_bound * (1.0 + 1e-12));
    }

    #[test]
    fn zigzag_is_one_lipschitz(x in 0.0..500.0f64, d in 0.0..50.0f64) {
        prop_assert!((zigzag_profile(x + d) - zigzag_profile(x)).abs() <= d + 1e-9);
    }

    #[test]
    fn shift_symbol_closed_form(k in 1i32..200, a in -1.5..1.5f64) {
        let h = 0.01;
        let s = k as f64 * h;
        let nu = shift_symbol(s, a, h, 256).unwrap();
        for m in (0..nu.len()).step_by(17) {
            let xi = nu.frequency(m);
            let expected = C64::from_polar((s * a).exp(), -s * xi);
            prop_assert!((nu.values()[m] - expected).norm() < 1e-9 * expected.norm());
        }
    }

    #[test]
    fn kernel_symbol_represents_convolution(centre in 0.5..2.0f64, width in 0.2..0.6f64, a in -1.0..1.0f64, v in samples(8)) {
        let h = 0.02;
        let phi = gaussian_kernel(centre, width, h).unwrap();
        let t = WienerHopfOperator::kernel(phi.clone(), SpaceSpec::unweighted_l2());
        let grid = Grid::new(0.0, h, 600).unwrap();
        // Smooth probe supported well inside the grid.
        let f = SampledFunction::from_fn(grid, |x| {
            v.iter().enumerate().map(|(j, c)| c * (-((x - 1.0 - 0.5 * j as f64) / 0.4).powi(2)).exp()).sum()
        }).unwrap();
        let direct = twist(&apply_wh(&t, &f).unwrap(), a).unwrap();
        let nu = kernel_symbol(&phi, a, whlab::gridfn::fft_friendly(f.len() + phi.len())).unwrap();
        let via = apply_symbol(&nu, &f, a).unwrap();
        let scale = direct.l2_norm().max(1e-300);
        prop_assert!(direct.sub(&via).unwrap().l2_norm() / scale < 1e-9);
    }

    #[test]
    fn inner_product_is_sesquilinear(x in samples(4), y in samples(4), c in (-2.0..2.0f64, -2.0..2.0f64)) {
        let c = C64::new(c.0, c.1);
        let cx: Vec<C64> = x.iter().map(|z| c * z).collect();
        let lhs = inner(&cx, &y);
        prop_assert!((lhs - c * inner(&x, &y)).norm() < 1e-10 * (1.0 + lhs.norm()));
        prop_assert!((inner(&x, &y) - inner(&y, &x).conj()).norm() < 1e-12 * (1.0 + lhs.norm()));
        prop_assert!(inner(&x, &x).re >= 0.0 && inner(&x, &x).im.abs() < 1e-12);
    }
}

#[test]
fn gaussian_symbol_matches_closed_form() {
    // φ = N(c, s²): φ̂(ξ + ia) = exp(-i z c - s² z² / 2), z = ξ + ia.
    let (c, s, h) = (1.0, 0.5, 0.01);
    let phi = gaussian_kernel(c, s, h).unwrap();
    for a in [-1.0, 0.0, 0.7] {
        let nu = kernel_symbol(&phi, a, 4096).unwrap();
        for m in (0..nu.len()).step_by(97) {
            let xi = nu.frequency(m);
            if xi.abs() > PI / h * 0.5 {
                continue;
            }
            let z = C64::new(xi, a);
            let exact = (C64::new(0.0, -1.0) * z * c - z * z * (s * s / 2.0)).exp();
            assert!((nu.values()[m] - exact).norm() < 1e-9, "a={a} xi={xi}");
        }
    }
}
