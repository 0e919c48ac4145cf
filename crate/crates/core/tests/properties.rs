use hardy_core::ensembles::{
    random_adapted_phases, random_arith_sample, random_complex, random_hardy_function,
    random_hardy_martingale, random_unimodular, EnsembleConfig,
};
use hardy_core::inequality::{
    arith_check_d, arith_check_e, holds, prop_check, sincos_identity_sides, theorem_quantities,
    verify_chain, ARITH_SLACK_TOL, C_PROOF, EXACT_TOL, SLACK_TOL,
};
use hardy_core::martingale::MartingaleField;
use hardy_core::torus::{GridFunction, Spectrum, TorusGrid};
use hardy_core::Complex;
use proptest::prelude::*;

fn grid_size() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![4usize, 8, 16, 32])
}

fn complex() -> impl Strategy<Value = Complex> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex::new(re, im))
}

fn unimodular() -> impl Strategy<Value = Complex> {
    (0.0..std::f64::consts::TAU).prop_map(|phi| Complex::from_polar(1.0, phi))
}

fn max_dist(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Spectrum with energy only at `0 < |m| < N/2`.
fn band_limited(grid: TorusGrid, coeffs: &[Complex]) -> GridFunction {
    let mut s = Spectrum::zeros(grid);
    let half = grid.n_points() as i64 / 2;
    for (m, c) in (1..half).flat_map(|m| [m, -m]).zip(coeffs.iter().cycle()) {
        s.set(m, *c);
    }
    s.synthesize()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip(n in grid_size(), values in prop::collection::vec(complex(), 32)) {
        let grid = TorusGrid::new(n).unwrap();
        let f = GridFunction::new(grid, values[..n].to_vec()).unwrap();
        let back = f.analyze().synthesize();
        prop_assert!(max_dist(&f, &back) <= 1e-12 * f.l2_norm().max(1.0));
        prop_assert!((f.analyze().energy() - f.mean_square()).abs() <= 1e-12 * f.mean_square().max(1.0));
    }

    #[test]
    fn hilbert_isometry(n in grid_size(), coeffs in prop::collection::vec(complex(), 1..16)) {
        let grid = TorusGrid::new(n).unwrap();
        let f = band_limited(grid, &coeffs);
        prop_assert!((f.hilbert().l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm().max(1.0));
    }

    #[test]
    fn hilbert_maps_even_to_odd(n in grid_size(), coeffs in prop::collection::vec(-2.0..2.0f64, 1..16)) {
        let grid = TorusGrid::new(n).unwrap();
        let f = GridFunction::from_fn(grid, |t| {
            Complex::new(coeffs.iter().enumerate().map(|(m, c)| c * ((m + 1) as f64 * t).cos()).take(n / 2 - 1).sum(), 0.0)
        });
        let h = f.hilbert();
        prop_assert!(h.values().iter().all(|v| v.im.abs() < 1e-12));
        prop_assert!(max_dist(&h.conjugate_flip(), &h.scale(Complex::new(-1.0, 0.0))) < 1e-12);
    }

    #[test]
    fn hardy_even_part_recovery(n in grid_size(), seed in any::<u64>(), w in unimodular()) {
        let h = random_hardy_function(&EnsembleConfig::new(seed, n, 1)).unwrap();
        let u = h.zip_with(&h.conjugate_flip(), |a, b| (a + b) * 0.5).unwrap();
        let rebuilt = u.zip_with(&u.hilbert(), |a, b| a + Complex::new(0.0, 1.0) * b).unwrap();
        prop_assert!(max_dist(&rebuilt, &h) <= 1e-12 * h.l2_norm().max(1.0));

        let im = h.map(|v| Complex::new((w * v).im, 0.0));
        prop_assert!((h.l2_norm() - 2f64.sqrt() * im.l2_norm()).abs() <= 1e-12 * h.l2_norm().max(1.0));
    }

    #[test]
    fn imaginary_part_norm(n in grid_size(), coeffs in prop::collection::vec(-2.0..2.0f64, 2..32)) {
        let grid = TorusGrid::new(n).unwrap();
        let y = GridFunction::from_fn(grid, |t| {
            Complex::new(coeffs.chunks(2).enumerate().take(n / 2 - 1)
                .map(|(m, c)| c[0] * ((m + 1) as f64 * t).sin() + c.get(1).unwrap_or(&0.0) * ((m + 1) as f64 * t).cos())
                .sum(), 0.0)
        });
        let h = GridFunction::from_imaginary_part(&y).unwrap();
        prop_assert!(h.is_hardy(1e-10));
        prop_assert!((h.l2_norm() - 2f64.sqrt() * y.l2_norm()).abs() <= 1e-12 * y.l2_norm().max(1.0));
        prop_assert!(h.values().iter().zip(y.values()).all(|(a, b)| (a.im - b.re).abs() < 1e-12));
    }

    #[test]
    fn sincos_identity_is_exact(n in grid_size(), seed in any::<u64>(), b in complex(), w in unimodular()) {
        let h = random_hardy_function(&EnsembleConfig::new(seed, n, 1)).unwrap();
        let rep = sincos_identity_sides(&h, b, w).unwrap();
        prop_assert!(rep.residual <= EXACT_TOL, "{rep:?}");
    }

    #[test]
    fn proposition_holds(n in prop::sample::select(vec![4usize, 8, 16]), seed in any::<u64>(), b in complex(), w in unimodular()) {
        let h = random_hardy_function(&EnsembleConfig::new(seed, n, 1)).unwrap();
        let rep = prop_check(&h, b, w).unwrap();
        prop_assert!(rep.holds(SLACK_TOL), "{rep:?}");
        prop_assert!(rep.decomposition.residual <= EXACT_TOL);
    }

    #[test]
    fn arithmetic_lemma(mu in complex(), b in complex(), w in unimodular(), tiny in any::<bool>()) {
        let (mu, b) = if tiny { (mu * 1e-13, b * 1e-13) } else { (mu, b) };
        let (l, r) = arith_check_e(mu, b, w).unwrap();
        prop_assert!(holds(l, r, ARITH_SLACK_TOL), "{l} {r}");
        let (l, r) = arith_check_d(mu, b);
        prop_assert!(holds(l, r, ARITH_SLACK_TOL), "{l} {r}");
    }

    #[test]
    fn stratified_arithmetic(seed in any::<u64>()) {
        let s = random_arith_sample(&EnsembleConfig::new(seed, 4, 1));
        let (l, r) = arith_check_e(s.mu, s.b, s.w).unwrap();
        prop_assert!(holds(l, r, ARITH_SLACK_TOL), "{s:?}: {l} {r}");
        let (l, r) = arith_check_d(s.mu, s.b);
        prop_assert!(holds(l, r, ARITH_SLACK_TOL), "{s:?}: {l} {r}");
    }
}

fn martingale_case() -> impl Strategy<Value = (usize, usize, u64)> {
    (
        prop::sample::select(vec![4usize, 8]),
        1usize..=3,
        any::<u64>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transform_isometry((n, depth, seed) in martingale_case()) {
        let cfg = EnsembleConfig::new(seed, n, depth);
        let g = random_hardy_martingale(&cfg).unwrap();
        let w = random_adapted_phases(&cfg).unwrap();
        let (lhs, rhs) = g.check_transform_isometry(&w).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * g.previsible_norm());
    }

    #[test]
    fn transform_is_a_martingale((n, depth, seed) in martingale_case()) {
        let cfg = EnsembleConfig::new(seed, n, depth);
        let g = random_hardy_martingale(&cfg).unwrap();
        let t = g.transform(&random_adapted_phases(&cfg).unwrap()).unwrap();
        prop_assert!(t.terminal().iter().all(|v| v.im == 0.0));
        for d in t.differences() {
            for slice in d.chunks_exact(n) {
                prop_assert!(slice.iter().sum::<Complex>().norm() / n as f64 <= 1e-12);
            }
        }
    }

    #[test]
    fn dyadic_structure((n, depth, seed) in martingale_case()) {
        let cfg = EnsembleConfig::new(seed, n, depth);
        let g = random_hardy_martingale(&cfg).unwrap();
        let close = |a: &MartingaleField, b: &MartingaleField| {
            a.terminal().iter().zip(b.terminal()).all(|(x, y)| (x - y).norm() <= 1e-12)
        };
        let p = g.dyadic_project();
        prop_assert!(close(&p.dyadic_project(), &p));
        prop_assert!(close(&g.cosine_part().dyadic_project(), &p.cosine_part()));

        let sine = g.sine_part().dyadic_project();
        prop_assert!(sine.terminal().iter().all(|v| v.norm() <= 1e-12));

        let u = g.cosine_part();
        let lhs = u.sub(&u.dyadic_project()).unwrap().add(&g.sine_part()).unwrap();
        let rhs = g.sub(&p).unwrap();
        prop_assert!(close(&lhs, &rhs));
    }

    #[test]
    fn previsible_norm_homogeneous((n, depth, seed) in martingale_case(), c in complex()) {
        let g = random_hardy_martingale(&EnsembleConfig::new(seed, n, depth)).unwrap();
        let scaled = g.scale(c).previsible_norm();
        prop_assert!((scaled - c.norm() * g.previsible_norm()).abs() <= 1e-12 * scaled.max(1.0));
        let profile = g.cond_square_profile();
        prop_assert!(profile.moments().iter().flatten().all(|q| *q >= 0.0));
        prop_assert!(g.previsible_norm() > 0.0);
    }

    #[test]
    fn theorem_chain((n, depth, seed) in martingale_case(), scale in 0.01..100.0f64) {
        let mut cfg = EnsembleConfig::new(seed, n, depth);
        cfg.coefficient_scale = scale;
        let g = random_hardy_martingale(&cfg).unwrap();
        let w = random_adapted_phases(&cfg).unwrap();
        let rep = theorem_quantities(&g, &w).unwrap();
        for step in verify_chain(&rep) {
            prop_assert!(step.pass, "{step:?}");
        }
        prop_assert!(rep.ratio <= C_PROOF);
        prop_assert!(rep.x.iter().zip(&rep.y).all(|(x, y)| x + 1e-12 >= *y && *y >= 0.0));
    }
}

#[test]
fn scalar_generators_are_deterministic() {
    let cfg = EnsembleConfig::new(99, 8, 2);
    assert_eq!(random_complex(&cfg), random_complex(&cfg));
    let w = random_unimodular(&cfg).unwrap();
    assert!((w.norm() - 1.0).abs() < 1e-15);
}

#[test]
fn chain_survives_near_equality_of_x_and_y() {
    let mut cfg = EnsembleConfig::new(2520676409214399865, 4, 1);
    cfg.coefficient_scale = 69.80200723054665;
    let g = random_hardy_martingale(&cfg).unwrap();
    let rep = theorem_quantities(&g, &random_adapted_phases(&cfg).unwrap()).unwrap();
    for step in verify_chain(&rep) {
        assert!(step.pass, "{step:?}");
    }
}

#[test]
fn chain_holds_across_magnitudes() {
    use hardy_core::ensembles::Distribution;
    for (n, depth) in [(4, 1), (4, 2), (4, 4), (8, 1), (8, 3), (16, 1)] {
        for i in 0..500u64 {
            let mut cfg = EnsembleConfig::new(i * 7919 + n as u64 * 31 + depth as u64, n, depth);
            cfg.coefficient_scale = 10f64.powf((i % 25) as f64 / 2.0 - 6.0);
            if i % 2 == 0 {
                cfg.distribution = Distribution::UniformDisk;
            }
            if i % 3 == 0 {
                cfg.max_degree = 1;
            }
            let g = random_hardy_martingale(&cfg).unwrap();
            let rep = theorem_quantities(&g, &random_adapted_phases(&cfg).unwrap()).unwrap();
            for step in verify_chain(&rep) {
                assert!(step.pass, "N={n} depth={depth} i={i}: {step:?}");
            }
        }
    }
}
