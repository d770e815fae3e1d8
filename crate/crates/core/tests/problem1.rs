use alr_core::kelvin::verify_transmission;
use alr_core::oracle::{mode_transmission_oracle, quadrature_energy};
use alr_core::presets::{geometric_data, inverse_square_data, trig_polynomial};
use alr_core::problem1::*;
use alr_core::rate::log_grid;
use alr_core::{h_half_norm, Complex64, ModalCoefficients, PolarPoint, QuadratureGrid, Region};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

#[test]
fn truncation_order_examples() {
    for k in 1..=12 {
        assert_eq!(truncation_order(3f64.powi(-2 * k), 3.0), k as usize);
        assert_eq!(truncation_order(1.5f64.powi(-2 * k), 1.5), k as usize);
    }
    assert_eq!(truncation_order(1e-14, 3.0), 15);
    assert_eq!(truncation_order(1.0 - 1e-12, 3.0), 1);
    assert_eq!(SolverConfig::auto(3.0, 1e-14).unwrap().order(), 60);
}

#[test]
fn config_rejects_bad_parameters() {
    assert!(SolverConfig::new(1.0, 0.1, 4).is_err());
    assert!(SolverConfig::new(3.0, 0.0, 4).is_err());
    assert!(SolverConfig::new(3.0, 1.0, 4).is_err());
    assert!(SolverConfig::new(3.0, 0.1, 0).is_err());
}

#[test]
fn constant_data_gives_constant_solution() {
    let h = ModalCoefficients::from_generator(5, |n| if n == 0 { c(2.5, -1.0) } else { c(0.0, 0.0) }).unwrap();
    let sol = solve_modes(&h, SolverConfig::new(3.0, 0.01, 5).unwrap()).unwrap();
    assert_eq!(sol.c.zero_mode(), c(2.5, -1.0));
    assert_eq!(sol.a.zero_mode(), c(2.5, -1.0));
    assert_eq!(sol.b.zero_mode(), c(0.0, 0.0));
    assert_eq!(sol.c.max_abs(), c(2.5, -1.0).norm());
    let u = sol.field();
    for r in [0.0, 0.3, 1.0, 2.2, 3.0] {
        let v = u.evaluate(PolarPoint::new(r, 1.1).unwrap()).unwrap();
        assert!((v - c(2.5, -1.0)).norm() < 1e-15);
    }
    assert_eq!(sol.power(), 0.0);
}

#[test]
fn single_mode_worked_example() {
    let want = mode_response(1, 2.0, 1.0);
    assert!(rel(want, c(8.0 / 13.0, -12.0 / 13.0)) < 1e-15);
    assert!((want - c(0.615385, -0.923077)).norm() < 1e-6);
}

#[test]
fn lossless_limit_of_mode_one() {
    let h = trig_polynomial(&[(1, c(1.0, 0.0))]).unwrap();
    let sol = solve_modes(&h, SolverConfig::new(3.0, 1e-12, 1).unwrap()).unwrap();
    let (oc, op, _) = mode_transmission_oracle(1, c(1.0, 0.0), 3.0, 1e-12).unwrap();
    assert!((sol.c.get(1) - c(3.0, 0.0)).norm() < 1e-10);
    assert!(sol.b.get(1).norm() < 1e-10);
    assert!((sol.c.get(1) - oc).norm() < 1e-10);
    assert!((sol.b.get(1) - op).norm() < 1e-10);
}

#[test]
fn oracle_equivalence_on_fixed_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..1000 {
        let radius = [1.5, 2.0, 3.0, 10.0][rng.gen_range(0..4)];
        let delta = 10f64.powf(rng.gen_range(-12.0..0.5f64.log10()));
        let n = rng.gen_range(1..=50u32);
        let h = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (oc, op, oq) = mode_transmission_oracle(n, h, radius, delta).unwrap();
        let cn = h * mode_response(n, radius, delta);
        let an = cn * c(2.0, -delta) / 2.0;
        let bn = cn * c(0.0, delta) / 2.0;
        assert!(rel(cn, oc) <= 1e-12, "c: n={n} R={radius} δ={delta:e} {}", rel(cn, oc));
        assert!(rel(an, oq) <= 1e-12, "a: n={n} R={radius} δ={delta:e}");
        assert!(rel(bn, op) <= 1e-12, "b: n={n} R={radius} δ={delta:e}");
    }
}

#[test]
fn boundary_trace_and_transmission() {
    let h = inverse_square_data(40).unwrap();
    let cfg = SolverConfig::new(3.0, 1e-6, 40).unwrap();
    let sol = solve_modes(&h, cfg).unwrap();
    let u = sol.field();
    let v = sol.shell_field();
    let core = alr_core::HarmonicField::disk(1.0, sol.c.clone()).unwrap();
    let scale = sol.c.max_abs();
    for k in 0..128 {
        let t = 2.0 * std::f64::consts::PI * k as f64 / 128.0;
        let at_r = u.evaluate(PolarPoint::new(3.0, t).unwrap()).unwrap();
        assert!((at_r - h.synthesize(t)).norm() < 1e-12, "trace at R, θ={t}");
        let p = PolarPoint::new(1.0, t).unwrap();
        let inside = core.evaluate(p).unwrap();
        let outside = sol.matrix_field().evaluate(p).unwrap();
        assert!((inside - outside).norm() <= 1e-10 * scale);
        // ∂_ν v_δ = (1 - iδ) ∂_ν u_δ on the unit circle
        let dv = v.gradient(p).unwrap()[0];
        let du = core.gradient(p).unwrap()[0];
        assert!((dv - c(1.0, -1e-6) * du).norm() <= 1e-10 * scale * 40.0);
    }
    let report = verify_transmission(&v, &sol.matrix_field(), 1.0, 128, 1e-10 * scale * 40.0).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn trace_on_inner_circle_matches_limit_plus_gap() {
    let h = inverse_square_data(100).unwrap();
    let sol = solve_modes(&h, SolverConfig::new(3.0, 1e-14, 100).unwrap()).unwrap();
    let u = sol.field();
    let trace = h.map_modes(|n, hn| hn + sol.gap_coefficients().get(n));
    for k in 0..64 {
        let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
        let got = u.evaluate(PolarPoint::new(1.0 / 3.0, t).unwrap()).unwrap();
        assert!((got - trace.synthesize(t)).norm() < 1e-10, "θ = {t}");
    }
}

#[test]
fn reference_configuration_is_bounded_near_origin() {
    let h = inverse_square_data(100).unwrap();
    let sol = solve_modes(&h, SolverConfig::new(3.0, 1e-14, 100).unwrap()).unwrap();
    let v = limit_field_v(&h, 3.0).unwrap();
    let u = sol.field();
    let mut v_max: f64 = 0.0;
    let mut u_inner: f64 = 0.0;
    let mut u_shell: f64 = 0.0;
    for i in 0..40 {
        for k in 0..64 {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let r_in = (1.0 / 6.0) * i as f64 / 39.0;
            v_max = v_max.max(v.evaluate(PolarPoint::new(r_in, t).unwrap()).unwrap().norm());
            u_inner = u_inner.max(u.evaluate(PolarPoint::new(r_in, t).unwrap()).unwrap().norm());
            let r_sh = 1.0 / 3.0 + (3.0 - 1.0 / 3.0) * i as f64 / 39.0;
            u_shell = u_shell.max(u.evaluate(PolarPoint::new(r_sh, t).unwrap()).unwrap().norm());
        }
    }
    assert!(u_inner <= 2.0 * v_max, "{u_inner} vs {v_max}");
    assert!(u_shell > 1e3, "{u_shell}");
}

#[test]
fn power_matches_quadrature() {
    let h = trig_polynomial(&[(1, c(1.0, 0.0))]).unwrap();
    let sol = solve_modes(&h, SolverConfig::new(3.0, 0.1, 1).unwrap()).unwrap();
    let want = 0.1 * 2.0 * std::f64::consts::PI * sol.c.get(1).norm_sqr();
    assert!((sol.power() - want).abs() < 1e-15 * want);
    let grid = QuadratureGrid::for_modes(1);
    let quad = 0.1 * quadrature_energy(&sol.field(), &Region::Disk { radius: 1.0 }, &grid).unwrap();
    assert!((quad - sol.power()).abs() < 1e-10 * want);
    assert!((power_by_modes(&sol) - sol.power()).abs() < 1e-14 * want);
}

#[test]
fn total_energy_matches_quadrature() {
    let h = inverse_square_data(12).unwrap();
    let sol = solve_modes(&h, SolverConfig::new(2.0, 1e-3, 12).unwrap()).unwrap();
    let grid = QuadratureGrid::for_modes(12);
    let quad = quadrature_energy(&sol.field(), &Region::Disk { radius: 2.0 }, &grid).unwrap();
    assert!((quad - sol.grad_energy()).abs() < 1e-8 * sol.grad_energy());
}

#[test]
fn limit_field_examples() {
    let h = trig_polynomial(&[(1, c(1.0, 0.0))]).unwrap();
    let v = limit_field_v(&h, 2.0).unwrap();
    let p = PolarPoint::new(0.3, 0.7).unwrap();
    assert!((v.evaluate(p).unwrap() - Complex64::from_polar(0.6, 0.7)).norm() < 1e-15);
    let p = PolarPoint::new(0.5, 0.7).unwrap();
    assert!((v.evaluate(p).unwrap() - Complex64::from_polar(1.0, 0.7)).norm() < 1e-15);
    let k = ModalCoefficients::from_generator(3, |n| if n == 0 { c(4.0, 0.0) } else { c(0.0, 0.0) }).unwrap();
    let v = limit_field_v(&k, 2.0).unwrap();
    assert_eq!(v.evaluate(PolarPoint::new(0.2, 2.0).unwrap()).unwrap(), c(4.0, 0.0));
}

#[test]
fn gap_multiplier_examples() {
    // δ R^{2n} ≪ 1: multiplier ≈ δ (R^{2n} - 1)/2
    let (n, r, d) = (2u32, 3.0f64, 1e-9);
    let approx = d * (r.powi(4) - 1.0) / 2.0;
    assert!((gap_multiplier_modulus(n, r, d) - approx).abs() < 1e-6 * approx);
    for n in 1..=500u32 {
        for k in 0..=40 {
            let d = if k == 40 { 0.9 } else { 10f64.powf(-20.0 + 0.5 * k as f64) };
            for r in [1.5, 3.0, 10.0] {
                assert!(gap_multiplier_modulus(n, r, d) <= 1.0);
            }
        }
    }
    let zero = ModalCoefficients::zeros(4);
    let sol = solve_modes(&zero, SolverConfig::new(3.0, 0.1, 4).unwrap()).unwrap();
    assert_eq!(localized_resonance_gap(&sol), 0.0);
}

#[test]
fn gap_equals_modal_difference() {
    let h = inverse_square_data(30).unwrap();
    let sol = solve_modes(&h, SolverConfig::new(3.0, 1e-8, 30).unwrap()).unwrap();
    let direct = h_half_norm(&sol.gap_coefficients()).sqrt();
    let gap = localized_resonance_gap(&sol);
    assert!((direct - gap).abs() < 1e-10 * gap.max(1e-300));
    assert!(gap * gap <= gap_bound(&sol));
}

#[test]
fn compatibility_examples() {
    let finite = trig_polynomial(&[(1, c(1.0, 0.0)), (-3, c(0.0, 2.0)), (5, c(0.5, 0.0))]).unwrap();
    let finite = finite.with_order(40);
    assert_eq!(classify_compatibility(&finite, 3.0, None).unwrap().verdict, Verdict::Compatible);
    let inv = inverse_square_data(100).unwrap();
    let v = classify_compatibility(&inv, 3.0, None).unwrap();
    assert_eq!(v.verdict, Verdict::Incompatible);
    assert!(v.decay_rate.unwrap() > 0.9);
    let geo = geometric_data(1.0 / 9.0, 60).unwrap();
    let v = classify_compatibility(&geo, 3.0, None).unwrap();
    assert_eq!(v.verdict, Verdict::Compatible);
    assert!((v.decay_rate.unwrap() - 1.0 / 9.0).abs() < 1e-10);
    let edge = geometric_data(1.0 / 3.0, 60).unwrap();
    assert_eq!(classify_compatibility(&edge, 3.0, None).unwrap().verdict, Verdict::Borderline);
    let with_tail = TailDescriptor::Geometric { ratio: 1.0 / 3.0, power: -2.0 };
    assert_eq!(classify_compatibility(&edge, 3.0, Some(with_tail)).unwrap().verdict, Verdict::Compatible);
    let short = geometric_data(0.5, 8).unwrap();
    assert_eq!(classify_compatibility(&short, 3.0, None).unwrap().verdict, Verdict::Indeterminate);
}

#[test]
fn summable_rates_agree_with_partial_sums() {
    // Σ n R^{2n} |h_n|² for h_n = R^{-2n}: partial sums converge
    let r: f64 = 3.0;
    let partial = |m: i32| (1..=m).map(|n| n as f64 * r.powi(-2 * n)).sum::<f64>();
    assert!((partial(60) - partial(30)).abs() < 1e-12);
    let h = geometric_data(r.powi(-2), 60).unwrap();
    assert_eq!(classify_compatibility(&h, r, None).unwrap().verdict, Verdict::Compatible);
}

#[test]
fn designer_examples() {
    let h = design_incompatible_data(0.25, 3.0, 10).unwrap();
    assert!((h.get(1).re - 3f64.powf(-0.5)).abs() < 1e-15);
    assert_eq!(h.get(0), c(0.0, 0.0));
    assert_eq!(h.get(-1), h.get(1));
    assert!(design_incompatible_data(0.0, 3.0, 10).is_err());
    assert!(design_incompatible_data(0.5, 3.0, 10).is_err());
    // Σ n R^{-2nγ}/n converges
    let big = design_incompatible_data(0.25, 3.0, 400).unwrap();
    let small = design_incompatible_data(0.25, 3.0, 200).unwrap();
    assert!((h_half_norm(&big) - h_half_norm(&small)).abs() < 1e-12);
}

#[test]
fn designer_rate_for_quarter() {
    let data = BoundaryData::Generator {
        generator: std::sync::Arc::new(|n| {
            let k = n.unsigned_abs() as f64;
            if n == 0 {
                c(0.0, 0.0)
            } else {
                c(3f64.powf(-k * 0.5) / k.sqrt(), 0.0)
            }
        }),
        min_order: 1,
    };
    let fit = delta_sweep(&data, 3.0, &log_grid(1e-10, 1e-4, 13), SweepQuantity::GradEnergy).unwrap();
    assert!(fit.slope_within(-0.5, 0.03), "{fit:?}");
}

#[test]
fn compatible_data_has_bounded_energy() {
    let h = trig_polynomial(&[(1, c(1.0, 0.0)), (4, c(0.3, 0.1))]).unwrap();
    let fit = delta_sweep(&BoundaryData::Coefficients(h), 3.0, &log_grid(1e-12, 1e-6, 7), SweepQuantity::GradEnergy)
        .unwrap();
    assert!(fit.slope.abs() < 0.02, "{fit:?}");
}

#[test]
fn sweep_rejects_short_grids() {
    let h = inverse_square_data(10).unwrap();
    let data = BoundaryData::Coefficients(h);
    assert!(delta_sweep(&data, 3.0, &[1e-3, 1e-2], SweepQuantity::Power).is_err());
}

#[test]
fn sweep_is_order_independent() {
    let h = inverse_square_data(40).unwrap();
    let data = BoundaryData::Coefficients(h);
    let grid = log_grid(1e-12, 1e-3, 10);
    let mut rev = grid.clone();
    rev.reverse();
    let a = solve_sweep(&data, 3.0, &grid).unwrap();
    let b = solve_sweep(&data, 3.0, &rev).unwrap();
    for (x, y) in a.iter().zip(b.iter().rev()) {
        assert_eq!(x, y);
    }
}

#[test]
fn power_never_blows_up() {
    for h in [inverse_square_data(100).unwrap(), design_incompatible_data(0.4, 3.0, 100).unwrap()] {
        let fit = delta_sweep(&BoundaryData::Coefficients(h), 3.0, &log_grid(1e-14, 1e-4, 11), SweepQuantity::Power)
            .unwrap();
        assert!(fit.slope >= -0.05, "{fit:?}");
    }
}

#[test]
fn grad_energy_diverges_for_incompatible_data() {
    let h = inverse_square_data(100).unwrap();
    let mut last = 0.0;
    for k in 4..=20 {
        let e = solve_modes(&h, SolverConfig::new(3.0, 10f64.powi(-k), 100).unwrap()).unwrap().grad_energy();
        assert!(e > last);
        last = e;
    }
}

fn coefficient_strategy(order: usize) -> impl Strategy<Value = ModalCoefficients> {
    let entry = (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b));
    (entry.clone(), prop::collection::vec(entry.clone(), order), prop::collection::vec(entry, order))
        .prop_map(|(z, p, m)| ModalCoefficients::new(z, p, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, rng_algorithm: prop::test_runner::RngAlgorithm::ChaCha, ..ProptestConfig::default() })]

    #[test]
    fn invariants_hold_exactly(h in coefficient_strategy(12), log_d in -12.0..-0.31f64, ri in 0..4usize) {
        let radius = [1.5, 2.0, 3.0, 10.0][ri];
        let sol = solve_modes(&h, SolverConfig::new(radius, 10f64.powf(log_d), 12).unwrap()).unwrap();
        prop_assert!(invariant_residual(&sol) <= 1e-13);
    }

    #[test]
    fn gap_is_bounded_by_data(h in coefficient_strategy(20), log_d in -20.0..-0.1f64) {
        let sol = solve_modes(&h, SolverConfig::new(3.0, 10f64.powf(log_d), 20).unwrap()).unwrap();
        let gap = localized_resonance_gap(&sol);
        prop_assert!(gap * gap <= gap_bound(&sol) * (1.0 + 1e-12));
    }

    #[test]
    fn real_data_gives_real_field(p in prop::collection::vec(-1.0..1.0f64, 6), log_d in -10.0..-1.0f64) {
        let plus: Vec<Complex64> = p.iter().map(|&x| c(x, 0.5 * x)).collect();
        let minus: Vec<Complex64> = plus.iter().map(|z| z.conj()).collect();
        let h = ModalCoefficients::new(c(0.3, 0.0), plus, minus).unwrap().into_real_valued(0.0).unwrap();
        let v = limit_field_v(&h, 3.0).unwrap();
        prop_assert!(v.is_real_valued());
        let x = v.evaluate_real(PolarPoint::new(0.2, 1.0).unwrap()).unwrap();
        prop_assert!(x.is_finite());
        let sol = solve_modes(&h, SolverConfig::new(3.0, 10f64.powf(log_d), 6).unwrap()).unwrap();
        let u = sol.field().evaluate(PolarPoint::new(2.0, 0.4).unwrap()).unwrap();
        // loss makes the field complex, but the trace at R stays real
        let g = sol.field().evaluate(PolarPoint::new(3.0, 0.4).unwrap()).unwrap();
        prop_assert!(g.im.abs() < 1e-12 && u.is_finite());
    }
}
