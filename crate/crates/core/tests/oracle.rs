use alr_core::oracle::*;
use alr_core::presets::{designer_data, inverse_square_data, trig_polynomial};
use alr_core::problem1::mode_response;
use alr_core::rate::log_grid;
use alr_core::{solve_modes, Complex64, HarmonicField, ModalCoefficients, QuadratureGrid, Region, SolverConfig};
use proptest::prelude::*;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn system_rows_encode_the_interface_conditions() {
    let (n, r, d) = (3u32, 2.0f64, 0.25f64);
    let s = TransmissionSystem::new(n, c(1.5, -0.5), r, d);
    let [cc, p, q] = s.solve().unwrap();
    let nf = n as f64;
    // Dirichlet at R, continuity at 1, flux at 1
    assert!((p * r.powi(3) + q * r.powi(-3) - c(1.5, -0.5)).norm() < 1e-14);
    assert!((cc - p - q).norm() < 1e-14);
    assert!((c(-1.0, d) * nf * cc - nf * (p - q)).norm() < 1e-13);
    assert_eq!(s.rhs[0], c(1.5, -0.5));
}

#[test]
fn worked_example_and_limits() {
    let (cc, _, _) = mode_transmission_oracle(1, c(1.0, 0.0), 2.0, 1.0).unwrap();
    assert!((cc - c(0.615385, -0.923077)).norm() < 1e-6);
    assert!((cc - mode_response(1, 2.0, 1.0)).norm() < 1e-15);

    let (cc, p, q) = mode_transmission_oracle(1, c(1.0, 0.0), 3.0, 1e-12).unwrap();
    assert!((cc - c(3.0, 0.0)).norm() < 1e-10);
    assert!(p.norm() < 1e-10);
    assert!((q - cc).norm() < 1e-10);

    assert_eq!(mode_transmission_oracle(4, ZERO, 3.0, 0.1).unwrap(), (ZERO, ZERO, ZERO));
    assert!(mode_transmission_oracle(0, c(1.0, 0.0), 3.0, 0.1).is_err());
    assert!(mode_transmission_oracle(1, c(1.0, 0.0), 1.0, 0.1).is_err());
    assert!(mode_transmission_oracle(1, c(1.0, 0.0), 3.0, 0.0).is_err());
}

#[test]
fn zero_field_has_zero_quadrature_energy() {
    let f = HarmonicField::disk(1.0, ModalCoefficients::zeros(4)).unwrap();
    assert_eq!(quadrature_energy(&f, &Region::Disk { radius: 1.0 }, &QuadratureGrid::for_modes(4)).unwrap(), 0.0);
}

#[test]
fn core_shell_energies_match_quadrature() {
    let h = trig_polynomial(&[(1, c(1.0, 0.0)), (-2, c(0.3, 0.2)), (5, c(0.0, -0.7))]).unwrap();
    for delta in [0.1, 1e-3, 1e-6] {
        let sol = solve_modes(&h, SolverConfig::new(3.0, delta, 5).unwrap()).unwrap();
        let grid = QuadratureGrid::for_modes(5);
        let field = sol.field();
        let core = quadrature_energy(&field, &Region::Disk { radius: 1.0 }, &grid).unwrap();
        assert!((core - sol.core_energy()).abs() <= 1e-8 * sol.core_energy(), "δ={delta}");
        let total = quadrature_energy(&field, &Region::Disk { radius: 3.0 }, &grid).unwrap();
        assert!((total - sol.grad_energy()).abs() <= 1e-8 * sol.grad_energy(), "δ={delta}");
    }
}

#[test]
fn energy_identity_single_mode_and_constant() {
    let constant = ModalCoefficients::from_generator(3, |n| if n == 0 { c(2.0, 0.0) } else { ZERO }).unwrap();
    let b = energy_identity_check(&solve_modes(&constant, SolverConfig::new(3.0, 0.1, 3).unwrap()).unwrap());
    assert_eq!((b.boundary_flux, b.dissipation, b.residual), (0.0, 0.0, 0.0));

    for delta in [0.5, 0.1, 1e-4, 1e-9, 1e-13] {
        for n in [1i64, 4, -7] {
            let h = trig_polynomial(&[(n, c(0.6, -0.8))]).unwrap();
            let sol = solve_modes(&h, SolverConfig::new(2.0, delta, n.unsigned_abs() as usize).unwrap()).unwrap();
            let b = energy_identity_check(&sol);
            assert!(b.residual <= 1e-12, "n={n} δ={delta}: {b:?}");
            assert!(b.dissipation > 0.0);
        }
    }
}

#[test]
fn energy_identity_across_reference_sweep() {
    let h = inverse_square_data(100).unwrap();
    for k in 2..=20 {
        let delta = 10f64.powi(-k);
        let sol = solve_modes(&h, SolverConfig::new(3.0, delta, 100).unwrap()).unwrap();
        let b = energy_identity_check(&sol);
        assert!(b.residual <= 1e-9, "δ=1e-{k}: {b:?}");
    }
}

#[test]
fn lemma2_reference_data_stays_bounded() {
    let h = inverse_square_data(100).unwrap();
    let probe = lemma2_bound_probe(&h, 3.0, &log_grid(1e-20, 1e-2, 19)).unwrap();
    assert!(probe.max.is_finite());
    assert!(probe.fit.slope >= -0.02, "slope {}", probe.fit.slope);
}

#[test]
fn lemma2_compatible_product_vanishes() {
    let h = trig_polynomial(&[(1, c(1.0, 0.0)), (2, c(0.5, 0.0))]).unwrap();
    let probe = lemma2_bound_probe(&h, 3.0, &log_grid(1e-12, 1e-6, 7)).unwrap();
    assert!((probe.fit.slope - 1.0).abs() < 0.01, "slope {}", probe.fit.slope);
    // grid runs from the largest loss down
    assert!(probe.products.last().unwrap() < &probe.products[0]);
}

#[test]
fn lemma2_designer_rate() {
    // ‖u‖² ~ δ^{-2α}, so δ‖u‖ ~ δ^{1-α}
    let h = designer_data(0.4, 3.0, 400).unwrap();
    let probe = lemma2_bound_probe(&h, 3.0, &log_grid(1e-10, 1e-4, 13)).unwrap();
    assert!((probe.fit.slope - 0.6).abs() < 0.03, "slope {}", probe.fit.slope);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn oracle_matches_closed_form(n in 1u32..=50, r_idx in 0usize..4, log_d in -12.0f64..-0.31, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let r = [1.5, 2.0, 3.0, 10.0][r_idx];
        let d = 10f64.powf(log_d);
        let h = c(re, im);
        prop_assume!(h.norm() > 1e-3);
        let (cc, p, q) = mode_transmission_oracle(n, h, r, d).unwrap();
        let want = mode_response(n, r, d) * h;
        prop_assert!((cc - want).norm() <= 1e-12 * want.norm());
        prop_assert!((p + q - cc).norm() <= 1e-12 * cc.norm());
    }

    #[test]
    fn fd_solution_is_linear_in_the_source(s in -2.0f64..2.0) {
        let a = fd_radial_bvp(2, |r| c(r * r, 0.0), 1000).unwrap().trace();
        let b = fd_radial_bvp(2, move |r| c(s * r * r, 0.0), 1000).unwrap().trace();
        prop_assert!((b - a * s).norm() <= 1e-12 * a.norm().max(1.0));
    }
}
