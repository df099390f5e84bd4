use kef_core::fields::{div, l2, Grid};
use kef_core::solver::{amplification, Scheme};
use kef_core::verification::*;
use proptest::prelude::*;

#[test]
fn fitted_slope_of_exact_power_law() {
    let h = [0.4, 0.2, 0.1, 0.05];
    let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
    assert!((fit_slope(&h, &e) - 2.0).abs() < 1e-12);
    let rep = ConvergenceReport::from_errors(h.to_vec(), e.clone(), e);
    assert!(rep.orders.iter().all(|o| (o - 2.0).abs() < 1e-12));
    assert!(!rep.unresolved);
    let csv = rep.to_csv();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("size,error_l2,error_linf,order\n"));
}

#[test]
fn stagnating_error_above_plateau_is_unresolved() {
    let rep = ConvergenceReport::from_errors(vec![0.2, 0.1, 0.05], vec![1e-3, 1e-4, 1e-4], vec![1e-3, 1e-4, 1e-4]);
    assert!(rep.unresolved);
    let rep = ConvergenceReport::from_errors(vec![0.2, 0.1, 0.05], vec![1e-3, 1e-13, 2e-13], vec![0.0; 3]);
    assert!(!rep.unresolved);
}

#[test]
fn manufactured_sources_are_consistent() {
    let g = Grid::periodic(2, 32).unwrap();
    for case in [ManufacturedCase::new(0.3), ManufacturedCase::steady(0.3), ManufacturedCase::new(0.7)] {
        for t in [0.0, 0.37] {
            let r = case.source_residual(&g, t).unwrap();
            assert!(r < 1e-10, "kappa {} steady {} t {t}: {r:.3e}", case.kappa, case.steady);
        }
    }
}

#[test]
fn manufactured_state_is_admissible() {
    let g = Grid::periodic(2, 32).unwrap();
    let case = ManufacturedCase::new(0.3);
    let s = case.exact(&g, 0.8);
    assert!(l2(&div(&s.w)) < 1e-13);
    let (lo, hi) = s.rho.min_max();
    let (r, big_r) = case.interval();
    assert!(lo >= r && hi <= big_r);
    assert!((s.rho.mean() - case.rho_mean).abs() < 1e-14);
    assert!(case.check_grid(&Grid::periodic(3, 16).unwrap()).is_err());
}

#[test]
fn steady_case_is_held_to_round_off() {
    let case = ManufacturedCase::steady(0.3);
    let g = Grid::periodic(2, 32).unwrap();
    let (e2, einf) = mms_run(&case, &case.config(g, 1e-2, 0.2)).unwrap();
    assert!(e2 < 1e-12 && einf < 1e-12, "{e2:.3e} {einf:.3e}");
}

#[test]
fn temporal_orders_of_both_schemes() {
    let case = ManufacturedCase::new(0.3);
    let dts = [0.04, 0.02, 0.01];
    let r1 = mms_temporal(&case, 32, &dts, 0.4, Scheme::Imex1).unwrap();
    let r2 = mms_temporal(&case, 32, &dts, 0.4, Scheme::Imex2).unwrap();
    assert!((0.85..1.15).contains(&r1.fitted_order), "{:?}", r1.orders);
    assert!((1.85..2.15).contains(&r2.fitted_order), "{:?}", r2.orders);
    assert!(r2.errors_l2[2] < r1.errors_l2[2]);
}

#[test]
fn identification_error_shrinks_with_mollification() {
    let mut cfg = IdentificationConfig::new(Grid::periodic(2, 32).unwrap(), 1e-3, 0.05);
    cfg.deltas = vec![0.2, 0.0];
    cfg.etas = vec![0.0, 0.1];
    cfg.every = 5;
    let rep = identification_experiment(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 4);
    let exact = rep.row(0.0, 0.0).unwrap();
    assert_eq!(exact.initial, 0.0);
    assert!(exact.max_l2 < 1e-6, "{:.3e}", exact.max_l2);
    assert!(rep.row(0.2, 0.0).unwrap().max_l2 > exact.max_l2);
    let pert = rep.row(0.0, 0.1).unwrap();
    assert!(pert.initial > 0.0 && pert.final_l2 <= GROWTH_BOUND * pert.initial);
    assert!(rep.passed());
    assert_eq!(rep.to_csv().lines().next().map(|l| l.split(',').count()), Some(6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slope_fit_recovers_power(p in -3.0f64..3.0, c in 0.1f64..10.0) {
        let x = [1.0f64, 0.5, 0.25, 0.125];
        let y: Vec<f64> = x.iter().map(|v| c * v.powf(p)).collect();
        prop_assert!((fit_slope(&x, &y) - p).abs() < 1e-10);
    }

    #[test]
    fn implicit_diffusion_never_amplifies(z in -1e6f64..0.0) {
        for scheme in [Scheme::Imex1, Scheme::Imex2] {
            let a = amplification(scheme, z, 1.0);
            prop_assert!(a.abs() <= 1.0 + 1e-15, "{scheme:?} {z} {a}");
            prop_assert_eq!(stokes_oracle(scheme, 1.0, -z, 1.0), a);
        }
    }
}
