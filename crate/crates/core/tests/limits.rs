use kef_core::fields::{l2, vector_l2, Grid};
use kef_core::limits::*;
use proptest::prelude::*;

fn plan(target: SweepTarget, n: usize) -> SweepPlan {
    let mut p = SweepPlan::new(target, Grid::periodic(2, n).unwrap(), 2e-3, 0.1);
    p.snapshots = 5;
    p.diagnostics_every = 5;
    p
}

#[test]
fn targets_and_default_lists() {
    assert_eq!(SweepTarget::KappaToZero.endpoint(), 0.0);
    assert_eq!(SweepTarget::KappaToOne.endpoint(), 1.0);
    for t in [SweepTarget::KappaToZero, SweepTarget::KappaToOne] {
        let k = t.default_kappas();
        assert!(k.len() >= 3);
        let d: Vec<f64> = k.iter().map(|x| (x - t.endpoint()).abs()).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{k:?}");
    }
}

#[test]
fn invalid_kappa_lists_are_rejected() {
    let mut p = plan(SweepTarget::KappaToZero, 16);
    p.kappas = vec![];
    assert!(p.validate().is_err());
    p.kappas = vec![0.1, 0.0];
    assert!(p.validate().is_err());
    p.kappas = vec![1.0];
    assert!(p.validate().is_err());
}

#[test]
fn members_share_initial_w() {
    let p = plan(SweepTarget::KappaToZero, 32);
    let model = p.model().unwrap();
    let u0 = p.shared_data().u;
    for k in [0.0, 0.1, 0.5, 1.0] {
        let s = p.initial(&model, k);
        let d = vector_l2(&s.w.axpy(-1.0, &u0).unwrap()) / vector_l2(&u0);
        assert!(d < 1e-14, "kappa {k}: {d:.3e}");
    }
}

#[test]
fn frozen_data_stays_frozen_at_kappa_zero() {
    let mut p = plan(SweepTarget::KappaToZero, 16);
    p.data.velocity_rms = 0.0;
    let traj = reference_incompressible(&p).unwrap();
    let first = &traj.states[0];
    let last = traj.states.last().unwrap();
    assert!(l2(&(&last.rho - &first.rho)) < 1e-14);
    assert!(vector_l2(&last.w) < 1e-14);
}

#[test]
fn transport_endpoint_conserves_density_moments() {
    let p = plan(SweepTarget::KappaToZero, 32);
    let traj = reference_incompressible(&p).unwrap();
    let sq = |s: &kef_core::solver::FluidState| l2(&s.rho).powi(2);
    let a = sq(&traj.states[0]);
    let b = sq(traj.states.last().unwrap());
    assert!(((b - a) / a).abs() < 1e-6, "{:.3e}", (b - a) / a);
    assert!(traj.passed(), "{:?}", traj.failures());
}

#[test]
fn ks_endpoint_diffuses_density_with_fixed_mass() {
    let p = plan(SweepTarget::KappaToOne, 16);
    let traj = reference_ks(&p).unwrap();
    let first = &traj.states[0].rho;
    let last = &traj.states.last().unwrap().rho;
    assert!(((last.integral() - first.integral()) / first.integral()).abs() < 1e-13);
    let (lo0, hi0) = first.min_max();
    let (lo1, hi1) = last.min_max();
    assert!(hi1 - lo1 < hi0 - lo0);
}

#[test]
fn small_sweep_approaches_each_endpoint() {
    for target in [SweepTarget::KappaToZero, SweepTarget::KappaToOne] {
        let mut p = plan(target, 32);
        p.kappas = match target {
            SweepTarget::KappaToZero => vec![0.05, 0.2, 0.1],
            SweepTarget::KappaToOne => vec![0.8, 0.95, 0.9],
        };
        let rep = kappa_sweep(&p).unwrap();
        assert!(!rep.tainted(), "{:?}", rep.rows.iter().map(|r| &r.failures).collect::<Vec<_>>());
        let ks: Vec<f64> = rep.rows.iter().map(|r| r.kappa).collect();
        let d: Vec<f64> = ks.iter().map(|k| (k - target.endpoint()).abs()).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{ks:?}");
        assert!(rep.dist_rho_decreasing() && rep.dist_w_decreasing(), "{target:?}");
        assert!(rep.rows.iter().all(|r| r.vanish_obs > 0.0 && r.entropy_final < r.entropy_initial));
        let (sr, sw) = rep.empirical_slopes();
        assert!(sr > 0.0 && sw > 0.0);
        assert_eq!(rep.records().len(), 3);
        assert!(rep.vanishing_ratio() < 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn member_distance_vanishes_only_at_endpoint(seed in 0u64..1000) {
        let mut p = plan(SweepTarget::KappaToZero, 16);
        p.t_end = 0.02;
        p.data.seed = seed;
        let reference = reference_incompressible(&p).unwrap();
        let (same, _) = sweep_member(&p, 1e-300).unwrap();
        let row = compare(&reference, 1e-300, &same, 0.0);
        prop_assert!(row.dist_rho < 1e-12 && row.dist_w < 1e-12, "{:?}", row);
    }
}
