use std::sync::Arc;

use kef_core::applications::*;
use kef_core::constitutive::{LawKind, ViscosityLaw};
use kef_core::diagnostics::{continuous_extrema, kappa_entropy};
use kef_core::fields::{leray_project, vector_l2, Grid, ScalarField, VectorField};
use kef_core::solver::*;
use proptest::prelude::*;

fn linear(mu_bar: f64) -> Arc<Model> {
    let law = ViscosityLaw::new(LawKind::Linear { intercept: 0.0, slope: mu_bar }, 0.0, 0.5, 2.0).unwrap();
    Arc::new(Model::new(law).unwrap())
}

fn random_flux(g: &Grid, seed: u64) -> VectorField {
    RandomData::new(seed).generate(g).u.scale(0.3)
}

#[test]
fn capillary_force_of_constant_density_is_zero() {
    let g = Grid::periodic(2, 16).unwrap();
    let rho = ScalarField::constant(&g, 1.4);
    assert_eq!(vector_l2(&capillary_direct(&rho)), 0.0);
    assert_eq!(vector_l2(&ghost_capillary(&rho, 0.1, 0.0).unwrap()), 0.0);
    assert!(ghost_capillary(&rho, 0.1, 2.0).is_err());
}

#[test]
fn capillary_forms_agree_on_sine_density() {
    let g = Grid::periodic(2, 128).unwrap();
    let rho = ScalarField::from_fn(&g, |x| 2.0 + x[0].sin());
    assert!(bohm_residual(&rho) < 1e-10, "{:.3e}", bohm_residual(&rho));
}

#[test]
fn one_dimensional_capillary_force_is_a_gradient() {
    let g = Grid::periodic(2, 32).unwrap();
    let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.3 * x[0].cos());
    let f = capillary_direct(&rho);
    assert!(vector_l2(&f) > 1e-3);
    assert!(vector_l2(&leray_project(&f)) < 1e-11);
}

#[test]
fn ghost_entropy_reduces_to_kappa_entropy() {
    let g = Grid::periodic(2, 32).unwrap();
    let m = linear(1.5);
    let s = initial_state(&RandomData::new(4).generate(&g), &m, 0.5, AuxInit::None);
    let base = kappa_entropy(&s, &m, 0.5);
    let e0 = ghost_entropy(&s, &m, 0.5, 0.0).unwrap();
    assert_eq!(e0.entropy, base.e_kappa);
    assert_eq!(e0.capillary_dissipation, 0.0);
    let e1 = ghost_entropy(&s, &m, 0.5, 0.05).unwrap();
    assert!(e1.capillary_energy > 0.0 && e1.terms().iter().all(|t| *t >= 0.0));

    let flat = FluidState { rho: ScalarField::constant(&g, 1.1), w: taylor_green(&g, 1.0), v: None, t: 0.0 };
    let e = ghost_entropy(&flat, &m, 0.5, 0.05).unwrap();
    assert!((e.entropy - 0.5 * 1.1 * vector_l2(&flat.w).powi(2)).abs() < 1e-12 * e.entropy);
    assert_eq!(e.capillary_energy, 0.0);
    assert_eq!(e.capillary_dissipation, 0.0);
}

#[test]
fn ghost_requires_linear_viscosity() {
    let sqrt = ViscosityLaw::new(LawKind::Power { coefficient: 1.0, alpha: 0.5 }, 0.0, 0.5, 2.0).unwrap();
    assert!(linear_coefficient(&sqrt).is_err());
    let m = Model::new(sqrt).unwrap();
    let g = Grid::periodic(2, 16).unwrap();
    let s = FluidState { rho: ScalarField::constant(&g, 1.0), w: VectorField::zeros(&g), v: None, t: 0.0 };
    assert!(ghost_entropy(&s, &m, 0.5, 0.1).is_err());
    assert_eq!(linear_coefficient(&linear(2.5).law).unwrap(), 2.5);
    let c = GhostConfig { capillarity: 0.05, kappa: 0.5, mu_bar: 1.0 };
    assert!(c.validate().is_ok());
    assert!(GhostConfig { capillarity: 0.0, ..c }.validate().is_err());
    assert!(GhostConfig { kappa: 1.5, ..c }.validate().is_err());
    assert_eq!(c.solver_config(g, 1e-3, 0.1).capillarity, 0.05);
}

#[test]
fn short_ghost_run_keeps_entropy_monotone() {
    let g = Grid::periodic(2, 32).unwrap();
    let c = GhostConfig { capillarity: 0.05, kappa: 0.5, mu_bar: 1.0 };
    let m = Arc::new(Model::new(c.law(0.5, 2.0).unwrap()).unwrap());
    let s = initial_state(&RandomData::new(6).generate(&g), &m, 0.5, AuxInit::None);
    let traj = run(&c.solver_config(g, 5e-4, 0.02), m, s).unwrap();
    assert!(traj.passed(), "{:?}", traj.failures());
    let last = traj.rows.last().unwrap();
    assert!(last.get("ghost_entropy").unwrap() < traj.rows[0].get("ghost_entropy").unwrap());
    let b = last.get("bohm_residual").unwrap();
    // aliasing level at N = 32
    assert!(b < 1e-5, "{b:.3e}");
}

#[test]
fn mixture_configuration_rules() {
    let c = MixtureConfig::from_laws(
        PowerCoefficient { coefficient: 0.5, exponent: 1.0 },
        PowerCoefficient { coefficient: 2.0, exponent: 1.0 },
    )
    .unwrap();
    assert_eq!(c.kappa, 0.25);
    assert_eq!(c.c0(2.0), 1.0);
    assert!(MixtureConfig::from_laws(
        PowerCoefficient { coefficient: 0.5, exponent: 1.0 },
        PowerCoefficient { coefficient: 2.0, exponent: 0.5 },
    )
    .is_err());
    assert!(MixtureConfig::from_laws(
        PowerCoefficient { coefficient: 3.0, exponent: 1.0 },
        PowerCoefficient { coefficient: 2.0, exponent: 1.0 },
    )
    .is_err());
    // c̃₀ = aρ^β gives μ' = c̃₀/(2ρ)
    let law = MixtureConfig::new(PowerCoefficient { coefficient: 3.0, exponent: 0.5 }, 0.5).viscosity_law(0.5, 2.0);
    for s in [0.5, 1.0, 1.7] {
        let (_, dmu) = law.eval(s);
        assert!((dmu - 3.0 * s.powf(0.5) / (2.0 * s)).abs() < 1e-14);
    }
}

#[test]
fn constant_c0_condition_matches_induced_admissibility() {
    // c₀ = κ constant: c̃₀ = 1, μ = (1/2) log ρ
    let cfg = MixtureConfig::new(PowerCoefficient { coefficient: 1.0, exponent: 0.0 }, 0.5);
    for d in [2usize, 3] {
        for i in 0..40 {
            let big_r = 1.1 + 0.25 * i as f64;
            let threshold = (d as f64 / (d as f64 - 1.0)).exp();
            if (big_r - threshold).abs() < 1e-3 {
                continue;
            }
            let rep = mixture_admissibility(&cfg, 1.05, big_r, d).unwrap();
            assert_eq!(rep.satisfied, constant_c0_condition(d, big_r), "d = {d}, R = {big_r}");
        }
    }
}

#[test]
fn mixture_constraint_and_temperature_chain() {
    let g = Grid::periodic(2, 32).unwrap();
    let cfg = MixtureConfig::new(PowerCoefficient { coefficient: 1.0, exponent: 0.0 }, 0.5);
    let m = cfg.model(1.2, 3.0).unwrap();
    let mut data = RandomData::new(9);
    data.rho_mean = 2.0;
    data.rho_amplitude = 0.5;
    let s = initial_state(&data.generate(&g), &m, cfg.kappa, AuxInit::None);
    assert!(mixture_constraint_check(&s, &m, &cfg, 4) < 1e-11);
    let flat = FluidState { rho: ScalarField::constant(&g, 2.0), ..s.clone() };
    let v = mixture_constraint_check(&flat, &m, &cfg, 1);
    assert!(v < 1e-14, "{v:.3e}");
    let y1 = ScalarField::from_fn(&g, |x| 0.5 + 0.3 * x[0].sin() * x[1].cos());
    assert!(temperature_chain_residual(&s.rho, &y1, &cfg, 4) < 1e-11);
}

#[test]
fn mixture_flow_block_matches_core_solver() {
    let g = Grid::periodic(2, 32).unwrap();
    let cfg = MixtureConfig::new(PowerCoefficient { coefficient: 2.0, exponent: 1.5 }, 0.4);
    let mix = Arc::new(cfg.model(0.5, 2.0).unwrap());
    let core = ViscosityLaw::new(LawKind::Power { coefficient: 2.0 / 3.0, alpha: 1.5 }, 0.0, 0.5, 2.0).unwrap();
    let core = Arc::new(Model::new(core).unwrap());
    let s = initial_state(&RandomData::new(2).generate(&g), &core, 0.4, AuxInit::None);
    let sc = SolverConfig::new(g, 0.4, 1e-3, 0.1);
    let a = rhs_w(&sc, mix.clone(), &s).unwrap();
    let b = rhs_w(&sc, core.clone(), &s).unwrap();
    assert!(vector_l2(&a.axpy(-1.0, &b).unwrap()) <= 1e-13 * vector_l2(&b));
    let ra = rhs_continuity(&sc, mix, &s).unwrap();
    let rb = rhs_continuity(&sc, core, &s).unwrap();
    assert!(kef_core::fields::l2(&(&ra - &rb)) <= 1e-13 * kef_core::fields::l2(&rb));
}

#[test]
fn constant_mass_fraction_is_unchanged() {
    let g = Grid::periodic(2, 32).unwrap();
    let rho = RandomData::new(3).generate(&g).rho;
    let y = ScalarField::constant(&g, 0.3);
    let (y1, _) = species_step(&y, &rho, &random_flux(&g, 5), &|s| 0.5 * s, 1e-2).unwrap();
    let (lo, hi) = y1.min_max();
    assert!((lo - 0.3).abs() < 1e-13 && (hi - 0.3).abs() < 1e-13, "{lo} {hi}");
}

#[test]
fn heat_equation_limit_keeps_the_range() {
    let g = Grid::periodic(2, 32).unwrap();
    let rho = ScalarField::constant(&g, 1.0);
    let mut y = ScalarField::from_fn(&g, |x| 0.5 + 0.3 * x[0].sin() * x[1].cos());
    let e0 = continuous_extrema(&y);
    let zero = VectorField::zeros(&g);
    for _ in 0..20 {
        y = species_step(&y, &rho, &zero, &|_| 0.2, 1e-2).unwrap().0;
        let e = continuous_extrema(&y);
        assert!(e.min >= e0.min - 1e-10 && e.max <= e0.max + 1e-10);
    }
    // single mode decays as 1/(1 + 2·0.2·dt) per step
    let expect = 0.3 / (1.0f64 + 2.0 * 0.2 * 1e-2).powi(20);
    assert!((continuous_extrema(&y).max - 0.5 - expect).abs() < 1e-12);
}

#[test]
fn coupled_run_conserves_species_mass() {
    let g = Grid::periodic(2, 32).unwrap();
    let cfg = MixtureConfig::new(PowerCoefficient { coefficient: 2.0, exponent: 1.0 }, 0.5);
    let m = Arc::new(cfg.model(0.5, 2.0).unwrap());
    let s = initial_state(&RandomData::new(12).generate(&g), &m, 0.5, AuxInit::None);
    let y1 = ScalarField::from_fn(&g, |x| 0.5 + 0.3 * x[0].sin() * x[1].cos());
    let sc = SolverConfig::new(g, 0.5, 1e-3, 0.02);
    let mut tracker = SpeciesTracker::new(cfg, &s.rho, y1, sc.dt);
    let traj = run_with(&sc, m, s, None, &mut tracker, MonitorTolerances::default()).unwrap();
    assert!(traj.passed(), "{:?}", traj.failures());
    assert!(tracker.max_mass_drift < 1e-10);
    let sum = &tracker.y1 + &tracker.y2();
    let (lo, hi) = sum.min_max();
    assert_eq!((lo, hi), (1.0, 1.0));
    assert!(traj.rows.iter().all(|r| r.get("int_rhoY1").is_some()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn species_step_is_conservative(seed in 0u64..10_000, dt in 1e-3f64..5e-2) {
        let g = Grid::periodic(2, 16).unwrap();
        let rho = RandomData::new(seed).generate(&g).rho;
        let y = ScalarField::from_fn(&g, |x| 0.5 + 0.2 * (x[0] + seed as f64).cos());
        let f = random_flux(&g, seed + 1);
        let (y1, _) = species_step(&y, &rho, &f, &|s| 0.3 * s, dt).unwrap();
        let rho1 = rho.axpy(-dt, &kef_core::fields::div(&f)).unwrap();
        let a = int_rho_y(&rho, &y);
        let b = int_rho_y(&rho1, &y1);
        prop_assert!(((b - a) / a).abs() < 1e-12, "{:.3e}", (b - a) / a);
    }

    #[test]
    fn capillary_forms_agree_on_random_densities(seed in 0u64..10_000) {
        let g = Grid::periodic(2, 64).unwrap();
        let rho = RandomData::new(seed).generate(&g).rho;
        prop_assert!(bohm_residual(&rho) < 1e-10, "{:.3e}", bohm_residual(&rho));
    }
}
