use std::sync::Arc;

use kef_core::constitutive::{LawKind, ViscosityLaw};
use kef_core::fields::{div, l2, vector_l2, Grid, ScalarField, VectorField};
use kef_core::solver::*;

fn linear_model(r: f64, big_r: f64) -> Arc<Model> {
    let law = ViscosityLaw::new(LawKind::Linear { intercept: 0.0, slope: 1.0 }, 0.0, r, big_r).unwrap();
    Arc::new(Model::new(law).unwrap())
}

fn constant_model() -> Arc<Model> {
    let law = ViscosityLaw::new(LawKind::Power { coefficient: 1.0, alpha: 0.0 }, 0.0, 0.5, 2.0).unwrap();
    Arc::new(Model::new(law).unwrap())
}

fn rel(a: &VectorField, b: &VectorField) -> f64 {
    vector_l2(&a.axpy(-1.0, b).unwrap()) / vector_l2(b).max(1e-300)
}

fn random_state(grid: &Grid, model: &Model, kappa: f64, seed: u64, aux: AuxInit) -> FluidState {
    let data = RandomData::new(seed).generate(grid);
    initial_state(&data, model, kappa, aux)
}

#[test]
fn taylor_green_decay_matches_stability_function() {
    let grid = Grid::periodic(2, 32).unwrap();
    let model = constant_model();
    for scheme in [Scheme::Imex1, Scheme::Imex2] {
        let dt = 1e-2;
        let mut cfg = SolverConfig::new(grid, 0.5, dt, 0.1);
        cfg.scheme = scheme;
        let w0 = taylor_green(&grid, 1.0);
        let mut state = FluidState { rho: ScalarField::constant(&grid, 1.0), w: w0.clone(), v: None, t: 0.0 };
        let mut solver = Solver::new(&cfg, model.clone(), 1.0).unwrap();
        let g = stokes_oracle(scheme, 2.0, 1.0, dt);
        for n in 1..=10 {
            state = solver.step(&state).unwrap().state;
            let expect = w0.scale(g.powi(n));
            assert!(rel(&state.w, &expect) < 1e-10, "{scheme:?} step {n}: {}", rel(&state.w, &expect));
        }
    }
}

#[test]
fn taylor_green_tracks_exponential_decay() {
    let grid = Grid::periodic(2, 32).unwrap();
    let model = constant_model();
    let cfg = SolverConfig::new(grid, 0.3, 1e-3, 0.1);
    let w0 = taylor_green(&grid, 1.0);
    let mut state = FluidState { rho: ScalarField::constant(&grid, 1.0), w: w0.clone(), v: None, t: 0.0 };
    let mut solver = Solver::new(&cfg, model, 1.0).unwrap();
    for _ in 0..cfg.num_steps() {
        state = solver.step(&state).unwrap().state;
        let expect = w0.scale((-2.0 * state.t).exp());
        assert!(rel(&state.w, &expect) < 1e-6);
    }
}

#[test]
fn taylor_green_pressure() {
    let grid = Grid::periodic(2, 32).unwrap();
    let model = constant_model();
    let cfg = SolverConfig::new(grid, 0.5, 1e-3, 0.1);
    let state = FluidState { rho: ScalarField::constant(&grid, 1.0), w: taylor_green(&grid, 1.0), v: None, t: 0.0 };
    let p = recover_pressure(&cfg, model, &state).unwrap();
    let exact = ScalarField::from_fn(&grid, |x| ((2.0 * x[0]).cos() + (2.0 * x[1]).cos()) / 4.0);
    assert!(l2(&(&p - &exact)) < 1e-8 * l2(&exact));
}

#[test]
fn pressure_vanishes_at_rest() {
    let grid = Grid::periodic(2, 16).unwrap();
    let cfg = SolverConfig::new(grid, 0.5, 1e-3, 0.1);
    let state = FluidState { rho: ScalarField::constant(&grid, 1.3), w: VectorField::zeros(&grid), v: None, t: 0.0 };
    let p = recover_pressure(&cfg, linear_model(0.5, 2.0), &state).unwrap();
    assert!(l2(&p) < 1e-14);
}

#[test]
fn rest_state_is_a_fixed_point() {
    let grid = Grid::periodic(2, 16).unwrap();
    let cfg = SolverConfig::new(grid, 0.5, 1e-2, 0.1);
    let s0 = FluidState { rho: ScalarField::constant(&grid, 1.2), w: VectorField::zeros(&grid), v: None, t: 0.0 };
    let mut solver = Solver::new(&cfg, linear_model(0.5, 2.0), 1.2).unwrap();
    let s1 = solver.step(&s0).unwrap().state;
    assert!(l2(&(&s1.rho - &s0.rho)) < 1e-14);
    assert!(vector_l2(&s1.w) < 1e-14);
}

#[test]
fn pure_density_diffusion_matches_stability_function() {
    let grid = Grid::periodic(2, 32).unwrap();
    let model = linear_model(0.5, 2.0);
    for scheme in [Scheme::Imex1, Scheme::Imex2] {
        let kappa = 0.5;
        let dt = 2e-2;
        let mut cfg = SolverConfig::new(grid, kappa, dt, 0.2);
        cfg.scheme = scheme;
        let rho0 = ScalarField::from_fn(&grid, |x| 1.0 + 0.01 * (3.0 * x[0]).sin());
        let mut state = FluidState { rho: rho0.clone(), w: VectorField::zeros(&grid), v: None, t: 0.0 };
        let mut solver = Solver::new(&cfg, model.clone(), 1.0).unwrap();
        let g = stokes_oracle(scheme, 9.0, 2.0 * kappa, dt);
        if scheme == Scheme::Imex1 {
            assert!((g - 1.0 / (1.0 + 2.0 * kappa * 9.0 * dt)).abs() < 1e-15);
        }
        for n in 1..=5 {
            state = solver.step(&state).unwrap().state;
            let dev = &state.rho - &ScalarField::constant(&grid, 1.0);
            let expect = (&rho0 - &ScalarField::constant(&grid, 1.0)).scale(g.powi(n));
            assert!(l2(&(&dev - &expect)) < 1e-10 * l2(&expect));
            assert!(vector_l2(&state.w) < 1e-12);
        }
    }
}

#[test]
fn amplification_limits() {
    // fully explicit limit
    for z in [-0.5, -0.1, 0.2] {
        assert!((amplification(Scheme::Imex1, z, 0.0) - (1.0 + z)).abs() < 1e-15);
        let g = amplification(Scheme::Imex2, z, 0.0);
        assert!((g - (1.0 + z + z * z / 2.0)).abs() < 1e-14, "{g}");
        let gi = amplification(Scheme::Imex2, z, 1.0);
        let gam = IMEX2_GAMMA;
        assert!((gi - (1.0 + (1.0 - 2.0 * gam) * z) / (1.0 - gam * z).powi(2)).abs() < 1e-14);
    }
}

fn params(cfg: &SolverConfig) -> TermParams {
    TermParams { kappa: cfg.kappa, epsilon: cfg.epsilon, mollify_width: cfg.mollify_width, capillarity: cfg.capillarity }
}

#[test]
fn fused_assembly_matches_term_by_term_assembly() {
    let grid = Grid::periodic(2, 32).unwrap();
    let model = linear_model(0.5, 2.0);
    for (mode, aux) in [(Mode::Reduced, AuxInit::None), (Mode::Augmented, AuxInit::Perturbed(0.1))] {
        let state = random_state(&grid, &model, 0.4, 7, aux);
        let mut cfg = SolverConfig::new(grid, 0.4, 1e-3, 0.1);
        cfg.mode = mode;
        cfg.epsilon = 0.01;
        cfg.mollify_width = 0.1;
        cfg.capillarity = 0.05;
        let mut ws = Workspace::new(&cfg, model.clone());
        let tend = ws.tendency(&state).unwrap();
        let (ct, mt) = kappa_terms(&state, &model, params(&cfg));
        let rho_t = &ct.transport + &ct.diffusion;
        assert!(l2(&(&tend.rho - &rho_t)) < 1e-12 * l2(&rho_t));
        assert!(rel(&tend.momentum, &mt.total()) < 1e-12, "{}", rel(&tend.momentum, &mt.total()));
        let flux = mass_flux(&state, &model, cfg.kappa, cfg.mollify_width);
        assert!(rel(&tend.mass_flux, &flux) < 1e-12);
        assert!(l2(&div(&tend.w)) < 1e-12 * kef_core::fields::vector_h1(&tend.w));
    }
}

#[test]
fn endpoint_assemblies_agree_with_the_general_system() {
    let grid = Grid::periodic(2, 32).unwrap();
    let model = linear_model(0.5, 2.0);
    for (kappa, mode) in [(0.0, Mode::IncompressibleNs), (1.0, Mode::KsLimit)] {
        let state = random_state(&grid, &model, kappa, 11, AuxInit::None);
        let (cg, mg) = kappa_terms(&state, &model, TermParams::plain(kappa));
        let (ce, me) = if kappa == 0.0 { incompressible_terms(&state, &model) } else { ks_terms(&state, &model) };
        let close = |a: &ScalarField, b: &ScalarField| l2(&(a - b)) <= 1e-12 * l2(a).max(l2(b)).max(1.0);
        assert!(close(&cg.transport, &ce.transport));
        assert!(close(&cg.diffusion, &ce.diffusion));
        for ((name, a), (_, b)) in mg.list().iter().zip(me.list().iter()) {
            let scale = vector_l2(a).max(vector_l2(b)).max(1.0);
            assert!(vector_l2(&a.axpy(-1.0, b).unwrap()) <= 1e-12 * scale, "{name} at kappa {kappa}");
        }
        let cfg = SolverConfig::new(grid, kappa, 1e-3, 0.1);
        let mut general = Workspace::new(&cfg, model.clone());
        let mut cfg_e = cfg.clone();
        cfg_e.mode = mode;
        let mut dedicated = Workspace::new(&cfg_e, model.clone());
        let a = general.tendency(&state).unwrap();
        let b = dedicated.tendency(&state).unwrap();
        assert!(rel(&a.momentum, &b.momentum) < 1e-12);
        assert!(rel(&a.w, &b.w) < 1e-12);
        assert!(l2(&(&a.rho - &b.rho)) <= 1e-12 * l2(&a.rho));
    }
}

#[test]
fn step_mass_flux_reproduces_the_density_update() {
    let grid = Grid::periodic(2, 32).unwrap();
    let model = linear_model(0.5, 2.0);
    for scheme in [Scheme::Imex1, Scheme::Imex2] {
        let state = random_state(&grid, &model, 0.5, 3, AuxInit::None);
        let mut cfg = SolverConfig::new(grid, 0.5, 1e-2, 0.1);
        cfg.scheme = scheme;
        let mut solver = Solver::new(&cfg, model.clone(), state.rho.mean()).unwrap();
        let out = solver.step(&state).unwrap();
        let pred = state.rho.axpy(-cfg.dt, &div(&out.mass_flux)).unwrap();
        assert!(l2(&(&pred - &out.state.rho)) < 1e-13 * l2(&state.rho), "{scheme:?}");
        assert!(out.max_stage_divergence < 1e-12);
    }
}

#[test]
fn compute_u_satisfies_the_constraint() {
    let grid = Grid::periodic(2, 64).unwrap();
    let model = linear_model(0.5, 2.0);
    let rho = ScalarField::from_fn(&grid, |x| 1.0 + 0.1 * x[0].sin());
    let state = FluidState { rho: rho.clone(), w: taylor_green(&grid, 0.3), v: None, t: 0.0 };
    let u = state.velocity(&model, 0.5);
    let lap_log = kef_core::fields::laplacian(&rho.map(f64::ln));
    let res = &div(&u) + &lap_log.scale(2.0 * 0.5);
    assert!(kef_core::fields::linf(&res) < 1e-11);
    let still = FluidState { rho: ScalarField::constant(&grid, 1.0), ..state.clone() };
    assert!(rel(&still.velocity(&model, 0.5), &still.w) < 1e-15);
}

#[test]
fn aux_tendency_vanishes_for_solenoidal_flow_at_constant_density() {
    let grid = Grid::periodic(2, 32).unwrap();
    let model = linear_model(0.5, 2.0);
    let mut cfg = SolverConfig::new(grid, 0.5, 1e-3, 0.1);
    cfg.mode = Mode::Augmented;
    let state = FluidState {
        rho: ScalarField::constant(&grid, 1.0),
        w: taylor_green(&grid, 1.0),
        v: Some(VectorField::zeros(&grid)),
        t: 0.0,
    };
    let mut ws = Workspace::new(&cfg, model);
    let t = ws.tendency(&state).unwrap();
    assert!(vector_l2(t.v.as_ref().unwrap()) < 1e-12);
}

#[test]
fn zero_end_time_keeps_only_the_initial_state() {
    let grid = Grid::periodic(2, 16).unwrap();
    let model = linear_model(0.5, 2.0);
    let cfg = SolverConfig::new(grid, 0.5, 1e-3, 0.0);
    let s = random_state(&grid, &model, 0.5, 1, AuxInit::None);
    let traj = run(&cfg, model, s).unwrap();
    assert_eq!(traj.states.len(), 1);
    assert_eq!(traj.rows.len(), 1);
    assert_eq!(traj.steps, 0);
}

#[test]
fn short_run_conserves_mass_and_keeps_monitors_clean() {
    let grid = Grid::periodic(2, 32).unwrap();
    let model = linear_model(0.5, 2.0);
    let mut cfg = SolverConfig::new(grid, 0.5, 1e-3, 0.05);
    cfg.snapshots = 5;
    let s = random_state(&grid, &model, 0.5, 2, AuxInit::None);
    let traj = run(&cfg, model, s).unwrap();
    assert!(traj.passed(), "{:?}", traj.failures());
    assert_eq!(traj.states.len(), 6);
    assert_eq!(traj.rows.len(), traj.steps + 1);
    assert!(traj.mass_drift_rate < 1e-12);
}
