//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- 5 10`.

use std::sync::Arc;
use std::time::Instant;

use kef_core::applications::*;
use kef_core::constitutive::*;
use kef_core::diagnostics::*;
use kef_core::fields::*;
use kef_core::limits::*;
use kef_core::solver::*;
use kef_core::verification::*;

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn outcome(id: &'static str, passed: bool, detail: String) -> Outcome {
    Outcome { id, passed, detail }
}

fn linear_model(r: f64, big_r: f64) -> Arc<Model> {
    let law = ViscosityLaw::new(LawKind::Linear { intercept: 0.0, slope: 1.0 }, 0.0, r, big_r).unwrap();
    Arc::new(Model::new(law).unwrap())
}

fn criterion_1() -> Vec<Outcome> {
    let grid = Grid::periodic(2, 32).unwrap();
    let model = linear_model(0.5, 2.0);
    let mix = MixtureConfig::new(PowerCoefficient { coefficient: 2.0, exponent: 1.0 }, 0.5);
    let mix_model = Arc::new(mix.model(0.5, 2.0).unwrap());
    let names = ["split", "two_velocity", "renormalized", "mixture_chain"];
    let mut worst = [0.0f64; 4];
    for seed in 0..50u64 {
        let kappa = [0.1, 0.5, 0.9][seed as usize % 3];
        let data = RandomData::new(seed).generate(&grid);
        let s = initial_state(&data, &model, kappa, AuxInit::None);
        let r = identity_suite(&s, &model, kappa, 4);
        let sm = initial_state(&data, &mix_model, mix.kappa, AuxInit::None);
        let y1 = ScalarField::from_fn(&grid, |x| 0.5 + 0.3 * (x[0] + seed as f64).sin() * x[1].cos());
        let chain = mixture_constraint_check(&sm, &mix_model, &mix, 4).max(temperature_chain_residual(&s.rho, &y1, &mix, 4));
        for (w, v) in worst.iter_mut().zip([r.split, r.two_velocity, r.renormalized, chain]) {
            *w = w.max(v);
        }
    }
    let detail = names.iter().zip(&worst).map(|(n, v)| format!("{n} {v:.2e}")).collect::<Vec<_>>().join(", ");
    vec![outcome("1", worst.iter().all(|&v| v <= 1e-10), format!("max relative residuals over 50 fields: {detail} (limit 1e-10)"))]
}

struct MatrixSummary {
    runs: usize,
    entropy_violations: usize,
    worst_increase: f64,
    min_term: f64,
    worst_excursion: f64,
    bounds_failures: usize,
}

fn matrix() -> MatrixSummary {
    let grid = Grid::periodic(2, 64).unwrap();
    let model = linear_model(0.5, 2.0);
    let mut m = MatrixSummary {
        runs: 0,
        entropy_violations: 0,
        worst_increase: f64::NEG_INFINITY,
        min_term: f64::INFINITY,
        worst_excursion: 0.0,
        bounds_failures: 0,
    };
    for seed in 0..20u64 {
        for kappa in [0.1, 0.5, 0.9] {
            let cfg = SolverConfig::new(grid, kappa, 5e-4, 1.0);
            let data = RandomData::new(100 + seed).generate(&grid);
            let s = initial_state(&data, &model, kappa, AuxInit::None);
            let t = run(&cfg, model.clone(), s).unwrap();
            m.runs += 1;
            m.entropy_violations += t.entropy_monitor.violations;
            m.worst_increase = m.worst_increase.max(t.entropy_monitor.worst_increase);
            m.min_term = m.min_term.min(t.entropy_monitor.min_term);
            m.worst_excursion = m.worst_excursion.max(t.bounds.relative_excursion());
            m.bounds_failures += usize::from(t.bounds.first_violation.is_some());
        }
    }
    m
}

fn criteria_2_3() -> Vec<Outcome> {
    let m = matrix();
    vec![
        outcome(
            "2",
            m.entropy_violations == 0 && m.min_term >= -1e-12,
            format!(
                "{} runs: {} entropy increases beyond 1e-8, worst relative change {:.2e}, smallest budget term {:.2e}",
                m.runs, m.entropy_violations, m.worst_increase, m.min_term
            ),
        ),
        outcome(
            "3",
            m.bounds_failures == 0 && m.worst_excursion <= 1e-6,
            format!("{} runs: worst excursion {:.2e} (R - r) (limit 1e-6)", m.runs, m.worst_excursion),
        ),
    ]
}

fn criterion_4() -> Vec<Outcome> {
    let grid = Grid::periodic(2, 64).unwrap();
    let mix = MixtureConfig::new(PowerCoefficient { coefficient: 2.0, exponent: 1.0 }, 0.5);
    let model = Arc::new(mix.model(0.5, 2.0).unwrap());
    let data = RandomData::new(4).generate(&grid);
    let s = initial_state(&data, &model, mix.kappa, AuxInit::None);
    let y1 = ScalarField::from_fn(&grid, |x| 0.5 + 0.3 * x[0].sin() * x[1].cos());
    let dt = 5e-4;
    let mut tracker = SpeciesTracker::new(mix.clone(), &s.rho, y1, dt);
    let cfg = SolverConfig::new(grid, mix.kappa, dt, 1.0);
    let t = run_with(&cfg, model, s, None, &mut tracker, MonitorTolerances::default()).unwrap();
    let (lo, hi) = tracker.y_range;
    let ok = t.max_stage_divergence <= 1e-12
        && t.mass_drift_rate <= 1e-12
        && tracker.max_mass_drift <= 1e-10
        && lo >= -1e-8
        && hi <= 1.0 + 1e-8;
    vec![outcome(
        "4",
        ok,
        format!(
            "stage divergence {:.2e}, mass drift {:.2e}/time, ∫ρY1 drift {:.2e}, Y1 in [{lo:.6}, {hi:.6}]",
            t.max_stage_divergence, t.mass_drift_rate, tracker.max_mass_drift
        ),
    )]
}

fn criterion_5() -> Vec<Outcome> {
    let mut worst_transition: f64 = 0.0;
    for d in [2usize, 3] {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if check_important(&ViscosityLaw::power(mid, 0.5, 2.0).unwrap(), d).unwrap().satisfied {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        worst_transition = worst_transition.max((hi - (1.0 - 1.0 / d as f64)).abs());
    }
    let e = std::f64::consts::E;
    let pair = GeneralLawPair {
        mu: ViscosityLaw::power(1.0, 2.0, 3.0).unwrap(),
        mu_tilde: ViscosityLaw::unchecked(LawKind::Log { coefficient: 1.0 }, 0.0, 2.0, 3.0),
    };
    let xi = xi_interval(e, 1.0, &pair).unwrap().unwrap();
    let s3 = 3f64.sqrt();
    let closed = (xi.lower - (e - 1.0) * (2.0 - s3)).abs().max((xi.upper - (e - 1.0) * (2.0 + s3)).abs());
    let j2 = pair.j2(e);
    let n = 200_000;
    let top = 2.0 * xi.upper;
    let ok: Vec<f64> = (1..=n)
        .map(|i| top * i as f64 / n as f64)
        .filter(|&x| (j2 - x).powi(2) / (2.0 * j2) <= x)
        .collect();
    let scan = (ok[0] - xi.lower).abs().max((ok[ok.len() - 1] - xi.upper).abs());
    vec![outcome(
        "5",
        worst_transition <= 1e-6 && closed <= 1e-12 && scan <= 1e-3,
        format!("transition error {worst_transition:.2e}, ξ± closed-form error {closed:.2e}, scan error {scan:.2e}"),
    )]
}

fn criterion_6() -> Vec<Outcome> {
    let grid = Grid::periodic(2, 64).unwrap();
    let mut cfg = IdentificationConfig::new(grid, 5e-4, 1.0);
    cfg.etas = vec![0.0];
    cfg.every = 10;
    let rep = identification_experiment(&cfg).unwrap();
    let at0 = rep.row(0.0, 0.0).unwrap().max_l2;
    let curve = rep.rows.iter().map(|r| format!("δ={} {:.2e}", r.delta, r.max_l2)).collect::<Vec<_>>().join(", ");
    vec![outcome(
        "6",
        at0 <= 1e-6 && rep.monotone_in_delta,
        format!("max ‖v - 2∇φ(ρ)‖ at δ = 0: {at0:.2e} (limit 1e-6); {curve}; nonincreasing {}", rep.monotone_in_delta),
    )]
}

fn criterion_7() -> Vec<Outcome> {
    let steady = ManufacturedCase::steady(0.3);
    let unsteady = ManufacturedCase::new(0.3);
    let g64 = Grid::periodic(2, 64).unwrap();
    let res = steady.source_residual(&g64, 0.0).unwrap().max(unsteady.source_residual(&g64, 0.0).unwrap());
    let sp = mms_spatial(&steady, &[16, 32, 64, 128], 1e-2, 100).unwrap();
    let plateau = sp.errors_l2[2].max(sp.errors_l2[3]);
    let tm = mms_temporal(&unsteady, 32, &[0.04, 0.02, 0.01, 0.005], 1.0, Scheme::Imex2).unwrap();
    let ok = res <= 1e-10 && plateau <= 1e-10 && (1.9..=2.1).contains(&tm.fitted_order);
    vec![outcome(
        "7",
        ok,
        format!(
            "source residual {res:.2e}; spatial errors {:?}; imex2 fitted order {:.4}",
            sp.errors_l2.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>(),
            tm.fitted_order
        ),
    )]
}

fn criterion_8() -> Vec<Outcome> {
    let grid = Grid::periodic(2, 64).unwrap();
    let zero = kappa_sweep(&SweepPlan::new(SweepTarget::KappaToZero, grid, 1e-3, 1.0)).unwrap();
    let one = kappa_sweep(&SweepPlan::new(SweepTarget::KappaToOne, grid, 1e-3, 1.0)).unwrap();
    let cols = |r: &SweepReport| {
        r.rows.iter().map(|x| format!("κ={} ({:.2e}, {:.2e})", x.kappa, x.dist_rho, x.dist_w)).collect::<Vec<_>>().join(", ")
    };
    let ratio = zero.vanishing_ratio();
    vec![
        outcome(
            "8a",
            zero.dist_rho_decreasing() && zero.dist_w_decreasing() && !zero.tainted(),
            format!("κ → 0 distances (ρ, w): {}", cols(&zero)),
        ),
        outcome(
            "8b",
            one.dist_rho_decreasing() && one.dist_w_decreasing() && !one.tainted(),
            format!("κ → 1 distances (ρ, w): {}", cols(&one)),
        ),
        outcome(
            "8c",
            ratio <= 0.1,
            format!("κ∫∫μ'|∇ρ|² at κ = 0.025 over κ = 0.2: {ratio:.4} (limit 0.1)"),
        ),
    ]
}

fn criterion_9() -> Vec<Outcome> {
    let grid = Grid::periodic(2, 64).unwrap();
    let gc = GhostConfig { capillarity: 0.05, kappa: 0.5, mu_bar: 1.0 };
    let model = Arc::new(Model::new(gc.law(0.5, 2.0).unwrap()).unwrap());
    let mut bohm: f64 = 0.0;
    for seed in 0..5 {
        bohm = bohm.max(bohm_residual(&RandomData::new(seed).generate(&grid).rho));
    }
    let data = RandomData::new(4).generate(&grid);
    let s = initial_state(&data, &model, gc.kappa, AuxInit::None);
    let t = run(&gc.solver_config(grid, 5e-4, 1.0), model, s).unwrap();
    let em = &t.entropy_monitor;
    vec![outcome(
        "9",
        bohm <= 1e-10 && em.violations == 0 && t.passed(),
        format!("Bohm residual {bohm:.2e}; ghost entropy increases {} (worst relative change {:.2e})", em.violations, em.worst_increase),
    )]
}

fn criterion_10() -> Vec<Outcome> {
    let grid = Grid::periodic(2, 64).unwrap();
    let model = linear_model(0.5, 2.0);
    let mut worst: f64 = 0.0;
    for seed in 0..5u64 {
        for (kappa, mode) in [(0.0, Mode::IncompressibleNs), (1.0, Mode::KsLimit)] {
            let data = RandomData::new(seed).generate(&grid);
            let state = initial_state(&data, &model, kappa, AuxInit::None);
            let (cg, mg) = kappa_terms(&state, &model, TermParams::plain(kappa));
            let (ce, me) = if kappa == 0.0 { incompressible_terms(&state, &model) } else { ks_terms(&state, &model) };
            let rs = |a: &ScalarField, b: &ScalarField| l2(&(a - b)) / l2(a).max(l2(b)).max(1.0);
            let rv = |a: &VectorField, b: &VectorField| {
                vector_l2(&a.axpy(-1.0, b).unwrap()) / vector_l2(a).max(vector_l2(b)).max(1.0)
            };
            worst = worst.max(rs(&cg.transport, &ce.transport)).max(rs(&cg.diffusion, &ce.diffusion));
            for ((_, a), (_, b)) in mg.list().iter().zip(me.list().iter()) {
                worst = worst.max(rv(a, b));
            }
            let cfg = SolverConfig::new(grid, kappa, 1e-3, 0.1);
            let mut cfg_e = cfg.clone();
            cfg_e.mode = mode;
            let a = Workspace::new(&cfg, model.clone()).tendency(&state).unwrap();
            let b = Workspace::new(&cfg_e, model.clone()).tendency(&state).unwrap();
            worst = worst.max(rv(&a.momentum, &b.momentum)).max(rv(&a.w, &b.w)).max(rs(&a.rho, &b.rho));
        }
    }
    vec![outcome("10", worst <= 1e-12, format!("largest term-by-term difference {worst:.2e} (limit 1e-12)"))]
}

fn main() {
    let selected: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let all: [(&str, fn() -> Vec<Outcome>); 9] = [
        ("1", criterion_1),
        ("5", criterion_5),
        ("10", criterion_10),
        ("7", criterion_7),
        ("4", criterion_4),
        ("9", criterion_9),
        ("6", criterion_6),
        ("8", criterion_8),
        ("2", criteria_2_3),
    ];
    let mut failed = 0;
    for (id, f) in all {
        let wanted = selected.is_empty() || selected.iter().any(|s| s == id || (id == "2" && s == "3"));
        if !wanted {
            continue;
        }
        let start = Instant::now();
        let outcomes = f();
        let secs = start.elapsed().as_secs_f64();
        for o in outcomes {
            let tag = if o.passed { "PASS" } else { "FAIL" };
            println!("{tag} criterion {}: {} [{secs:.1}s]", o.id, o.detail);
            failed += usize::from(!o.passed);
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
