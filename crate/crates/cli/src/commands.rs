//! Subcommands: run-case, run-sweep, run-verify, replay, inspect-snapshot.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use kef_core::applications::{
    mixture_constraint_check, species_columns, temperature_chain_residual, MixtureConfig, PowerCoefficient,
    SpeciesTracker,
};
use kef_core::constitutive::{LawKind, ViscosityLaw};
use kef_core::diagnostics::{diagnostics_row, identity_suite};
use kef_core::fields::{Grid, ScalarField, Snapshot, VectorField};
use kef_core::limits::{compare, reference, sweep_member, SweepPlan, SweepReport, SweepTarget, SWEEP_HEADER};
use kef_core::solver::{
    initial_state, run_with, taylor_green, AuxInit, FluidState, InitialData, Model, RandomData, Scheme, StepObserver,
    StepOutput, SolverError, Trajectory,
};
use kef_core::verification::{
    identification_run, mms_run, summarize, ConvergenceReport, IdentificationConfig, ManufacturedCase,
};

use crate::config::{parse_config, CaseConfig, InitialSpec, Resolved};
use crate::manifest::RunManifest;
use crate::output::{read_snapshot_index, read_table, write_diagnostics, write_snapshots, write_table};
use crate::{pool, CliError};

/// Parses `path`, applying a seed override.
pub fn load(path: &Path, seed: Option<u64>) -> Result<Resolved, CliError> {
    let r = parse_config(path)?;
    match seed {
        Some(s) => crate::config::resolve(with_seed(r.raw, s)),
        None => Ok(r),
    }
}

fn with_seed(mut raw: CaseConfig, s: u64) -> CaseConfig {
    if let InitialSpec::Random { seed, .. } = &mut raw.initial {
        *seed = Some(s);
    }
    raw
}

fn initial_data(r: &Resolved) -> InitialData {
    match &r.raw.initial {
        InitialSpec::Random { .. } => {
            // u⁰ - 2κ∇φ(ρ⁰) keeps w⁰ = u⁰ solenoidal
            let mut d = r.random_data().expect("random initial data").generate(&r.grid);
            d.u = d.u.axpy(-r.solver.kappa, &r.model.two_grad_phi(&d.rho)).expect("same grid");
            d
        }
        InitialSpec::TaylorGreen { rho, amplitude, .. } => {
            InitialData { rho: ScalarField::constant(&r.grid, *rho), u: taylor_green(&r.grid, *amplitude) }
        }
    }
}

pub fn initial(r: &Resolved) -> FluidState {
    initial_state(&initial_data(r), &r.model, r.solver.kappa, r.aux())
}

fn initial_y1(r: &Resolved) -> ScalarField {
    let m = r.raw.mixture.as_ref().expect("mixture table");
    ScalarField::from_fn(&r.grid, |x| m.y1_mean + m.y1_amplitude * x[0].sin() * x[1].cos())
}

struct Plain;

impl StepObserver for Plain {
    fn observe(&mut self, _: &FluidState, _: Option<&StepOutput>) -> Result<Vec<(String, f64)>, SolverError> {
        Ok(Vec::new())
    }
}

/// Integrates the configured case.
pub fn simulate(r: &Resolved) -> Result<Trajectory, CliError> {
    let s = initial(r);
    let traj = match &r.mixture {
        Some(mix) => {
            let mut tracker = SpeciesTracker::new(mix.clone(), &s.rho, initial_y1(r), r.solver.dt);
            run_with(&r.solver, r.model.clone(), s, None, &mut tracker, r.tolerances)?
        }
        None => run_with(&r.solver, r.model.clone(), s, None, &mut Plain, r.tolerances)?,
    };
    Ok(traj)
}

pub fn run_case(config: &Path, out: &Path, seed: Option<u64>, workers: usize, dry_run: bool) -> Result<(), CliError> {
    let r = load(config, seed)?;
    RunManifest::for_case("run-case", config, &r, out, workers, dry_run)?.write(out)?;
    if dry_run {
        println!("manifest written to {}", out.display());
        return Ok(());
    }
    let traj = simulate(&r)?;
    write_diagnostics(&out.join("diagnostics.csv"), &traj.rows)?;
    write_snapshots(out, &traj)?;
    let last = traj.rows.last().expect("initial row");
    println!(
        "{} steps to t = {}: E_kappa {:.6e} -> {:.6e}, density in [{:.6}, {:.6}], {} pressure iterations",
        traj.steps,
        traj.final_state.t,
        traj.rows[0].e_kappa,
        last.e_kappa,
        traj.bounds.min_seen,
        traj.bounds.max_seen,
        traj.pressure_iterations
    );
    let failures = traj.failures();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Monitor(failures))
    }
}

pub fn parse_target(s: &str) -> Result<SweepTarget, CliError> {
    match s {
        "kappa0" => Ok(SweepTarget::KappaToZero),
        "kappa1" => Ok(SweepTarget::KappaToOne),
        other => Err(CliError::Config(format!("unknown sweep target {other:?}; use kappa0 or kappa1"))),
    }
}

pub fn sweep_plan(r: &Resolved, target: SweepTarget) -> Result<SweepPlan, CliError> {
    let data = r.random_data().ok_or_else(|| CliError::Config("sweeps need random initial data".into()))?;
    let mut plan = SweepPlan::new(target, r.grid, r.solver.dt, r.solver.t_end);
    if let Some(k) = r.raw.sweep.as_ref().and_then(|s| s.kappas.clone()) {
        plan.kappas = k;
    }
    plan.data = data;
    plan.law = r.law.clone();
    plan.snapshots = r.solver.snapshots;
    plan.diagnostics_every = r.solver.diagnostics_every;
    plan.tolerances = r.tolerances;
    plan.validate()?;
    Ok(plan)
}

pub fn run_sweep(
    config: &Path,
    out: &Path,
    target: &str,
    seed: Option<u64>,
    workers: usize,
    dry_run: bool,
) -> Result<(), CliError> {
    let target = parse_target(target)?;
    let r = load(config, seed)?;
    let plan = sweep_plan(&r, target)?;
    RunManifest::for_case("run-sweep", config, &r, out, workers, dry_run)?.write(out)?;
    if dry_run {
        println!("manifest written to {}", out.display());
        return Ok(());
    }
    let report = sweep(&plan, workers)?;
    write_table(
        &out.join("sweep.csv"),
        &SWEEP_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        &report.records().iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
    )?;
    let (sr, sw) = report.empirical_slopes();
    println!(
        "dist_rho decreasing: {}, dist_w decreasing: {}, vanishing ratio {:.4}, empirical slopes ({sr:.3}, {sw:.3})",
        report.dist_rho_decreasing(),
        report.dist_w_decreasing(),
        report.vanishing_ratio()
    );
    if report.tainted() {
        let mut f = report.reference_failures.clone();
        for row in &report.rows {
            f.extend(row.failures.iter().map(|x| format!("kappa {}: {x}", row.kappa)));
        }
        return Err(CliError::Monitor(f));
    }
    Ok(())
}

/// Runs the reference and the members on a worker pool.
pub fn sweep(plan: &SweepPlan, workers: usize) -> Result<SweepReport, CliError> {
    let jobs: Vec<Option<f64>> = std::iter::once(None).chain(plan.kappas.iter().map(|&k| Some(k))).collect();
    let results: Vec<Result<(Trajectory, f64), SolverError>> = pool(workers)?.install(|| {
        jobs.par_iter()
            .map(|job| match job {
                None => reference(plan).map(|t| (t, 0.0)),
                Some(k) => sweep_member(plan, *k),
            })
            .collect()
    });
    let mut results = results.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter();
    let (reference, _) = results.next().expect("reference job");
    let rows = plan.kappas.iter().zip(results).map(|(&k, (t, obs))| compare(&reference, k, &t, obs)).collect();
    Ok(SweepReport::new(plan.target, rows, reference.failures()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Mms,
    Identification,
    All,
}

pub fn parse_suite(s: &str) -> Result<Suite, CliError> {
    match s {
        "identities" => Ok(Suite::Identities),
        "mms" => Ok(Suite::Mms),
        "identification" => Ok(Suite::Identification),
        "all" => Ok(Suite::All),
        other => Err(CliError::Config(format!(
            "unknown suite {other:?}; use identities, mms, identification or all"
        ))),
    }
}

/// Runs a verification suite; `identities` also runs the MMS matrix.
pub fn run_verify(suite: &str, out: &Path, seed: Option<u64>, workers: usize, dry_run: bool) -> Result<(), CliError> {
    let suite = parse_suite(suite)?;
    RunManifest::bare(&format!("run-verify {suite:?}"), out, seed, workers, dry_run).write(out)?;
    if dry_run {
        println!("manifest written to {}", out.display());
        return Ok(());
    }
    let pool = pool(workers)?;
    let mut failures = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        failures.extend(pool.install(|| verify_identities(out, seed.unwrap_or(0)))?);
    }
    if matches!(suite, Suite::Identities | Suite::Mms | Suite::All) {
        failures.extend(pool.install(|| verify_mms(out))?);
    }
    if matches!(suite, Suite::Identification | Suite::All) {
        failures.extend(pool.install(|| verify_identification(out, seed.unwrap_or(1)))?);
    }
    if failures.is_empty() {
        println!("verification passed");
        Ok(())
    } else {
        Err(CliError::Monitor(failures))
    }
}

const IDENTITY_TOL: f64 = 1e-10;

fn verify_identities(out: &Path, seed: u64) -> Result<Vec<String>, CliError> {
    let grid = Grid::periodic(2, 32)?;
    let law = ViscosityLaw::new(LawKind::Linear { intercept: 0.0, slope: 1.0 }, 0.0, 0.5, 2.0)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let model = Arc::new(Model::new(law).map_err(|e| CliError::Config(e.to_string()))?);
    let mix = MixtureConfig::new(PowerCoefficient { coefficient: 2.0, exponent: 1.0 }, 0.5);
    let mix_model = Arc::new(mix.model(0.5, 2.0).map_err(|e| CliError::Config(e.to_string()))?);
    let rows: Vec<Vec<f64>> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let s = seed + i;
            let kappa = [0.1, 0.5, 0.9][i as usize % 3];
            let data = RandomData::new(s).generate(&grid);
            let st = initial_state(&data, &model, kappa, AuxInit::None);
            let rep = identity_suite(&st, &model, kappa, 4);
            let sm = initial_state(&data, &mix_model, mix.kappa, AuxInit::None);
            let y1 = ScalarField::from_fn(&grid, |x| 0.5 + 0.3 * (x[0] + s as f64).sin() * x[1].cos());
            let chain = mixture_constraint_check(&sm, &mix_model, &mix, 4)
                .max(temperature_chain_residual(&st.rho, &y1, &mix, 4));
            vec![
                s as f64,
                kappa,
                rep.split,
                rep.two_velocity,
                rep.renormalized,
                rep.deviatoric_forms,
                rep.constraint,
                chain,
            ]
        })
        .collect();
    let header: Vec<String> =
        ["seed", "kappa", "split", "two_velocity", "renormalized", "deviatoric_forms", "constraint", "mixture_chain"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    write_table(&out.join("identities.csv"), &header, &rows)?;
    let worst = rows.iter().flat_map(|r| r[2..].iter().copied()).fold(0.0f64, f64::max);
    println!("identities: worst relative residual {worst:.3e} over {} fields", rows.len());
    Ok(if worst <= IDENTITY_TOL { Vec::new() } else { vec![format!("identity residual {worst:.3e}")] })
}

fn verify_mms(out: &Path) -> Result<Vec<String>, CliError> {
    let steady = ManufacturedCase::steady(0.3);
    let unsteady = ManufacturedCase::new(0.3);
    let mut failures = Vec::new();
    let g64 = Grid::periodic(2, 64)?;
    let res = steady.source_residual(&g64, 0.0)?.max(unsteady.source_residual(&g64, 0.0)?);
    if res > 1e-10 {
        failures.push(format!("manufactured source residual {res:.3e}"));
    }

    let ns = [16usize, 32, 64, 128];
    let spatial: Vec<(f64, f64)> = ns
        .par_iter()
        .map(|&n| -> Result<(f64, f64), CliError> {
            let grid = Grid::periodic(2, n)?;
            Ok(mms_run(&steady, &steady.config(grid, 1e-2, 1.0))?)
        })
        .collect::<Result<_, _>>()?;
    let sizes: Vec<f64> = ns.iter().map(|&n| Grid::periodic(2, n).map(|g| g.spacing())).collect::<Result<_, _>>()?;
    let sp = ConvergenceReport::from_errors(sizes, spatial.iter().map(|e| e.0).collect(), spatial.iter().map(|e| e.1).collect());
    std::fs::write(out.join("mms_spatial.csv"), sp.to_csv())?;
    if sp.unresolved || sp.errors_l2[2].max(sp.errors_l2[3]) > 1e-10 {
        failures.push(format!("spatial MMS errors {:?}", sp.errors_l2));
    }

    let dts = [0.04, 0.02, 0.01, 0.005];
    let g32 = Grid::periodic(2, 32)?;
    for (scheme, lo, hi, name) in [(Scheme::Imex1, 0.9, 1.1, "imex1"), (Scheme::Imex2, 1.9, 2.1, "imex2")] {
        let errs: Vec<(f64, f64)> = dts
            .par_iter()
            .map(|&dt| {
                let mut c = unsteady.config(g32, dt, 1.0);
                c.scheme = scheme;
                mms_run(&unsteady, &c)
            })
            .collect::<Result<_, _>>()?;
        let rep = ConvergenceReport::from_errors(dts.to_vec(), errs.iter().map(|e| e.0).collect(), errs.iter().map(|e| e.1).collect());
        std::fs::write(out.join(format!("mms_temporal_{name}.csv")), rep.to_csv())?;
        println!("mms {name}: fitted temporal order {:.4}", rep.fitted_order);
        if !(lo..=hi).contains(&rep.fitted_order) || rep.unresolved {
            failures.push(format!("{name} fitted order {:.4} outside [{lo}, {hi}]", rep.fitted_order));
        }
    }
    println!("mms: source residual {res:.3e}, spatial errors {:?}", sp.errors_l2);
    Ok(failures)
}

fn verify_identification(out: &Path, seed: u64) -> Result<Vec<String>, CliError> {
    let mut cfg = IdentificationConfig::new(Grid::periodic(2, 64)?, 5e-4, 1.0);
    cfg.seed = seed;
    let jobs: Vec<(f64, f64)> = cfg.etas.iter().flat_map(|&e| cfg.deltas.iter().map(move |&d| (d, e))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(d, e)| identification_run(&cfg, d, e))
        .collect::<Result<Vec<_>, _>>()?;
    let rep = summarize(rows);
    std::fs::write(out.join("identification.csv"), rep.to_csv())?;
    let mut failures = Vec::new();
    let e0 = rep.row(0.0, 0.0).map(|r| r.max_l2).unwrap_or(f64::NAN);
    println!(
        "identification: δ = 0 error {e0:.3e}, monotone in δ {}, bounded growth {}",
        rep.monotone_in_delta, rep.bounded_growth
    );
    if !(e0 <= 1e-6) {
        failures.push(format!("identification error {e0:.3e} at δ = 0"));
    }
    if !rep.passed() {
        failures.push("identification curve not monotone in δ or perturbation grew".into());
    }
    Ok(failures)
}

/// Relative tolerance of [`replay`].
pub const REPLAY_TOL: f64 = 1e-14;

/// Recomputes the diagnostics rows at every snapshot and compares them with
/// `diagnostics.csv`. Returns the largest deviation.
pub fn replay(out: &Path) -> Result<f64, CliError> {
    let manifest = RunManifest::read(out)?;
    let raw = manifest.config.ok_or_else(|| CliError::Replay("manifest has no case configuration".into()))?;
    let r = crate::config::resolve(raw)?;
    let (header, rows) = read_table(&out.join("diagnostics.csv"))?;
    let index = read_snapshot_index(out)?;
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for (t, file) in &index {
        let snap = Snapshot::load(&out.join("snapshots").join(file))?;
        let state = FluidState::from_snapshot(&snap, *t, &r.grid)?;
        let (mut row, _, _) = diagnostics_row(&state, &r.model, &r.solver);
        if r.mixture.is_some() {
            row.extra.extend(species_columns(&snap.field("rho_m")?, &snap.field("Y1")?));
        }
        let stored = rows
            .iter()
            .find(|x| x[0] == *t)
            .ok_or_else(|| CliError::Replay(format!("no diagnostics row at t = {t}")))?;
        for (name, v) in row.header().iter().zip(row.values()) {
            let Some(i) = header.iter().position(|h| h == name) else {
                return Err(CliError::Replay(format!("column {name} missing from diagnostics.csv")));
            };
            let dev = (stored[i] - v).abs() / stored[i].abs().max(1.0);
            if dev > worst {
                worst = dev;
                at = format!("{name} at t = {t}");
            }
        }
    }
    if worst > REPLAY_TOL {
        return Err(CliError::Replay(format!("largest relative deviation {worst:.3e} ({at})")));
    }
    println!("replayed {} snapshots: largest relative deviation {worst:.3e}", index.len());
    Ok(worst)
}

pub fn inspect_snapshot(path: &Path) -> Result<(), CliError> {
    let s = Snapshot::load(path)?;
    let g = s.grid;
    println!("grid: d = {}, n = {}, length = {}", g.dim(), g.n(), g.length());
    for (name, v) in &s.fields {
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        println!("{name}: min {lo:.16e} max {hi:.16e} mean {mean:.16e}");
    }
    let d = g.dim();
    if (0..d).all(|a| s.get(&format!("w_{a}")).is_some()) {
        let w = VectorField::new((0..d).map(|a| s.field(&format!("w_{a}"))).collect::<Result<_, _>>()?)?;
        println!("relative divergence of w: {:.3e}", kef_core::diagnostics::divergence_residual(&w));
    }
    Ok(())
}
