//! Driver loop: snapshots, diagnostics rows and monitors.

use std::sync::Arc;

use super::{Forcing, FluidState, Model, Solver, SolverConfig, SolverError, StepOutput};
use crate::diagnostics::{diagnostics_row, BoundsMonitor, DiagnosticsRow, EntropyMonitor, EntropyReport};
use crate::fields::{vector_linf, ScalarField, Snapshot};

/// Relative tolerances of the run monitors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorTolerances {
    /// Per-step entropy increase allowed, relative to the initial entropy.
    pub entropy: f64,
    /// Allowed excursion of `ρ` outside its initial band, relative to `R - r`.
    pub bounds: f64,
    /// Allowed `‖div w‖ / ‖w‖_{H¹}` at any stage.
    pub divergence: f64,
    /// Allowed relative mass drift per unit time.
    pub mass: f64,
}

impl Default for MonitorTolerances {
    fn default() -> Self {
        Self { entropy: 1e-8, bounds: 1e-6, divergence: 1e-12, mass: 1e-12 }
    }
}

/// Hook called after every step; used by coupled models.
pub trait StepObserver {
    /// Extra diagnostics columns for the current state; `step` is `None`
    /// for the initial state.
    fn observe(&mut self, state: &FluidState, step: Option<&StepOutput>) -> Result<Vec<(String, f64)>, SolverError>;

    /// Extra fields stored with each snapshot.
    fn snapshot_fields(&self) -> Vec<(String, ScalarField)> {
        Vec::new()
    }

    /// Monitor failures detected by the observer.
    fn failures(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Result of [`run`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Saved states at evenly spaced steps, starting with the initial state.
    pub states: Vec<FluidState>,
    /// Observer fields belonging to each saved state.
    pub extra_fields: Vec<Vec<(String, ScalarField)>>,
    pub rows: Vec<DiagnosticsRow>,
    pub entropy: Vec<EntropyReport>,
    pub bounds: BoundsMonitor,
    pub entropy_monitor: EntropyMonitor,
    pub max_stage_divergence: f64,
    /// Largest `|M(t) - M(0)| / (|M(0)| t)`.
    pub mass_drift_rate: f64,
    pub max_identification_error: f64,
    /// `dt max|w| / h` of the initial state.
    pub cfl: f64,
    pub steps: usize,
    pub pressure_iterations: usize,
    pub final_state: FluidState,
    pub tolerances: MonitorTolerances,
    pub observer_failures: Vec<String>,
}

impl Trajectory {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(t) = self.bounds.first_violation {
            out.push(format!(
                "density left [{:.6e}, {:.6e}] by {:.3e} at t = {t}",
                self.bounds.lower, self.bounds.upper, self.bounds.worst_excursion
            ));
        }
        if self.entropy_monitor.violations > 0 {
            out.push(format!(
                "entropy increased in {} steps (worst {:.3e} relative)",
                self.entropy_monitor.violations, self.entropy_monitor.worst_increase
            ));
        }
        if self.entropy_monitor.min_term < -1e-12 {
            out.push(format!("negative dissipation term {:.3e}", self.entropy_monitor.min_term));
        }
        if self.max_stage_divergence > self.tolerances.divergence {
            out.push(format!("stage divergence {:.3e}", self.max_stage_divergence));
        }
        if self.mass_drift_rate > self.tolerances.mass {
            out.push(format!("mass drift {:.3e} per unit time", self.mass_drift_rate));
        }
        out.extend(self.observer_failures.iter().cloned());
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    /// Saved state `i` in the binary snapshot layout.
    pub fn snapshot(&self, i: usize) -> Snapshot {
        let mut s = self.states[i].to_snapshot();
        for (name, f) in &self.extra_fields[i] {
            s.push(name, f);
        }
        s
    }
}

struct NoObserver;

impl StepObserver for NoObserver {
    fn observe(&mut self, _: &FluidState, _: Option<&StepOutput>) -> Result<Vec<(String, f64)>, SolverError> {
        Ok(Vec::new())
    }
}

/// Runs `initial` to `config.t_end` with default monitor tolerances.
pub fn run(config: &SolverConfig, model: Arc<Model>, initial: FluidState) -> Result<Trajectory, SolverError> {
    run_with(config, model, initial, None, &mut NoObserver, MonitorTolerances::default())
}

/// Step indices at which states are saved.
pub fn snapshot_steps(steps: usize, snapshots: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=snapshots.max(1))
        .map(|i| ((i as f64) * steps as f64 / snapshots.max(1) as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

pub fn run_with(
    config: &SolverConfig,
    model: Arc<Model>,
    initial: FluidState,
    forcing: Option<Arc<dyn Forcing>>,
    observer: &mut dyn StepObserver,
    tolerances: MonitorTolerances,
) -> Result<Trajectory, SolverError> {
    config.validate()?;
    if initial.grid() != &config.grid {
        return Err(SolverError::Config("initial data and configuration use different grids".into()));
    }
    let mut state = initial;
    let div0 = crate::diagnostics::divergence_residual(&state.w);
    if div0 > tolerances.divergence {
        log::warn!("initial w not solenoidal (relative divergence {div0:.3e}); projecting");
        state.w = crate::fields::leray_project(&state.w);
    }
    let (lo, hi) = state.rho.min_max();
    if lo < model.law.r || hi > model.law.big_r {
        log::warn!(
            "initial density range [{lo}, {hi}] exceeds the law interval [{}, {}]",
            model.law.r,
            model.law.big_r
        );
    }
    let rho_mean = state.rho.mean();
    let mut solver = Solver::new(config, model.clone(), rho_mean)?;
    if let Some(f) = forcing {
        solver = solver.with_forcing(f);
    }
    let h = config.grid.spacing();
    let cfl = config.dt * vector_linf(&state.w) / h;
    if cfl > 1.0 {
        log::warn!("advective CFL number {cfl:.3} exceeds 1");
    }

    let steps = config.num_steps();
    let saves = if config.t_end == 0.0 { vec![0] } else { snapshot_steps(steps, config.snapshots) };
    let ghost = config.capillarity != 0.0;

    let mut bounds = BoundsMonitor::from_initial(&state.rho, tolerances.bounds);
    let mut emon = EntropyMonitor::new(tolerances.entropy);
    let mut rows = Vec::new();
    let mut entropy = Vec::new();
    let mut states = Vec::new();
    let mut extra_fields = Vec::new();
    let mass0 = state.rho.integral();
    let mut mass_drift_rate: f64 = 0.0;
    let mut max_div: f64 = div0.min(tolerances.divergence);
    let mut max_ident: f64 = 0.0;
    let mut iters = 0;
    let mut since_row = 0;

    let record = |state: &FluidState,
                      extra: Vec<(String, f64)>,
                      since: usize,
                      rows: &mut Vec<DiagnosticsRow>,
                      entropy: &mut Vec<EntropyReport>,
                      bounds: &mut BoundsMonitor,
                      emon: &mut EntropyMonitor|
     -> f64 {
        // evaluated on the stored samples so that replay from snapshots is exact
        let stored = FluidState::from_snapshot(&state.to_snapshot(), state.t, &config.grid).expect("own snapshot");
        let (mut row, rep, ext) = diagnostics_row(&stored, &model, config);
        bounds.observe(state.t, &ext);
        let (e, terms) = if ghost {
            let e = row.get("ghost_entropy").unwrap_or(rep.e_kappa);
            (e, rep.terms().to_vec())
        } else {
            (rep.e_kappa, rep.terms().to_vec())
        };
        emon.observe(e, &terms, since);
        row.extra.extend(extra);
        let ident = row.identification_error;
        rows.push(row);
        entropy.push(rep);
        ident
    };

    let extra = observer.observe(&state, None)?;
    max_ident = max_ident.max(record(&state, extra, 0, &mut rows, &mut entropy, &mut bounds, &mut emon));
    states.push(state.clone());
    extra_fields.push(observer.snapshot_fields());

    for n in 1..=steps {
        let out = solver.step(&state)?;
        iters += out.pressure_iterations;
        max_div = max_div.max(out.max_stage_divergence);
        let extra = observer.observe(&out.state, Some(&out))?;
        state = out.state;
        since_row += 1;
        let m = state.rho.integral();
        if state.t > 0.0 {
            mass_drift_rate = mass_drift_rate.max((m - mass0).abs() / (mass0.abs() * state.t));
        }
        if n % config.diagnostics_every == 0 || n == steps || saves.contains(&n) {
            max_ident = max_ident.max(record(&state, extra, since_row, &mut rows, &mut entropy, &mut bounds, &mut emon));
            since_row = 0;
        }
        if saves.contains(&n) {
            states.push(state.clone());
            extra_fields.push(observer.snapshot_fields());
        }
    }

    Ok(Trajectory {
        states,
        extra_fields,
        rows,
        entropy,
        bounds,
        entropy_monitor: emon,
        max_stage_divergence: max_div,
        mass_drift_rate,
        max_identification_error: max_ident,
        cfl,
        steps,
        pressure_iterations: iters,
        final_state: state,
        tolerances,
        observer_failures: observer.failures(),
    })
}
