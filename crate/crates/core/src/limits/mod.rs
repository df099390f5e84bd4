//! κ-sweeps towards the two endpoint systems: the variable-density
//! incompressible Navier-Stokes equations at κ = 0 and the
//! Kazhikhov-Smagulov system at κ = 1.

use std::sync::Arc;

use crate::constitutive::{LawKind, ViscosityLaw};
use crate::diagnostics::quad;
use crate::fields::{grad, l2, vector_l2, Grid};
use crate::solver::{
    initial_state, run_with, AuxInit, FluidState, InitialData, Mode, Model, MonitorTolerances, RandomData,
    SolverConfig, SolverError, StepObserver, StepOutput, Trajectory,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepTarget {
    /// κ → 0 against the incompressible reference.
    KappaToZero,
    /// κ → 1 against the Kazhikhov-Smagulov reference.
    KappaToOne,
}

impl SweepTarget {
    pub fn endpoint(self) -> f64 {
        match self {
            SweepTarget::KappaToZero => 0.0,
            SweepTarget::KappaToOne => 1.0,
        }
    }

    pub fn default_kappas(self) -> Vec<f64> {
        match self {
            SweepTarget::KappaToZero => vec![0.2, 0.1, 0.05, 0.025],
            SweepTarget::KappaToOne => vec![0.8, 0.9, 0.95],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub target: SweepTarget,
    pub kappas: Vec<f64>,
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub data: RandomData,
    pub law: ViscosityLaw,
    /// Number of saved intervals used for the time norms.
    pub snapshots: usize,
    pub diagnostics_every: usize,
    pub tolerances: MonitorTolerances,
}

impl SweepPlan {
    /// Plan with the default κ list, `μ(ρ) = ρ` on `[0.5, 2]` and seed 1.
    pub fn new(target: SweepTarget, grid: Grid, dt: f64, t_end: f64) -> Self {
        let law = ViscosityLaw::new(LawKind::Linear { intercept: 0.0, slope: 1.0 }, 0.0, 0.5, 2.0)
            .expect("valid linear law");
        Self {
            target,
            kappas: target.default_kappas(),
            grid,
            dt,
            t_end,
            data: RandomData::new(1),
            law,
            snapshots: 10,
            diagnostics_every: 10,
            tolerances: MonitorTolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.kappas.is_empty() {
            return Err(SolverError::Config("empty κ list".into()));
        }
        if let Some(k) = self.kappas.iter().find(|k| !(**k > 0.0 && **k < 1.0)) {
            return Err(SolverError::Config(format!("sweep κ = {k} is not inside (0, 1)")));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Arc<Model>, SolverError> {
        Ok(Arc::new(Model::new(self.law.clone())?))
    }

    fn config(&self, kappa: f64, mode: Mode) -> SolverConfig {
        let mut c = SolverConfig::new(self.grid, kappa, self.dt, self.t_end);
        c.mode = mode;
        c.snapshots = self.snapshots;
        c.diagnostics_every = self.diagnostics_every;
        c
    }

    /// Shared `(ρ⁰, u⁰)` with `u⁰` solenoidal.
    pub fn shared_data(&self) -> InitialData {
        self.data.generate(&self.grid)
    }

    /// `(ρ⁰, w⁰_κ)` with `u⁰_κ = u⁰ - 2κ∇φ(ρ⁰)`, so that `w⁰_κ = u⁰` for
    /// every κ.
    pub fn initial(&self, model: &Model, kappa: f64) -> FluidState {
        let mut data = self.shared_data();
        data.u = data.u.axpy(-kappa, &model.two_grad_phi(&data.rho)).expect("same grid");
        initial_state(&data, model, kappa, AuxInit::None)
    }
}

/// Time integral of `c ∫ g(ρ)|∇ρ|²` by the trapezoidal rule.
struct Vanishing<'a> {
    model: &'a Model,
    weight: f64,
    use_mu_prime: bool,
    last: Option<(f64, f64)>,
    integral: f64,
}

impl Vanishing<'_> {
    fn density(&self, s: &FluidState) -> f64 {
        let g = grad(&s.rho);
        let gv = g.values();
        let rv = s.rho.values();
        let vals: Vec<f64> = (0..rv.len())
            .map(|p| {
                let m = if self.use_mu_prime { self.model.law.mu_prime(rv[p]) } else { 1.0 };
                m * gv.iter().map(|c| c[p] * c[p]).sum::<f64>()
            })
            .collect();
        self.weight * quad(s.grid(), &vals)
    }
}

impl StepObserver for Vanishing<'_> {
    fn observe(&mut self, state: &FluidState, _: Option<&StepOutput>) -> Result<Vec<(String, f64)>, SolverError> {
        let f = self.density(state);
        if let Some((t0, f0)) = self.last {
            self.integral += 0.5 * (state.t - t0) * (f + f0);
        }
        self.last = Some((state.t, f));
        Ok(vec![("vanish_obs".into(), self.integral)])
    }
}

/// Runs the dedicated κ = 0 assembly: transport of `ρ` and `D(u)` viscosity.
pub fn reference_incompressible(plan: &SweepPlan) -> Result<Trajectory, SolverError> {
    let model = plan.model()?;
    let init = plan.initial(&model, 0.0);
    let cfg = plan.config(0.0, Mode::IncompressibleNs);
    run_with(&cfg, model, init, None, &mut NoopObserver, plan.tolerances)
}

/// Runs the dedicated κ = 1 assembly: rotational viscosity only.
pub fn reference_ks(plan: &SweepPlan) -> Result<Trajectory, SolverError> {
    let model = plan.model()?;
    let init = plan.initial(&model, 1.0);
    let cfg = plan.config(1.0, Mode::KsLimit);
    run_with(&cfg, model, init, None, &mut NoopObserver, plan.tolerances)
}

/// Reference trajectory of the plan's endpoint.
pub fn reference(plan: &SweepPlan) -> Result<Trajectory, SolverError> {
    match plan.target {
        SweepTarget::KappaToZero => reference_incompressible(plan),
        SweepTarget::KappaToOne => reference_ks(plan),
    }
}

struct NoopObserver;

impl StepObserver for NoopObserver {
    fn observe(&mut self, _: &FluidState, _: Option<&StepOutput>) -> Result<Vec<(String, f64)>, SolverError> {
        Ok(Vec::new())
    }
}

/// One sweep member: the general solver at `kappa` and its vanishing
/// dissipation observable.
pub fn sweep_member(plan: &SweepPlan, kappa: f64) -> Result<(Trajectory, f64), SolverError> {
    let model = plan.model()?;
    let init = plan.initial(&model, kappa);
    let cfg = plan.config(kappa, Mode::Reduced);
    let (weight, use_mu_prime) = match plan.target {
        SweepTarget::KappaToZero => (kappa, true),
        SweepTarget::KappaToOne => (1.0 - kappa, false),
    };
    let mut obs = Vanishing { model: &model, weight, use_mu_prime, last: None, integral: 0.0 };
    let traj = run_with(&cfg, model.clone(), init, None, &mut obs, plan.tolerances)?;
    Ok((traj, obs.integral))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub kappa: f64,
    /// Max over saved times of `‖ρ_κ - ρ_ref‖_{L²}`.
    pub dist_rho: f64,
    /// `(∫‖w_κ - w_ref‖²_{L²} dt)^{1/2}` over saved times.
    pub dist_w: f64,
    /// `κ∫∫μ'(ρ)|∇ρ|²` towards κ = 0, `(1-κ)∫∫|∇ρ|²` towards κ = 1.
    pub vanish_obs: f64,
    pub entropy_initial: f64,
    pub entropy_final: f64,
    /// Monitor failures of the member run.
    pub failures: Vec<String>,
}

/// Distances of `member` from `reference` on their common saved times.
pub fn compare(reference: &Trajectory, kappa: f64, member: &Trajectory, vanish_obs: f64) -> SweepRow {
    let mut dist_rho: f64 = 0.0;
    let mut w_sq = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (a, b) in member.states.iter().zip(&reference.states) {
        dist_rho = dist_rho.max(l2(&(&a.rho - &b.rho)));
        let dw = vector_l2(&a.w.axpy(-1.0, &b.w).expect("same grid")).powi(2);
        if let Some((t0, d0)) = prev {
            w_sq += 0.5 * (a.t - t0) * (dw + d0);
        }
        prev = Some((a.t, dw));
    }
    SweepRow {
        kappa,
        dist_rho,
        dist_w: w_sq.sqrt(),
        vanish_obs,
        entropy_initial: member.rows.first().map(|r| r.e_kappa).unwrap_or(f64::NAN),
        entropy_final: member.rows.last().map(|r| r.e_kappa).unwrap_or(f64::NAN),
        failures: member.failures(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub target: SweepTarget,
    /// Ordered from the farthest κ to the closest to the endpoint.
    pub rows: Vec<SweepRow>,
    pub reference_failures: Vec<String>,
}

pub const SWEEP_HEADER: [&str; 6] = ["kappa", "dist_rho", "dist_w", "vanish_obs", "entropy_initial", "entropy_final"];

impl SweepReport {
    pub fn new(target: SweepTarget, mut rows: Vec<SweepRow>, reference_failures: Vec<String>) -> Self {
        let e = target.endpoint();
        rows.sort_by(|a, b| (b.kappa - e).abs().total_cmp(&(a.kappa - e).abs()));
        Self { target, rows, reference_failures }
    }

    /// Set when any run failed its monitors.
    pub fn tainted(&self) -> bool {
        !self.reference_failures.is_empty() || self.rows.iter().any(|r| !r.failures.is_empty())
    }

    pub fn dist_rho_decreasing(&self) -> bool {
        self.rows.windows(2).all(|p| p[1].dist_rho < p[0].dist_rho)
    }

    pub fn dist_w_decreasing(&self) -> bool {
        self.rows.windows(2).all(|p| p[1].dist_w < p[0].dist_w)
    }

    /// Observable of the closest member over that of the farthest.
    pub fn vanishing_ratio(&self) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => b.vanish_obs / a.vanish_obs,
            _ => f64::NAN,
        }
    }

    /// Least-squares slope of `log dist` against `log |κ - endpoint|`.
    pub fn empirical_slopes(&self) -> (f64, f64) {
        let e = self.target.endpoint();
        let x: Vec<f64> = self.rows.iter().map(|r| (r.kappa - e).abs()).collect();
        let r: Vec<f64> = self.rows.iter().map(|r| r.dist_rho).collect();
        let w: Vec<f64> = self.rows.iter().map(|r| r.dist_w).collect();
        (crate::verification::fit_slope(&x, &r), crate::verification::fit_slope(&x, &w))
    }

    pub fn records(&self) -> Vec<[f64; 6]> {
        self.rows
            .iter()
            .map(|r| [r.kappa, r.dist_rho, r.dist_w, r.vanish_obs, r.entropy_initial, r.entropy_final])
            .collect()
    }
}

/// Runs the reference and every member sequentially.
pub fn kappa_sweep(plan: &SweepPlan) -> Result<SweepReport, SolverError> {
    plan.validate()?;
    let reference = reference(plan)?;
    let mut rows = Vec::new();
    for &k in &plan.kappas {
        let (traj, obs) = sweep_member(plan, k)?;
        rows.push(compare(&reference, k, &traj, obs));
    }
    Ok(SweepReport::new(plan.target, rows, reference.failures()))
}
