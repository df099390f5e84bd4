//! Runs of the augmented system measuring `‖v - 2∇φ(ρ)‖` across
//! mollification widths `δ` and initial perturbations `η`.

use std::sync::Arc;

use crate::constitutive::{LawKind, ViscosityLaw};
use crate::fields::{vector_h1, vector_l2, Grid};
use crate::solver::{initial_state, AuxInit, Mode, Model, RandomData, Solver, SolverConfig, SolverError};

#[derive(Clone, Debug, PartialEq)]
pub struct IdentificationConfig {
    pub grid: Grid,
    pub kappa: f64,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub deltas: Vec<f64>,
    pub etas: Vec<f64>,
    /// Steps between error samples.
    pub every: usize,
}

impl IdentificationConfig {
    pub fn new(grid: Grid, dt: f64, t_end: f64) -> Self {
        Self { grid, kappa: 0.5, dt, t_end, seed: 1, deltas: vec![0.2, 0.1, 0.05, 0.0], etas: vec![0.0, 0.1], every: 10 }
    }

    /// `μ(ρ) = ρ` on `[0.5, 2]`.
    pub fn model(&self) -> Arc<Model> {
        let law = ViscosityLaw::new(LawKind::Linear { intercept: 0.0, slope: 1.0 }, 0.0, 0.5, 2.0)
            .expect("valid linear law");
        Arc::new(Model::new(law).expect("linear law has a potential"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentificationRow {
    pub delta: f64,
    pub eta: f64,
    /// `‖v - 2∇φ(ρ)‖_{L²}` at `t = 0`.
    pub initial: f64,
    /// Max over sampled times of the L² error.
    pub max_l2: f64,
    pub final_l2: f64,
    /// Time-integrated `H¹` error, `(∫‖·‖²_{H¹} dt)^{1/2}`.
    pub l2_h1: f64,
    /// `(t, L² error)` samples.
    pub history: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentificationReport {
    pub rows: Vec<IdentificationRow>,
    /// Unperturbed errors do not increase as `δ` decreases.
    pub monotone_in_delta: bool,
    /// Perturbed errors stay within [`GROWTH_BOUND`] times their initial value.
    pub bounded_growth: bool,
}

pub const GROWTH_BOUND: f64 = 10.0;

impl IdentificationReport {
    pub fn row(&self, delta: f64, eta: f64) -> Option<&IdentificationRow> {
        self.rows.iter().find(|r| r.delta == delta && r.eta == eta)
    }

    pub fn passed(&self) -> bool {
        self.monotone_in_delta && self.bounded_growth
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,eta,initial,max_l2,final_l2,l2_h1\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.delta, r.eta, r.initial, r.max_l2, r.final_l2, r.l2_h1
            ));
        }
        s
    }
}

/// One augmented run with mollification `delta` and perturbation `eta`.
pub fn identification_run(cfg: &IdentificationConfig, delta: f64, eta: f64) -> Result<IdentificationRow, SolverError> {
    let model = cfg.model();
    let data = RandomData::new(cfg.seed).generate(&cfg.grid);
    let aux = if eta == 0.0 { AuxInit::Consistent } else { AuxInit::Perturbed(eta) };
    let mut state = initial_state(&data, &model, cfg.kappa, aux);
    let mut sc = SolverConfig::new(cfg.grid, cfg.kappa, cfg.dt, cfg.t_end);
    sc.mode = Mode::Augmented;
    sc.mollify_width = delta;
    let mut solver = Solver::new(&sc, model.clone(), state.rho.mean())?;
    let error = |s: &crate::solver::FluidState| {
        let e = s.v.as_ref().expect("augmented state").axpy(-1.0, &model.two_grad_phi(&s.rho)).expect("same grid");
        (vector_l2(&e), vector_h1(&e))
    };
    let (e0, h0) = error(&state);
    let mut history = vec![(0.0, e0)];
    let mut max_l2 = e0;
    let mut h1_sq = 0.0;
    let mut last = (0.0, h0);
    let steps = sc.num_steps();
    let every = cfg.every.max(1);
    for n in 1..=steps {
        state = solver.step(&state)?.state;
        if n % every == 0 || n == steps {
            let (e, h) = error(&state);
            h1_sq += 0.5 * (state.t - last.0) * (h * h + last.1 * last.1);
            last = (state.t, h);
            max_l2 = max_l2.max(e);
            history.push((state.t, e));
        }
    }
    let final_l2 = history.last().map(|x| x.1).unwrap_or(e0);
    Ok(IdentificationRow { delta, eta, initial: e0, max_l2, final_l2, l2_h1: h1_sq.sqrt(), history })
}

/// All `(δ, η)` combinations of `cfg`.
pub fn identification_experiment(cfg: &IdentificationConfig) -> Result<IdentificationReport, SolverError> {
    let mut rows = Vec::new();
    for &eta in &cfg.etas {
        for &delta in &cfg.deltas {
            rows.push(identification_run(cfg, delta, eta)?);
        }
    }
    Ok(summarize(rows))
}

pub fn summarize(rows: Vec<IdentificationRow>) -> IdentificationReport {
    let mut clean: Vec<&IdentificationRow> = rows.iter().filter(|r| r.eta == 0.0).collect();
    clean.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    let monotone_in_delta = clean.windows(2).all(|p| p[1].max_l2 <= p[0].max_l2 * (1.0 + 1e-12));
    let bounded_growth = rows
        .iter()
        .filter(|r| r.eta > 0.0)
        .all(|r| r.max_l2.is_finite() && r.max_l2 <= GROWTH_BOUND * r.initial);
    IdentificationReport { rows, monotone_in_delta, bounded_growth }
}
