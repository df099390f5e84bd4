//! Manufactured solution for `μ(ρ) = ρ` in two dimensions:
//! `ρ = m + a sin(x - t)`, `w = (A cos t e^{sin y}, 0)`, with hand-derived
//! sources. The steady variant drops the time dependence. The velocity
//! profile is not band-limited, so refinement in `N` is visible.

use std::sync::Arc;

use super::ConvergenceReport;
use crate::constitutive::{LawKind, ViscosityLaw};
use crate::fields::{l2, linf, vector_l2, vector_linf, Grid, ScalarField, VectorField};
use crate::solver::{FluidState, Forcing, Mode, Model, Scheme, Solver, SolverConfig, SolverError, Workspace};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedCase {
    pub kappa: f64,
    pub rho_mean: f64,
    pub rho_amplitude: f64,
    pub velocity_amplitude: f64,
    pub steady: bool,
}

/// Pointwise values of the closed-form solution and its derivatives.
struct Local {
    rho: f64,
    rho_t: f64,
    rho_x: f64,
    rho_xx: f64,
    rho_xxx: f64,
    w: f64,
    w_t: f64,
    w_y: f64,
    w_yy: f64,
}

impl ManufacturedCase {
    pub fn new(kappa: f64) -> Self {
        Self { kappa, rho_mean: 1.5, rho_amplitude: 0.2, velocity_amplitude: 0.5, steady: false }
    }

    pub fn steady(kappa: f64) -> Self {
        Self { steady: true, ..Self::new(kappa) }
    }

    /// Density band `[r, R]` of the law; contains the solution for all times.
    pub fn interval(&self) -> (f64, f64) {
        (self.rho_mean - 2.5 * self.rho_amplitude, self.rho_mean + 2.5 * self.rho_amplitude)
    }

    pub fn model(&self) -> Arc<Model> {
        let (r, big_r) = self.interval();
        let law = ViscosityLaw::new(LawKind::Linear { intercept: 0.0, slope: 1.0 }, 0.0, r, big_r)
            .expect("valid linear law");
        Arc::new(Model::new(law).expect("linear law has a potential"))
    }

    pub fn config(&self, grid: Grid, dt: f64, t_end: f64) -> SolverConfig {
        let mut c = SolverConfig::new(grid, self.kappa, dt, t_end);
        c.mode = Mode::Reduced;
        c.scheme = Scheme::Imex2;
        c
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<(), SolverError> {
        if grid.dim() != 2 || (grid.fundamental() - 1.0).abs() > 1e-14 {
            return Err(SolverError::Config("manufactured case needs the 2π-periodic square".into()));
        }
        let (r, big_r) = self.interval();
        if self.rho_mean - self.rho_amplitude.abs() < r || self.rho_mean + self.rho_amplitude.abs() > big_r {
            return Err(SolverError::Config("manufactured density leaves its law interval".into()));
        }
        Ok(())
    }

    fn local(&self, t: f64, x: [f64; 3]) -> Local {
        let a = self.rho_amplitude;
        let s = if self.steady { x[0] } else { x[0] - t };
        let (c, dc) = if self.steady { (1.0, 0.0) } else { (t.cos(), -t.sin()) };
        let va = self.velocity_amplitude;
        let (sy, cy) = x[1].sin_cos();
        let f = sy.exp();
        Local {
            rho: self.rho_mean + a * s.sin(),
            rho_t: if self.steady { 0.0 } else { -a * s.cos() },
            rho_x: a * s.cos(),
            rho_xx: -a * s.sin(),
            rho_xxx: -a * s.cos(),
            w: va * c * f,
            w_t: va * dc * f,
            w_y: va * c * cy * f,
            w_yy: va * c * (cy * cy - sy) * f,
        }
    }

    pub fn exact(&self, grid: &Grid, t: f64) -> FluidState {
        let rho = ScalarField::from_fn(grid, |x| self.local(t, x).rho);
        let mut w = VectorField::from_fn(grid, |x| [self.local(t, x).w, 0.0, 0.0]);
        w.solenoidal = true;
        FluidState { rho, w, v: None, t }
    }

    /// `(∂tρ, ∂t w)` of the exact solution.
    pub fn exact_rates(&self, grid: &Grid, t: f64) -> (ScalarField, VectorField) {
        let r = ScalarField::from_fn(grid, |x| self.local(t, x).rho_t);
        let w = VectorField::from_fn(grid, |x| [self.local(t, x).w_t, 0.0, 0.0]);
        (r, w)
    }

    fn source_at(&self, t: f64, x: [f64; 3]) -> (f64, [f64; 2]) {
        let k = self.kappa;
        let p = self.local(t, x);
        let s_rho = p.rho_t + p.rho_x * p.w - 2.0 * k * p.rho_xx;
        let curv = p.rho_xxx - 2.0 * p.rho_x * p.rho_xx / p.rho + p.rho_x.powi(3) / (p.rho * p.rho);
        let s1 = p.rho_t * p.w + p.rho * p.w_t + p.w * (p.rho_x * p.w - 2.0 * k * p.rho_xx) - p.rho * p.w_yy
            + 4.0 * k * (1.0 - k) * curv;
        let s2 = -(1.0 - 2.0 * k) * p.rho_x * p.w_y;
        (s_rho, [s1, s2])
    }

    /// Relative mismatch between the forced assembly at the exact solution
    /// and the exact time derivatives at time `t`.
    pub fn source_residual(&self, grid: &Grid, t: f64) -> Result<f64, SolverError> {
        self.check_grid(grid)?;
        let cfg = self.config(*grid, 1e-3, 1.0);
        let mut ws = Workspace::new(&cfg, self.model()).with_forcing(Arc::new(*self));
        let tend = ws.tendency(&self.exact(grid, t))?;
        let (rt, wt) = self.exact_rates(grid, t);
        let (sr, sm) = self.sources(grid, t);
        let scale = (l2(&sr).powi(2) + vector_l2(&sm).powi(2)).sqrt().max(l2(&rt).max(vector_l2(&wt)));
        let er = l2(&(&tend.rho - &rt));
        let ew = vector_l2(&tend.w.axpy(-1.0, &wt).expect("same grid"));
        Ok((er * er + ew * ew).sqrt() / scale)
    }
}

impl Forcing for ManufacturedCase {
    fn sources(&self, grid: &Grid, t: f64) -> (ScalarField, VectorField) {
        let r = ScalarField::from_fn(grid, |x| self.source_at(t, x).0);
        let m = VectorField::from_fn(grid, |x| {
            let s = self.source_at(t, x).1;
            [s[0], s[1], 0.0]
        });
        (r, m)
    }
}

/// Relative `(L², L∞)` distance of `(ρ, w)` from `(ρ*, w*)`.
pub fn state_error(state: &FluidState, exact: &FluidState) -> (f64, f64) {
    let dr = &state.rho - &exact.rho;
    let dw = state.w.axpy(-1.0, &exact.w).expect("same grid");
    let e2 = (l2(&dr).powi(2) + vector_l2(&dw).powi(2)).sqrt();
    let n2 = (l2(&exact.rho).powi(2) + vector_l2(&exact.w).powi(2)).sqrt();
    let einf = linf(&dr).max(vector_linf(&dw));
    let ninf = linf(&exact.rho).max(vector_linf(&exact.w));
    (e2 / n2, einf / ninf)
}

/// Forced run of `case` under `config`; returns the relative `(L², L∞)`
/// error at `t_end`.
pub fn mms_run(case: &ManufacturedCase, config: &SolverConfig) -> Result<(f64, f64), SolverError> {
    case.check_grid(&config.grid)?;
    let model = case.model();
    let mut state = case.exact(&config.grid, 0.0);
    let mut solver = Solver::new(config, model, state.rho.mean())?.with_forcing(Arc::new(*case));
    for _ in 0..config.num_steps() {
        state = solver.step(&state)?.state;
    }
    Ok(state_error(&state, &case.exact(&config.grid, state.t)))
}

/// Spatial refinement over `ns` with `steps` steps of size `dt`.
pub fn mms_spatial(
    case: &ManufacturedCase,
    ns: &[usize],
    dt: f64,
    steps: usize,
) -> Result<ConvergenceReport, SolverError> {
    let mut sizes = Vec::new();
    let (mut e2, mut einf) = (Vec::new(), Vec::new());
    for &n in ns {
        let grid = Grid::periodic(2, n)?;
        let cfg = case.config(grid, dt, dt * steps as f64);
        let (a, b) = mms_run(case, &cfg)?;
        sizes.push(grid.spacing());
        e2.push(a);
        einf.push(b);
    }
    Ok(ConvergenceReport::from_errors(sizes, e2, einf))
}

/// Temporal refinement over `dts` on an `n`-point grid up to `t_end`.
pub fn mms_temporal(
    case: &ManufacturedCase,
    n: usize,
    dts: &[f64],
    t_end: f64,
    scheme: Scheme,
) -> Result<ConvergenceReport, SolverError> {
    let grid = Grid::periodic(2, n)?;
    let (mut e2, mut einf) = (Vec::new(), Vec::new());
    for &dt in dts {
        let mut cfg = case.config(grid, dt, t_end);
        cfg.scheme = scheme;
        let (a, b) = mms_run(case, &cfg)?;
        e2.push(a);
        einf.push(b);
    }
    Ok(ConvergenceReport::from_errors(dts.to_vec(), e2, einf))
}
