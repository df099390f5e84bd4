//! Time integration of the κ-entropy system.
//!
//! Continuity: `∂tρ + div(ρ[w]_δ) - 2κΔμ(ρ) = 0`.
//! Momentum: `∂t(ρw) + Div(J⊗w) - 2(1-κ)Div(μD(w)) - 2κDiv(μA(w)) + ∇π₁
//! = -2κ(1-κ)Div(μ∇v)` plus the optional ε-regularization, with the mass
//! flux `J = ρ[w]_δ - 2κ∇μ(ρ)` and `div w = 0`.
//! Auxiliary field (augmented mode): `∂t(ρv) + Div(J⊗v) - 2κDiv(μ∇v)
//! - 2κ∇((μ'ρ - μ)div v) = -2Div(μ∇ᵗw)`; the reduced mode sets `v = 2∇φ(ρ)`.

mod initial;
mod rhs;
mod run;
mod stepper;
mod terms;

pub use initial::*;
pub use rhs::{Forcing, Tendency, Workspace};
pub use run::*;
pub use stepper::*;
pub use terms::*;

use std::sync::Arc;

use thiserror::Error;

use crate::constitutive::{ConstitutiveError, PotentialLaw, ViscosityLaw};
use crate::fields::{grad, FieldError, Grid, ScalarField, Snapshot, VectorField};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("density fell to {min:.6e} (floor {floor:.6e}) at t = {t}")]
    PositivityFloor { t: f64, min: f64, floor: f64 },
    #[error("non-finite values at t = {t}")]
    NonFinite { t: f64 },
    #[error("pressure solve did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    Pressure { residual: f64, iterations: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
}

/// Which equations are assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Evolve `v` with its own equation.
    Augmented,
    /// Substitute `v = 2∇φ(ρ)`.
    Reduced,
    /// Dedicated variable-density incompressible Navier-Stokes assembly (κ = 0).
    IncompressibleNs,
    /// Dedicated κ = 1 assembly with the antisymmetric viscous term only.
    KsLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Forward/backward Euler splitting.
    Imex1,
    /// Two-stage, second-order, stiffly accurate IMEX Runge-Kutta.
    Imex2,
}

/// Numerical and physical parameters of one run.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub grid: Grid,
    pub kappa: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub mode: Mode,
    /// Weight of the `Δ²w - Div((1+|∇w|²)∇w)` regularization.
    pub epsilon: f64,
    /// Width of the Gaussian mollifier applied to the advecting velocity.
    pub mollify_width: f64,
    /// Coefficient `c` of the capillary force `c Div(ρ∇∇log ρ)`.
    pub capillarity: f64,
    /// Number of evenly spaced snapshots after the initial one.
    pub snapshots: usize,
    /// A diagnostics row is recorded every this many steps.
    pub diagnostics_every: usize,
    /// Relative residual target of the variable-density pressure solve.
    pub pressure_tol: f64,
}

impl SolverConfig {
    pub fn new(grid: Grid, kappa: f64, dt: f64, t_end: f64) -> Self {
        Self {
            grid,
            kappa,
            dt,
            t_end,
            scheme: Scheme::Imex2,
            mode: Mode::Reduced,
            epsilon: 0.0,
            mollify_width: 0.0,
            capillarity: 0.0,
            snapshots: 10,
            diagnostics_every: 1,
            pressure_tol: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::Config(m));
        if !(0.0..=1.0).contains(&self.kappa) {
            return bad(format!("kappa must lie in [0, 1], got {}", self.kappa));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be nonnegative, got {}", self.t_end));
        }
        if self.epsilon < 0.0 || self.mollify_width < 0.0 || self.capillarity < 0.0 {
            return bad("epsilon, mollify_width and capillarity must be nonnegative".into());
        }
        if self.mode == Mode::IncompressibleNs && self.kappa != 0.0 {
            return bad("the incompressible assembly requires kappa = 0".into());
        }
        if self.mode == Mode::KsLimit && self.kappa != 1.0 {
            return bad("the kappa = 1 assembly requires kappa = 1".into());
        }
        if self.diagnostics_every == 0 {
            return bad("diagnostics_every must be at least 1".into());
        }
        Ok(())
    }

    pub fn num_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Viscosity law with its potential.
#[derive(Clone, Debug)]
pub struct Model {
    pub law: ViscosityLaw,
    pub potential: PotentialLaw,
}

impl Model {
    pub fn new(law: ViscosityLaw) -> Result<Self, ConstitutiveError> {
        let potential = PotentialLaw::new(&law)?;
        Ok(Self { law, potential })
    }

    /// `φ(ρ)`, truncated to the retained band.
    pub fn phi_field(&self, rho: &ScalarField) -> ScalarField {
        rho.map(|s| self.potential.phi(s))
    }

    pub fn mu_field(&self, rho: &ScalarField) -> ScalarField {
        rho.map(|s| self.law.mu(s))
    }

    /// `2∇φ(ρ)`.
    pub fn two_grad_phi(&self, rho: &ScalarField) -> VectorField {
        grad(&self.phi_field(rho)).scale(2.0)
    }
}

pub type SharedModel = Arc<Model>;

/// Solution state at one instant.
#[derive(Clone, Debug)]
pub struct FluidState {
    pub rho: ScalarField,
    pub w: VectorField,
    /// Present only in augmented mode.
    pub v: Option<VectorField>,
    pub t: f64,
}

impl FluidState {
    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    /// Physical velocity `u = w - 2κ∇φ(ρ)`.
    pub fn velocity(&self, model: &Model, kappa: f64) -> VectorField {
        self.w.axpy(-kappa, &model.two_grad_phi(&self.rho)).expect("same grid")
    }

    /// `v` if evolved, otherwise `2∇φ(ρ)`.
    pub fn v_or_identified(&self, model: &Model) -> VectorField {
        self.v.clone().unwrap_or_else(|| model.two_grad_phi(&self.rho))
    }

    pub fn to_snapshot(&self) -> Snapshot {
        let mut s = Snapshot::new(*self.grid());
        s.push("rho", &self.rho);
        for (a, c) in self.w.comps().iter().enumerate() {
            s.push(&format!("w_{a}"), c);
        }
        if let Some(v) = &self.v {
            for (a, c) in v.comps().iter().enumerate() {
                s.push(&format!("v_{a}"), c);
            }
        }
        s
    }

    pub fn from_snapshot(s: &Snapshot, t: f64, grid: &Grid) -> Result<Self, FieldError> {
        let load = |name: &str| -> Result<ScalarField, FieldError> {
            let v = s.get(name).ok_or_else(|| FieldError::Snapshot(format!("missing field {name}")))?;
            ScalarField::from_values(grid, v)
        };
        let d = grid.dim();
        let rho = load("rho")?;
        let w = VectorField::new((0..d).map(|a| load(&format!("w_{a}"))).collect::<Result<_, _>>()?)?;
        let v = if s.get("v_0").is_some() {
            Some(VectorField::new((0..d).map(|a| load(&format!("v_{a}"))).collect::<Result<_, _>>()?)?)
        } else {
            None
        };
        Ok(Self { rho, w, v, t })
    }
}

/// `∂tρ` of `state`.
pub fn rhs_continuity(config: &SolverConfig, model: Arc<Model>, state: &FluidState) -> Result<ScalarField, SolverError> {
    Ok(Workspace::new(config, model).tendency(state)?.rho)
}

/// Solenoidal `∂t w` of `state`.
pub fn rhs_w(config: &SolverConfig, model: Arc<Model>, state: &FluidState) -> Result<VectorField, SolverError> {
    Ok(Workspace::new(config, model).tendency(state)?.w)
}

/// `∂t v` of `state`; `None` outside augmented mode.
pub fn rhs_v(config: &SolverConfig, model: Arc<Model>, state: &FluidState) -> Result<Option<VectorField>, SolverError> {
    Ok(Workspace::new(config, model).tendency(state)?.v)
}

/// Mean-zero pressure `π₁` enforcing `div ∂t w = 0`.
pub fn recover_pressure(config: &SolverConfig, model: Arc<Model>, state: &FluidState) -> Result<ScalarField, SolverError> {
    Ok(Workspace::new(config, model).tendency(state)?.pressure)
}
