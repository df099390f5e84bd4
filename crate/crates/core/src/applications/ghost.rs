//! Capillary force `c Div(ρ∇∇log ρ)` with `μ(ρ) = μ̄ρ`, `φ(ρ) = μ̄ log ρ`.

use crate::constitutive::{ConstitutiveError, LawKind, ViscosityLaw};
use crate::diagnostics::{dissipation_budget, quad, EntropyReport};
use crate::fields::{grad, grad_tensor, laplacian, tensor_div, vector_l2, ScalarField, Symmetry, TensorField, VectorField};
use crate::solver::{FluidState, Mode, Model, SolverConfig, SolverError};

/// Parameters of the capillary system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GhostConfig {
    pub capillarity: f64,
    pub kappa: f64,
    pub mu_bar: f64,
}

impl GhostConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.capillarity > 0.0 && self.kappa > 0.0 && self.mu_bar > 0.0) {
            return Err(SolverError::Config("capillarity, kappa and mu_bar must be positive".into()));
        }
        if self.kappa > 1.0 {
            return Err(SolverError::Config("kappa must not exceed 1".into()));
        }
        Ok(())
    }

    /// `μ(ρ) = μ̄ρ` on `[r, R]`.
    pub fn law(&self, r: f64, big_r: f64) -> Result<ViscosityLaw, ConstitutiveError> {
        ViscosityLaw::new(LawKind::Linear { intercept: 0.0, slope: self.mu_bar }, 0.0, r, big_r)
    }

    /// Solver configuration running the capillary system in reduced mode.
    pub fn solver_config(&self, grid: crate::fields::Grid, dt: f64, t_end: f64) -> SolverConfig {
        let mut c = SolverConfig::new(grid, self.kappa, dt, t_end);
        c.mode = Mode::Reduced;
        c.capillarity = self.capillarity;
        c
    }
}

/// `μ̄` of a law of the form `μ(ρ) = μ̄ρ`.
pub fn linear_coefficient(law: &ViscosityLaw) -> Result<f64, ConstitutiveError> {
    let bad = || ConstitutiveError::InvalidLaw(format!("{}: the capillary system needs mu(rho) = mu_bar*rho", law.label));
    if law.offset != 0.0 {
        return Err(bad());
    }
    match law.kind {
        LawKind::Linear { intercept, slope } if intercept == 0.0 && slope > 0.0 => Ok(slope),
        LawKind::Power { coefficient, alpha } if alpha == 1.0 && coefficient > 0.0 => Ok(coefficient),
        _ => Err(bad()),
    }
}

/// `Div(ρ∇∇log ρ)` with the truncated `log ρ` and a truncated product,
/// exactly as in the solver assembly.
pub fn capillary_direct(rho: &ScalarField) -> VectorField {
    let d = rho.grid().dim();
    let lr = rho.map(f64::ln);
    let h = grad_tensor(&grad(&lr));
    let comps = (0..d * d).map(|k| rho.product(h.get(k / d, k % d)).expect("same grid")).collect();
    tensor_div(&TensorField::new(comps, Symmetry::Symmetric).expect("components"))
}

/// Bohm form `2ρ∇(Δ√ρ/√ρ)`.
pub fn capillary_bohm(rho: &ScalarField) -> VectorField {
    let s = rho.map(f64::sqrt);
    let sv = s.values();
    let lv = laplacian(&s).values();
    let q: Vec<f64> = lv.iter().zip(&sv).map(|(l, s)| l / s).collect();
    let q = ScalarField::from_values(rho.grid(), &q).expect("finite");
    let g = grad(&q);
    VectorField::new(g.comps().iter().map(|c| rho.product(c).expect("same grid").scale(2.0)).collect())
        .expect("components")
}

/// `c Div(ρ∇∇log ρ)`, refusing densities at or below `floor`.
pub fn ghost_capillary(rho: &ScalarField, c: f64, floor: f64) -> Result<VectorField, SolverError> {
    let (lo, _) = rho.min_max();
    if lo <= floor {
        return Err(SolverError::PositivityFloor { t: f64::NAN, min: lo, floor });
    }
    Ok(capillary_direct(rho).scale(c))
}

/// `‖direct - Bohm‖ / ‖direct‖`.
pub fn bohm_residual(rho: &ScalarField) -> f64 {
    let a = capillary_direct(rho);
    let b = capillary_bohm(rho);
    let n = vector_l2(&a);
    let e = vector_l2(&a.axpy(-1.0, &b).expect("same grid"));
    if n > 0.0 {
        e / n
    } else {
        e
    }
}

/// Entropy of the capillary system and its budget.
#[derive(Clone, Debug, PartialEq)]
pub struct GhostEntropy {
    pub base: EntropyReport,
    /// `(c/2)∫ρ|∇log ρ|²`
    pub capillary_energy: f64,
    /// `2cκμ̄∫ρ|∇²log ρ|²`
    pub capillary_dissipation: f64,
    /// `E_κ + capillary_energy`
    pub entropy: f64,
    /// Total dissipation rate.
    pub dissipation: f64,
}

impl GhostEntropy {
    pub fn terms(&self) -> [f64; 5] {
        let [a, b, c, e] = self.base.terms();
        [a, b, c, e, self.capillary_dissipation]
    }
}

/// Entropy of the capillary system; fails unless `μ(ρ) = μ̄ρ`.
pub fn ghost_entropy(state: &FluidState, model: &Model, kappa: f64, c: f64) -> Result<GhostEntropy, ConstitutiveError> {
    let mu_bar = linear_coefficient(&model.law)?;
    let base = dissipation_budget(state, model, kappa, 0.0);
    let grid = *state.grid();
    let lr = state.rho.map(f64::ln);
    let g = grad(&lr);
    let gv = g.values();
    let hv = grad_tensor(&g).values();
    let rho = state.rho.values();
    let np = rho.len();
    let e: Vec<f64> = (0..np).map(|p| rho[p] * gv.iter().map(|c| c[p] * c[p]).sum::<f64>()).collect();
    let h: Vec<f64> = (0..np).map(|p| rho[p] * hv.iter().map(|c| c[p] * c[p]).sum::<f64>()).collect();
    let capillary_energy = 0.5 * c * quad(&grid, &e);
    let capillary_dissipation = 2.0 * c * kappa * mu_bar * quad(&grid, &h);
    Ok(GhostEntropy {
        entropy: base.e_kappa + capillary_energy,
        dissipation: base.dissipation() + capillary_dissipation,
        base,
        capillary_energy,
        capillary_dissipation,
    })
}
