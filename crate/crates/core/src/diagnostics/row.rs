use super::{continuous_extrema, dissipation_budget, divergence_residual, identification_error, mass, EntropyReport, Extrema};
use crate::solver::{FluidState, Model, SolverConfig};

/// Fixed leading columns of the diagnostics stream.
pub const COLUMNS: [&str; 11] = [
    "t",
    "E_kappa",
    "D_rot",
    "D_dev",
    "D_div",
    "eps_budget",
    "min_rho",
    "max_rho",
    "div_w_residual",
    "mass",
    "identification_error",
];

/// One diagnostics row; application columns follow the fixed ones.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub e_kappa: f64,
    pub d_rot: f64,
    pub d_dev: f64,
    pub d_div: f64,
    pub eps_budget: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    pub div_w_residual: f64,
    pub mass: f64,
    pub identification_error: f64,
    pub extra: Vec<(String, f64)>,
}

impl DiagnosticsRow {
    pub fn header(&self) -> Vec<String> {
        COLUMNS.iter().map(|s| s.to_string()).chain(self.extra.iter().map(|(k, _)| k.clone())).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![
            self.t,
            self.e_kappa,
            self.d_rot,
            self.d_dev,
            self.d_div,
            self.eps_budget,
            self.min_rho,
            self.max_rho,
            self.div_w_residual,
            self.mass,
            self.identification_error,
        ];
        v.extend(self.extra.iter().map(|(_, x)| *x));
        v
    }

    pub fn get(&self, column: &str) -> Option<f64> {
        let h = self.header();
        h.iter().position(|c| c == column).map(|i| self.values()[i])
    }
}

/// Row computed from the state alone, with the entropy report and density
/// extrema it was built from. Ghost columns are added when the capillarity
/// is nonzero.
pub fn diagnostics_row(state: &FluidState, model: &Model, cfg: &SolverConfig) -> (DiagnosticsRow, EntropyReport, Extrema) {
    let rep = dissipation_budget(state, model, cfg.kappa, cfg.epsilon);
    let ext = continuous_extrema(&state.rho);
    let mut extra = Vec::new();
    if cfg.capillarity != 0.0 {
        if let Ok(g) = crate::applications::ghost_entropy(state, model, cfg.kappa, cfg.capillarity) {
            extra.push(("bohm_residual".to_string(), crate::applications::bohm_residual(&state.rho)));
            extra.push(("ghost_entropy".to_string(), g.entropy));
        }
    }
    let row = DiagnosticsRow {
        t: state.t,
        e_kappa: rep.e_kappa,
        d_rot: rep.d_rot,
        d_dev: rep.d_dev,
        d_div: rep.d_div,
        eps_budget: rep.eps_budget,
        min_rho: ext.min,
        max_rho: ext.max,
        div_w_residual: divergence_residual(&state.w),
        mass: mass(&state.rho),
        identification_error: identification_error(state, model),
        extra,
    };
    (row, rep, ext)
}
