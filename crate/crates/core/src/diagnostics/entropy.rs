use super::quad;
use crate::fields::{grad, grad_tensor, laplacian, ScalarField, VectorField};
use crate::solver::{FluidState, Model};

/// κ-entropy and its itemized dissipation rate at one instant.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EntropyReport {
    pub t: f64,
    pub kappa: f64,
    /// `∫ρ(|w|²/2 + (1-κ)κ|2∇φ|²/2)`
    pub e_kappa: f64,
    /// `∫ρ((1-κ)|u|² + κ|u+2∇φ|²)/2`, equal to `e_kappa`.
    pub e_two_velocity: f64,
    /// `2κ∫μ|A(w)|²`
    pub d_rot: f64,
    /// `2(1-κ)∫μ|D(u) - (div u/d)I|²`
    pub d_dev: f64,
    /// The deviatoric term written as `2(1-κ)∫μ|D(w - 2κ∇φ) + (2κ/d)Δφ I|²`.
    pub d_dev_alt: f64,
    /// `2(1-κ)∫(((1-d)/d)μ + μ'ρ)|2κΔφ|²`
    pub d_div: f64,
    /// `2(1-κ)∫μ|D(u)|² + 2κ∫μ|A(u)|² + 2(1-κ)∫(μ'ρ-μ)|2κΔφ|²`
    pub d_assembled: f64,
    /// `ε∫(|Δw|² + (1+|∇w|²)|∇w|²)`
    pub eps_budget: f64,
}

impl EntropyReport {
    /// `d_rot + d_dev + d_div`.
    pub fn dissipation(&self) -> f64 {
        self.d_rot + self.d_dev + self.d_div
    }

    /// Relative gap between the split and the assembled dissipation.
    pub fn budget_residual(&self) -> f64 {
        let s = self.dissipation();
        (s - self.d_assembled).abs() / s.abs().max(self.d_assembled.abs()).max(f64::MIN_POSITIVE)
    }

    /// The budget terms that must be nonnegative.
    pub fn terms(&self) -> [f64; 4] {
        [self.d_rot, self.d_dev, self.d_div, self.eps_budget]
    }
}

/// κ-entropy without the ε-budget.
pub fn kappa_entropy(state: &FluidState, model: &Model, kappa: f64) -> EntropyReport {
    dissipation_budget(state, model, kappa, 0.0)
}

/// κ-entropy with both forms of the dissipation budget.
pub fn dissipation_budget(state: &FluidState, model: &Model, kappa: f64, epsilon: f64) -> EntropyReport {
    let grid = *state.grid();
    let d = grid.dim();
    let df = d as f64;
    let rho = state.rho.values();
    let np = rho.len();
    let phi = model.phi_field(&state.rho);
    let gphi = grad(&phi);
    let lap_phi = laplacian(&phi).values();
    let hess = grad_tensor(&gphi).values();
    let tgp: Vec<Vec<f64>> = gphi.scale(2.0).values();
    let w = state.w.values();
    let gw = grad_tensor(&state.w).values();
    let mut mu = vec![0.0; np];
    let mut mup = vec![0.0; np];
    for p in 0..np {
        let (m, dm) = model.law.eval(rho[p]);
        mu[p] = m;
        mup[p] = dm;
    }

    let mut e = vec![0.0; np];
    let mut e2 = vec![0.0; np];
    let mut rot = vec![0.0; np];
    let mut dev = vec![0.0; np];
    let mut dev_alt = vec![0.0; np];
    let mut dv = vec![0.0; np];
    let mut asm = vec![0.0; np];
    for p in 0..np {
        let mut w2 = 0.0;
        let mut t2 = 0.0;
        let mut u2 = 0.0;
        let mut ut2 = 0.0;
        for a in 0..d {
            let u = w[a][p] - kappa * tgp[a][p];
            w2 += w[a][p] * w[a][p];
            t2 += tgp[a][p] * tgp[a][p];
            u2 += u * u;
            ut2 += (u + tgp[a][p]) * (u + tgp[a][p]);
        }
        e[p] = rho[p] * (0.5 * w2 + 0.5 * (1.0 - kappa) * kappa * t2);
        e2[p] = 0.5 * rho[p] * ((1.0 - kappa) * u2 + kappa * ut2);

        // velocity gradient of u = w - 2κ∇φ
        let gu = |i: usize, j: usize| gw[i * d + j][p] - 2.0 * kappa * hess[i * d + j][p];
        let divu: f64 = (0..d).map(|a| gu(a, a)).sum();
        let mut a2 = 0.0;
        let mut d2 = 0.0;
        let mut dev2 = 0.0;
        let mut alt2 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let aw = 0.5 * (gw[i * d + j][p] - gw[j * d + i][p]);
                let du = 0.5 * (gu(i, j) + gu(j, i));
                let id = if i == j { 1.0 } else { 0.0 };
                let dw = 0.5 * (gw[i * d + j][p] + gw[j * d + i][p]);
                let alt = dw - 2.0 * kappa * hess[i * d + j][p] + id * 2.0 * kappa / df * lap_phi[p];
                a2 += aw * aw;
                d2 += du * du;
                dev2 += (du - id * divu / df).powi(2);
                alt2 += alt * alt;
            }
        }
        let q = (2.0 * kappa * lap_phi[p]).powi(2);
        rot[p] = 2.0 * kappa * mu[p] * a2;
        dev[p] = 2.0 * (1.0 - kappa) * mu[p] * dev2;
        dev_alt[p] = 2.0 * (1.0 - kappa) * mu[p] * alt2;
        dv[p] = 2.0 * (1.0 - kappa) * ((1.0 - df) / df * mu[p] + mup[p] * rho[p]) * q;
        asm[p] = 2.0 * (1.0 - kappa) * mu[p] * d2 + rot[p] + 2.0 * (1.0 - kappa) * (mup[p] * rho[p] - mu[p]) * q;
    }
    let eps_budget = if epsilon != 0.0 { epsilon * regularization_budget(&state.w) } else { 0.0 };
    EntropyReport {
        t: state.t,
        kappa,
        e_kappa: quad(&grid, &e),
        e_two_velocity: quad(&grid, &e2),
        d_rot: quad(&grid, &rot),
        d_dev: quad(&grid, &dev),
        d_dev_alt: quad(&grid, &dev_alt),
        d_div: quad(&grid, &dv),
        d_assembled: quad(&grid, &asm),
        eps_budget,
    }
}

/// `∫(|Δw|² + (1+|∇w|²)|∇w|²)`.
pub fn regularization_budget(w: &VectorField) -> f64 {
    let grid = *w.grid();
    let lap: Vec<Vec<f64>> = w.comps().iter().map(|c| laplacian(c).values()).collect();
    let g = grad_tensor(w).values();
    let np = lap[0].len();
    let vals: Vec<f64> = (0..np)
        .map(|p| {
            let l2: f64 = lap.iter().map(|c| c[p] * c[p]).sum();
            let g2: f64 = g.iter().map(|c| c[p] * c[p]).sum();
            l2 + (1.0 + g2) * g2
        })
        .collect();
    quad(&grid, &vals)
}

/// `‖v - 2∇φ(ρ)‖_{L²}`, zero in reduced mode.
pub fn identification_error(state: &FluidState, model: &Model) -> f64 {
    match &state.v {
        Some(v) => crate::fields::vector_l2(&v.axpy(-1.0, &model.two_grad_phi(&state.rho)).expect("same grid")),
        None => 0.0,
    }
}

/// `‖div w‖_{L²} / ‖w‖_{H¹}`.
pub fn divergence_residual(w: &VectorField) -> f64 {
    let h = crate::fields::vector_h1(w);
    if h == 0.0 {
        0.0
    } else {
        crate::fields::l2(&crate::fields::div(w)) / h
    }
}

/// `∫ρ`.
pub fn mass(rho: &ScalarField) -> f64 {
    rho.integral()
}
