//! IMEX time stepping with a linearized implicit diffusion about the mean
//! density.

use std::sync::Arc;

use num_complex::Complex64;

use super::rhs::{axpy, Forcing, Raw, Vars, Workspace};
use super::{FluidState, Mode, Model, Scheme, SolverConfig, SolverError};
use crate::fields::spectral::Context;
use crate::fields::{div, vector_h1, ScalarField, VectorField};

type C = Complex64;

/// `γ = 1 - 1/√2` of the two-stage scheme.
pub const IMEX2_GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

/// `δ = 1 - 1/(2γ)` of the two-stage scheme.
pub fn imex2_delta() -> f64 {
    1.0 - 1.0 / (2.0 * IMEX2_GAMMA)
}

/// Amplification factor of one step for `y' = λy` with `θλ` treated
/// implicitly and `(1-θ)λ` explicitly; `z = λ dt`.
pub fn amplification(scheme: Scheme, z: f64, theta: f64) -> f64 {
    let zi = theta * z;
    let ze = (1.0 - theta) * z;
    match scheme {
        Scheme::Imex1 => (1.0 + ze) / (1.0 - zi),
        Scheme::Imex2 => {
            let g = IMEX2_GAMMA;
            let dl = imex2_delta();
            let y2 = (1.0 + g * ze) / (1.0 - g * zi);
            (1.0 + dl * ze + (1.0 - dl) * ze * y2 + (1.0 - g) * zi * y2) / (1.0 - g * zi)
        }
    }
}

/// Decay factor of a single Fourier mode with diffusion rate `nu |k|^2`
/// under the implicit diffusion used by the solver.
pub fn stokes_oracle(scheme: Scheme, k2: f64, nu: f64, dt: f64) -> f64 {
    amplification(scheme, -nu * k2 * dt, 1.0)
}

/// Per-mode eigenvalues of the implicit linear operator.
struct Linear {
    rho: Vec<f64>,
    w: Vec<f64>,
    v_long: Vec<f64>,
    v_trans: Vec<f64>,
}

impl Linear {
    fn new(ctx: &Context, cfg: &SolverConfig, model: &Model, rho_mean: f64) -> Self {
        let (mu, dmu) = model.law.eval(rho_mean);
        let kappa = cfg.kappa;
        let k_diff = match cfg.mode {
            Mode::IncompressibleNs => 0.0,
            Mode::KsLimit => 1.0,
            _ => kappa,
        };
        let nu = mu / rho_mean;
        let eps = cfg.epsilon / rho_mean;
        let rho = ctx.k2.iter().map(|&k2| -2.0 * k_diff * dmu * k2).collect();
        let w = ctx.k2.iter().map(|&k2| -nu * k2 - eps * (k2 * k2 + k2)).collect();
        let v_long = ctx.k2.iter().map(|&k2| -2.0 * kappa * dmu * k2).collect();
        let v_trans = ctx.k2.iter().map(|&k2| -2.0 * kappa * nu * k2).collect();
        Self { rho, w, v_long, v_trans }
    }

    fn apply(&self, ctx: &Context, x: &Vars) -> Vars {
        let mul = |c: &[C], l: &[f64]| -> Vec<C> { c.iter().zip(l).map(|(a, b)| a * b).collect() };
        Vars {
            rho: mul(&x.rho, &self.rho),
            w: x.w.iter().map(|c| mul(c, &self.w)).collect(),
            v: x.v.as_ref().map(|v| self.lame(ctx, v, |lt, ll| (lt, ll))),
        }
    }

    /// Solves `(I - c L) y = x`.
    fn solve(&self, ctx: &Context, x: &Vars, c: f64) -> Vars {
        let div = |y: &[C], l: &[f64]| -> Vec<C> { y.iter().zip(l).map(|(a, b)| a / (1.0 - c * b)).collect() };
        Vars {
            rho: div(&x.rho, &self.rho),
            w: x.w.iter().map(|y| div(y, &self.w)).collect(),
            v: x.v.as_ref().map(|v| self.lame(ctx, v, |lt, ll| (1.0 / (1.0 - c * lt), 1.0 / (1.0 - c * ll)))),
        }
    }

    /// Applies `f(λ_T, λ_L)` separately to the transverse and longitudinal parts.
    fn lame(&self, ctx: &Context, v: &[Vec<C>], f: impl Fn(f64, f64) -> (f64, f64)) -> Vec<Vec<C>> {
        let d = v.len();
        let mut out = vec![vec![C::new(0.0, 0.0); v[0].len()]; d];
        for idx in 0..v[0].len() {
            let (ft, fl) = f(self.v_trans[idx], self.v_long[idx]);
            let k2 = ctx.k2[idx];
            if k2 == 0.0 {
                for a in 0..d {
                    out[a][idx] = ft * v[a][idx];
                }
                continue;
            }
            let mut kv = C::new(0.0, 0.0);
            for a in 0..d {
                kv += ctx.k[a][idx] * v[a][idx];
            }
            let kv = kv / k2;
            for a in 0..d {
                let long = ctx.k[a][idx] * kv;
                out[a][idx] = ft * (v[a][idx] - long) + fl * long;
            }
        }
        out
    }
}

/// Result of one step.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: FluidState,
    /// Effective mass flux of the step: `ρ(t+dt) = ρ(t) - dt div(flux)`.
    pub mass_flux: VectorField,
    /// Largest `‖div w‖ / ‖w‖_{H¹}` over the stage values.
    pub max_stage_divergence: f64,
    pub pressure_iterations: usize,
}

/// Time stepper owning the assembly workspace.
pub struct Solver {
    pub(crate) ws: Workspace,
    lin: Linear,
}

impl Solver {
    pub fn new(config: &SolverConfig, model: Arc<Model>, rho_mean: f64) -> Result<Self, SolverError> {
        config.validate()?;
        let ws = Workspace::new(config, model.clone());
        let lin = Linear::new(&ws.ctx, config, &model, rho_mean);
        Ok(Self { ws, lin })
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.ws.forcing = Some(forcing);
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.ws.config
    }

    pub fn model(&self) -> &Model {
        &self.ws.model
    }

    pub fn workspace(&mut self) -> &mut Workspace {
        &mut self.ws
    }

    fn explicit(&mut self, y: &Vars, t: f64) -> Result<(Vars, Raw), SolverError> {
        let raw = self.ws.assemble(y, t)?;
        let mut e = raw.vars.clone();
        let ly = self.lin.apply(&self.ws.ctx, y);
        e.axpy(-1.0, &ly);
        Ok((e, raw))
    }

    fn stage_divergence(&self, y: &Vars) -> f64 {
        let g = self.ws.config.grid;
        let w = VectorField::new(
            y.w.iter().map(|c| ScalarField::from_coeffs(&g, c.clone()).expect("length")).collect(),
        )
        .expect("components");
        let h = vector_h1(&w);
        if h == 0.0 {
            0.0
        } else {
            crate::fields::l2(&div(&w)) / h
        }
    }

    /// Advances `state` by one step of size `dt`.
    pub fn step(&mut self, state: &FluidState) -> Result<StepOutput, SolverError> {
        let dt = self.ws.config.dt;
        let t = state.t;
        let ctx = self.ws.ctx.clone();
        let y = Vars::from_state(state);
        let d = state.grid().dim();
        let lrho = self.lin.rho.clone();
        // flux J_L of the implicit diffusion, L ρ = -div(J_L)
        let rho_rate = |s: &Vars| -> Vec<Vec<C>> {
            (0..d)
                .map(|a| {
                    s.rho
                        .iter()
                        .zip(&ctx.k[a])
                        .zip(&ctx.k2)
                        .zip(&lrho)
                        .map(|(((r, &k), &k2), &l)| {
                            if k2 == 0.0 {
                                C::new(0.0, 0.0)
                            } else {
                                C::new(-k * r.im, k * r.re) * (l / k2)
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let mut flux: Vec<Vec<C>> = vec![vec![C::new(0.0, 0.0); ctx.k2.len()]; d];
        let mut max_div: f64 = 0.0;
        let mut iters = 0;
        let next = match self.ws.config.scheme {
            Scheme::Imex1 => {
                let (e1, raw1) = self.explicit(&y, t)?;
                iters += raw1.iterations;
                let mut r = y.clone();
                r.axpy(dt, &e1);
                let y1 = self.lin.solve(&ctx, &r, dt);
                let jl0 = rho_rate(&y);
                let jl1 = rho_rate(&y1);
                for a in 0..d {
                    axpy(&mut flux[a], 1.0, &raw1.flux[a]);
                    axpy(&mut flux[a], -1.0, &jl0[a]);
                    axpy(&mut flux[a], 1.0, &jl1[a]);
                }
                max_div = max_div.max(self.stage_divergence(&y1));
                y1
            }
            Scheme::Imex2 => {
                let g = IMEX2_GAMMA;
                let dl = imex2_delta();
                let (e1, raw1) = self.explicit(&y, t)?;
                let mut r2 = y.clone();
                r2.axpy(g * dt, &e1);
                let y2 = self.lin.solve(&ctx, &r2, g * dt);
                max_div = max_div.max(self.stage_divergence(&y2));
                let (e2, raw2) = self.explicit(&y2, t + g * dt)?;
                let ly2 = self.lin.apply(&ctx, &y2);
                let mut r3 = y.clone();
                r3.axpy(dl * dt, &e1);
                r3.axpy((1.0 - dl) * dt, &e2);
                r3.axpy((1.0 - g) * dt, &ly2);
                let y3 = self.lin.solve(&ctx, &r3, g * dt);
                max_div = max_div.max(self.stage_divergence(&y3));
                iters += raw1.iterations + raw2.iterations;
                let (j1, j2, j3) = (rho_rate(&y), rho_rate(&y2), rho_rate(&y3));
                // J_eff = δ(J1 - JL1) + (1-δ)(J2 - JL2) + (1-γ)JL2 + γ JL3
                for a in 0..d {
                    axpy(&mut flux[a], dl, &raw1.flux[a]);
                    axpy(&mut flux[a], -dl, &j1[a]);
                    axpy(&mut flux[a], 1.0 - dl, &raw2.flux[a]);
                    axpy(&mut flux[a], -(1.0 - dl), &j2[a]);
                    axpy(&mut flux[a], 1.0 - g, &j2[a]);
                    axpy(&mut flux[a], g, &j3[a]);
                }
                y3
            }
        };
        let mut next = next;
        ctx.leray(&mut next.w);
        let g = self.ws.config.grid;
        let new_state = next.to_state(&g, t + dt);
        let flux_field = VectorField::new(
            flux.into_iter().map(|c| ScalarField::from_coeffs(&g, c).expect("length")).collect(),
        )
        .expect("components");
        Ok(StepOutput { state: new_state, mass_flux: flux_field, max_stage_divergence: max_div, pressure_iterations: iters })
    }
}
