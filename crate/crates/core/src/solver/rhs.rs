//! Pseudo-spectral assembly of the time derivatives and the
//! variable-density pressure projection.

use std::sync::Arc;

use num_complex::Complex64;

use super::{FluidState, Mode, Model, SolverConfig, SolverError};
use crate::fields::spectral::{context, Context};
use crate::fields::{Grid, ScalarField, VectorField};

type C = Complex64;

/// Spectral coefficients of the evolved unknowns.
#[derive(Clone, Debug)]
pub(crate) struct Vars {
    pub rho: Vec<C>,
    pub w: Vec<Vec<C>>,
    pub v: Option<Vec<Vec<C>>>,
}

impl Vars {
    pub fn from_state(s: &FluidState) -> Self {
        Self {
            rho: s.rho.coeffs().to_vec(),
            w: s.w.comps().iter().map(|c| c.coeffs().to_vec()).collect(),
            v: s.v.as_ref().map(|v| v.comps().iter().map(|c| c.coeffs().to_vec()).collect()),
        }
    }

    pub fn to_state(&self, grid: &Grid, t: f64) -> FluidState {
        let sf = |c: &Vec<C>| ScalarField::from_coeffs(grid, c.clone()).expect("length");
        let vf = |c: &Vec<Vec<C>>| VectorField::new(c.iter().map(sf).collect()).expect("components");
        let mut w = vf(&self.w);
        w.solenoidal = true;
        FluidState { rho: sf(&self.rho), w, v: self.v.as_ref().map(vf), t }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Vars) {
        axpy(&mut self.rho, a, &other.rho);
        for (x, y) in self.w.iter_mut().zip(&other.w) {
            axpy(x, a, y);
        }
        if let (Some(x), Some(y)) = (self.v.as_mut(), other.v.as_ref()) {
            for (x, y) in x.iter_mut().zip(y) {
                axpy(x, a, y);
            }
        }
    }
}

pub(crate) fn axpy(x: &mut [C], a: f64, y: &[C]) {
    for (p, q) in x.iter_mut().zip(y) {
        *p += a * q;
    }
}

/// Time derivatives returned by [`Workspace::tendency`].
#[derive(Clone, Debug)]
pub struct Tendency {
    pub rho: ScalarField,
    /// Solenoidal `∂t w`.
    pub w: VectorField,
    pub v: Option<VectorField>,
    /// Mass flux `ρ[w]_δ - 2κ∇μ(ρ)`, so that `∂tρ = -div(flux)` without forcing.
    pub mass_flux: VectorField,
    /// `π₁`, mean zero.
    pub pressure: ScalarField,
    /// Momentum tendency before the pressure gradient, `∂t(ρw) + ∇π₁`.
    pub momentum: VectorField,
    pub pressure_iterations: usize,
}

pub(crate) struct Raw {
    pub vars: Vars,
    pub flux: Vec<Vec<C>>,
    pub pressure: Vec<C>,
    pub momentum: Vec<Vec<C>>,
    pub iterations: usize,
}

/// External sources added to the continuity and momentum equations, used
/// for manufactured solutions.
pub trait Forcing: Send + Sync {
    /// `(S_ρ, S_m)` at time `t`, sampled on `grid`.
    fn sources(&self, grid: &Grid, t: f64) -> (ScalarField, VectorField);
}

/// Reusable assembly state: transform context and the pressure warm start.
pub struct Workspace {
    pub(crate) ctx: Arc<Context>,
    pub(crate) config: SolverConfig,
    pub(crate) model: Arc<Model>,
    pressure_guess: Vec<C>,
    pub(crate) forcing: Option<Arc<dyn Forcing>>,
}

impl Workspace {
    pub fn new(config: &SolverConfig, model: Arc<Model>) -> Self {
        let ctx = context(&config.grid);
        Self {
            pressure_guess: vec![C::new(0.0, 0.0); config.grid.spectral_len()],
            ctx,
            config: config.clone(),
            model,
            forcing: None,
        }
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    /// Full time derivative of `state`, including the pressure projection.
    pub fn tendency(&mut self, state: &FluidState) -> Result<Tendency, SolverError> {
        let raw = self.assemble(&Vars::from_state(state), state.t)?;
        let g = self.config.grid;
        let sf = |c: Vec<C>| ScalarField::from_coeffs(&g, c).expect("length");
        let vf = |c: Vec<Vec<C>>| VectorField::new(c.into_iter().map(sf).collect()).expect("components");
        let mut w = vf(raw.vars.w);
        w.solenoidal = true;
        Ok(Tendency {
            rho: sf(raw.vars.rho),
            w,
            v: raw.vars.v.map(vf),
            mass_flux: vf(raw.flux),
            pressure: sf(raw.pressure),
            momentum: vf(raw.momentum),
            pressure_iterations: raw.iterations,
        })
    }

    pub(crate) fn assemble(&mut self, vars: &Vars, t: f64) -> Result<Raw, SolverError> {
        let cfg = &self.config;
        let ctx = self.ctx.clone();
        let model = self.model.clone();
        let d = cfg.grid.dim();
        let kappa = cfg.kappa;
        let mode = cfg.mode;

        let rho_p = ctx.inverse(&vars.rho);
        let floor = 0.1 * model.law.r;
        let mut min_rho = f64::INFINITY;
        for &r in &rho_p {
            if !r.is_finite() {
                return Err(SolverError::NonFinite { t });
            }
            min_rho = min_rho.min(r);
        }
        if min_rho <= floor {
            return Err(SolverError::PositivityFloor { t, min: min_rho, floor });
        }
        let np = rho_p.len();
        let inv_rho: Vec<f64> = rho_p.iter().map(|r| 1.0 / r).collect();
        let w_p: Vec<Vec<f64>> = vars.w.iter().map(|c| ctx.inverse(c)).collect();
        let wadv_p: Vec<Vec<f64>> = if cfg.mollify_width > 0.0 {
            vars.w
                .iter()
                .map(|c| {
                    let mut c = c.clone();
                    ctx.gaussian(&mut c, cfg.mollify_width);
                    ctx.inverse(&c)
                })
                .collect()
        } else {
            w_p.clone()
        };

        // dedicated endpoint assemblies use their own coefficients
        let (k_diff, c_sym, c_rot, c_coup) = match mode {
            Mode::IncompressibleNs => (0.0, 1.0, 0.0, 0.0),
            Mode::KsLimit => (1.0, 0.0, 1.0, 0.0),
            _ => (kappa, 1.0 - kappa, kappa, kappa * (1.0 - kappa)),
        };

        let mut mu_p = vec![0.0; np];
        let mut mup_p = vec![0.0; np];
        for p in 0..np {
            let (m, dm) = model.law.eval(rho_p[p]);
            mu_p[p] = m;
            mup_p[p] = dm;
        }
        let mut mu_hat = ctx.forward(&mu_p);
        ctx.dealias(&mut mu_hat);
        let gmu_hat: Vec<Vec<C>> = (0..d).map(|a| ctx.deriv(&mu_hat, a)).collect();
        let gmu_p: Vec<Vec<f64>> = if k_diff != 0.0 {
            gmu_hat.iter().map(|c| ctx.inverse(c)).collect()
        } else {
            vec![vec![0.0; np]; d]
        };

        // auxiliary field
        let need_v = mode == Mode::Augmented || (mode == Mode::Reduced && c_coup != 0.0);
        let v_hat: Option<Vec<Vec<C>>> = if !need_v {
            None
        } else if mode == Mode::Augmented {
            Some(vars.v.clone().ok_or_else(|| SolverError::Config("augmented mode needs v".into()))?)
        } else {
            let phi_p: Vec<f64> = rho_p.iter().map(|&r| model.potential.phi(r)).collect();
            let mut phi_hat = ctx.forward(&phi_p);
            ctx.dealias(&mut phi_hat);
            Some((0..d).map(|a| ctx.deriv(&phi_hat, a).into_iter().map(|c| 2.0 * c).collect()).collect())
        };

        // continuity
        let mut flux_hat: Vec<Vec<C>> = (0..d)
            .map(|a| {
                let prod: Vec<f64> = rho_p.iter().zip(&wadv_p[a]).map(|(r, w)| r * w).collect();
                let mut c = ctx.forward(&prod);
                ctx.dealias(&mut c);
                c
            })
            .collect();
        let mut rho_t = ctx.div(&flux_hat);
        let lap_mu = ctx.laplacian(&mu_hat);
        for (r, l) in rho_t.iter_mut().zip(&lap_mu) {
            *r = -*r + 2.0 * k_diff * l;
        }
        for (f, g) in flux_hat.iter_mut().zip(&gmu_hat) {
            axpy(f, -2.0 * k_diff, g);
        }
        let flux_p: Vec<Vec<f64>> = (0..d)
            .map(|a| (0..np).map(|p| rho_p[p] * wadv_p[a][p] - 2.0 * k_diff * gmu_p[a][p]).collect())
            .collect();

        let sources = self.forcing.as_ref().map(|f| f.sources(&cfg.grid, t));
        if let Some((sr, _)) = &sources {
            let mut c = sr.coeffs().to_vec();
            ctx.dealias(&mut c);
            axpy(&mut rho_t, 1.0, &c);
        }

        // velocity gradient G_ij = ∂_j w_i
        let gw: Vec<Vec<f64>> = (0..d * d).map(|k| ctx.inverse(&ctx.deriv(&vars.w[k / d], k % d))).collect();
        let gv: Option<Vec<Vec<f64>>> = v_hat
            .as_ref()
            .map(|v| (0..d * d).map(|k| ctx.inverse(&ctx.deriv(&v[k / d], k % d))).collect());

        // capillary Hessian of log ρ
        let cap = cfg.capillarity;
        let hess: Option<Vec<Vec<f64>>> = (cap != 0.0).then(|| {
            let lr: Vec<f64> = rho_p.iter().map(|r| r.ln()).collect();
            let mut lh = ctx.forward(&lr);
            ctx.dealias(&mut lh);
            let first: Vec<Vec<C>> = (0..d).map(|a| ctx.deriv(&lh, a)).collect();
            (0..d * d).map(|k| ctx.inverse(&ctx.deriv(&first[k / d], k % d))).collect()
        });

        let eps = cfg.epsilon;
        let mut mom: Vec<Vec<C>> = vec![vec![C::new(0.0, 0.0); ctx.k2.len()]; d];
        let mut tensor = vec![0.0; np];
        for i in 0..d {
            for j in 0..d {
                for p in 0..np {
                    let gij = gw[i * d + j][p];
                    let gji = gw[j * d + i][p];
                    let mu = mu_p[p];
                    let mut s = -flux_p[j][p] * w_p[i][p]
                        + c_sym * mu * (gij + gji)
                        + c_rot * mu * (gij - gji);
                    if let Some(gv) = &gv {
                        if c_coup != 0.0 {
                            s -= 2.0 * c_coup * mu * gv[i * d + j][p];
                        }
                    }
                    if eps != 0.0 {
                        let g2: f64 = (0..d * d).map(|k| gw[k][p] * gw[k][p]).sum();
                        s += eps * (1.0 + g2) * gij;
                    }
                    if let Some(h) = &hess {
                        s += cap * rho_p[p] * h[i * d + j][p];
                    }
                    tensor[p] = s;
                }
                let mut th = ctx.forward(&tensor);
                ctx.dealias(&mut th);
                let kj = &ctx.k[j];
                for ((m, t), &k) in mom[i].iter_mut().zip(&th).zip(kj) {
                    *m += C::new(-k * t.im, k * t.re);
                }
            }
            if eps != 0.0 {
                for ((m, w), &k2) in mom[i].iter_mut().zip(&vars.w[i]).zip(&ctx.k2) {
                    *m -= eps * k2 * k2 * w;
                }
            }
            if let Some((_, sm)) = &sources {
                let mut c = sm.comp(i).coeffs().to_vec();
                ctx.dealias(&mut c);
                axpy(&mut mom[i], 1.0, &c);
            }
        }

        // acceleration (m - w ∂tρ) / ρ, then the weighted projection
        let rt_p = ctx.inverse(&rho_t);
        let mut acc: Vec<Vec<C>> = (0..d)
            .map(|i| {
                let m_p = ctx.inverse(&mom[i]);
                let a: Vec<f64> = (0..np).map(|p| (m_p[p] - w_p[i][p] * rt_p[p]) * inv_rho[p]).collect();
                let mut c = ctx.forward(&a);
                ctx.dealias(&mut c);
                c
            })
            .collect();
        let rho_h = 1.0 / (inv_rho.iter().sum::<f64>() / np as f64);
        let iterations =
            weighted_projection(&ctx, &inv_rho, rho_h, &mut acc, &mut self.pressure_guess, cfg.pressure_tol)?;

        // auxiliary field equation
        let v_t = if mode == Mode::Augmented {
            let v_hat = v_hat.as_ref().unwrap();
            let gv = gv.as_ref().unwrap();
            let v_p: Vec<Vec<f64>> = v_hat.iter().map(|c| ctx.inverse(c)).collect();
            let divv: Vec<f64> = (0..np).map(|p| (0..d).map(|a| gv[a * d + a][p]).sum()).collect();
            let mut out = Vec::with_capacity(d);
            for i in 0..d {
                let mut q = vec![C::new(0.0, 0.0); ctx.k2.len()];
                for j in 0..d {
                    for p in 0..np {
                        let mu = mu_p[p];
                        let mut s = -flux_p[j][p] * v_p[i][p] + 2.0 * kappa * mu * gv[i * d + j][p]
                            - 2.0 * mu * gw[j * d + i][p];
                        if i == j {
                            s += 2.0 * kappa * (mup_p[p] * rho_p[p] - mu) * divv[p];
                        }
                        tensor[p] = s;
                    }
                    let mut th = ctx.forward(&tensor);
                    ctx.dealias(&mut th);
                    for ((m, t), &k) in q.iter_mut().zip(&th).zip(&ctx.k[j]) {
                        *m += C::new(-k * t.im, k * t.re);
                    }
                }
                let q_p = ctx.inverse(&q);
                let a: Vec<f64> = (0..np).map(|p| (q_p[p] - v_p[i][p] * rt_p[p]) * inv_rho[p]).collect();
                let mut c = ctx.forward(&a);
                ctx.dealias(&mut c);
                out.push(c);
            }
            Some(out)
        } else {
            None
        };

        Ok(Raw {
            vars: Vars { rho: rho_t, w: acc, v: v_t },
            flux: flux_hat,
            pressure: self.pressure_guess.clone(),
            momentum: mom,
            iterations,
        })
    }
}

fn dot(ctx: &Context, a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .zip(&ctx.weight)
        .map(|((x, y), &w)| w * (x.re * y.re + x.im * y.im))
        .sum()
}

/// `-div(Π(ρ⁻¹∇x))`.
fn apply_operator(ctx: &Context, inv_rho: &[f64], x: &[C]) -> Vec<C> {
    let d = ctx.grid.dim();
    let mut out = vec![C::new(0.0, 0.0); x.len()];
    for j in 0..d {
        let g: Vec<f64> = ctx.inverse(&ctx.deriv(x, j)).iter().zip(inv_rho).map(|(a, b)| a * b).collect();
        let mut c = ctx.forward(&g);
        ctx.dealias(&mut c);
        for ((o, v), &k) in out.iter_mut().zip(&c).zip(&ctx.k[j]) {
            *o -= C::new(-k * v.im, k * v.re);
        }
    }
    out
}

/// Replaces `acc` by `acc - Π(ρ⁻¹∇π)` with `π` chosen so that the result is
/// divergence free; `pressure` holds the warm start and receives `π`.
/// Returns the number of preconditioned CG iterations.
pub(crate) fn weighted_projection(
    ctx: &Context,
    inv_rho: &[f64],
    rho_h: f64,
    acc: &mut [Vec<C>],
    pressure: &mut Vec<C>,
    tol: f64,
) -> Result<usize, SolverError> {
    let n = ctx.k2.len();
    let mut b = ctx.div(acc);
    for (i, v) in b.iter_mut().enumerate() {
        if !ctx.keep[i] || ctx.k2[i] == 0.0 {
            *v = C::new(0.0, 0.0);
        } else {
            *v = -*v;
        }
    }
    let scale: f64 = acc
        .iter()
        .map(|c| c.iter().zip(&ctx.k2).zip(&ctx.weight).map(|((v, &k2), &w)| w * k2 * v.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    let bnorm = dot(ctx, &b, &b).sqrt();
    let target = tol * bnorm.max(1e-3 * scale).max(f64::MIN_POSITIVE);
    let precond = |r: &[C]| -> Vec<C> {
        r.iter()
            .enumerate()
            .map(|(i, v)| if ctx.k2[i] > 0.0 && ctx.keep[i] { v * (rho_h / ctx.k2[i]) } else { C::new(0.0, 0.0) })
            .collect()
    };
    let mut x = pressure.clone();
    x[0] = C::new(0.0, 0.0);
    let ax = apply_operator(ctx, inv_rho, &x);
    let mut r: Vec<C> = (0..n).map(|i| if ctx.keep[i] { b[i] - ax[i] } else { C::new(0.0, 0.0) }).collect();
    let mut iterations = 0;
    let mut rnorm = dot(ctx, &r, &r).sqrt();
    if rnorm > target {
        let mut z = precond(&r);
        let mut p = z.clone();
        let mut rz = dot(ctx, &r, &z);
        loop {
            iterations += 1;
            let ap = apply_operator(ctx, inv_rho, &p);
            let pap = dot(ctx, &p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            axpy(&mut x, alpha, &p);
            axpy(&mut r, -alpha, &ap);
            rnorm = dot(ctx, &r, &r).sqrt();
            if rnorm <= target {
                break;
            }
            if iterations >= 500 || !rnorm.is_finite() {
                return Err(SolverError::Pressure { residual: rnorm / bnorm.max(f64::MIN_POSITIVE), iterations });
            }
            z = precond(&r);
            let rz_new = dot(ctx, &r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
    }
    let d = ctx.grid.dim();
    for j in 0..d {
        let g: Vec<f64> = ctx.inverse(&ctx.deriv(&x, j)).iter().zip(inv_rho).map(|(a, b)| a * b).collect();
        let mut c = ctx.forward(&g);
        ctx.dealias(&mut c);
        axpy(&mut acc[j], -1.0, &c);
    }
    ctx.leray(acc);
    *pressure = x;
    Ok(iterations)
}
