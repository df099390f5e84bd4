//! Binary gas mixture: the flow block is the κ-system with
//! `μ'(ρ) = c̃₀(ρ)/(2ρ)`, `κ = c₀/c̃₀`, and the mass fraction `Y₁` follows
//! `∂t(ρY₁) + div(ρY₁u) - div(c₀(ρ)∇Y₁) = 0` with mollified `ρ, u`.

use num_complex::Complex64;

use crate::constitutive::{check_important, ConditionReport, ConstitutiveError, LawKind, ViscosityLaw};
use crate::diagnostics::{continuous_extrema, refine_state};
use crate::fields::spectral::{context, Context};
use crate::fields::{div, gaussian_filter, gaussian_filter_vector, grad, vector_h1, vector_l2, Grid, ScalarField, VectorField};
use crate::solver::{FluidState, Model, SolverError, StepObserver, StepOutput};

type C = Complex64;

/// Power law `a ρ^β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerCoefficient {
    pub coefficient: f64,
    pub exponent: f64,
}

impl PowerCoefficient {
    pub fn eval(&self, s: f64) -> f64 {
        self.coefficient * s.powf(self.exponent)
    }
}

/// Parameters of the mixture model.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureConfig {
    /// Reference law `c̃₀`.
    pub c0_tilde: PowerCoefficient,
    /// `κ = c₀/c̃₀`.
    pub kappa: f64,
    pub m1: f64,
    pub m2: f64,
    pub p0: f64,
    pub gas_constant: f64,
    /// Width of the Gaussian applied to `ρ` and the mass flux before the
    /// species step; `None` means one grid cell.
    pub mollify_width: Option<f64>,
}

impl MixtureConfig {
    pub fn new(c0_tilde: PowerCoefficient, kappa: f64) -> Self {
        Self { c0_tilde, kappa, m1: 1.0, m2: 2.0, p0: 1.0, gas_constant: 1.0, mollify_width: None }
    }

    /// Builds the configuration from `c₀` and `c̃₀`, rejecting a non-constant
    /// ratio.
    pub fn from_laws(c0: PowerCoefficient, c0_tilde: PowerCoefficient) -> Result<Self, ConstitutiveError> {
        if c0.exponent != c0_tilde.exponent || !(c0_tilde.coefficient > 0.0) || !(c0.coefficient > 0.0) {
            return Err(ConstitutiveError::InvalidLaw(
                "c0 / c0_tilde must be a positive constant: use equal exponents".into(),
            ));
        }
        let kappa = c0.coefficient / c0_tilde.coefficient;
        if kappa > 1.0 {
            return Err(ConstitutiveError::InvalidLaw(format!("kappa = c0 / c0_tilde = {kappa} exceeds 1")));
        }
        Ok(Self::new(c0_tilde, kappa))
    }

    /// `c₀(ρ) = κ c̃₀(ρ)`.
    pub fn c0(&self, s: f64) -> f64 {
        self.kappa * self.c0_tilde.eval(s)
    }

    /// Induced viscosity `μ` with `μ' = c̃₀/(2ρ)`: `(a/2β)ρ^β`, or
    /// `(a/2) log ρ` when `β = 0`. Positivity is not enforced.
    pub fn viscosity_law(&self, r: f64, big_r: f64) -> ViscosityLaw {
        let a = self.c0_tilde.coefficient;
        let b = self.c0_tilde.exponent;
        let kind = if b == 0.0 {
            LawKind::Log { coefficient: 0.5 * a }
        } else {
            LawKind::Power { coefficient: 0.5 * a / b, alpha: b }
        };
        ViscosityLaw::unchecked(kind, 0.0, r, big_r)
    }

    pub fn model(&self, r: f64, big_r: f64) -> Result<Model, ConstitutiveError> {
        let law = self.viscosity_law(r, big_r);
        law.check_interval()?;
        Model::new(law)
    }

    pub fn width(&self, grid: &Grid) -> f64 {
        self.mollify_width.unwrap_or_else(|| grid.spacing())
    }
}

/// `1 - (1 - 1/d) log R >= 0`, the condition for `c₀ = κ` constant.
pub fn constant_c0_condition(d: usize, big_r: f64) -> bool {
    1.0 - (1.0 - 1.0 / d as f64) * big_r.ln() >= 0.0
}

/// Admissibility of the induced viscosity on `[r, R]`.
pub fn mixture_admissibility(cfg: &MixtureConfig, r: f64, big_r: f64, d: usize) -> Result<ConditionReport, ConstitutiveError> {
    check_important(&cfg.viscosity_law(r, big_r), d)
}

fn rel_l2(a: &VectorField, b: &VectorField) -> f64 {
    let n = vector_l2(a).max(vector_l2(b));
    let e = vector_l2(&a.axpy(-1.0, b).expect("same grid"));
    if n > 0.0 {
        e / n
    } else {
        e
    }
}

fn pointwise_vector(grid: &Grid, d: usize, f: impl Fn(usize, usize) -> f64) -> VectorField {
    let np = grid.num_points();
    VectorField::new(
        (0..d)
            .map(|a| {
                let vals: Vec<f64> = (0..np).map(|p| f(a, p)).collect();
                ScalarField::from_values(grid, &vals).expect("finite")
            })
            .collect(),
    )
    .expect("components")
}

/// Residual of `div u = div(c₀(ρ)∇ρ⁻¹)` with `u = w - 2κ∇φ(ρ)` relative to
/// the larger of both sides and `‖w‖_{H¹}`, evaluated on the state refined
/// `refine` times.
pub fn mixture_constraint_check(state: &FluidState, model: &Model, cfg: &MixtureConfig, refine: usize) -> f64 {
    let s = refine_state(state, refine.max(1));
    let grid = *s.grid();
    let d = grid.dim();
    let phi = s.rho.map_full(|r| model.potential.phi(r));
    let u = s.w.axpy(-2.0 * cfg.kappa, &grad(&phi)).expect("same grid");
    let lhs = div(&u);
    let rho = s.rho.values();
    let ginv = grad(&s.rho.map_full(|r| 1.0 / r)).values();
    let flux = pointwise_vector(&grid, d, |a, p| cfg.c0(rho[p]) * ginv[a][p]);
    let rhs = div(&flux);
    let e = crate::fields::l2(&lhs.axpy(-1.0, &rhs).expect("same grid"));
    let n = crate::fields::l2(&lhs).max(crate::fields::l2(&rhs)).max(vector_h1(&s.w));
    if n > 0.0 {
        e / n
    } else {
        e
    }
}

/// Relative residual of `c₀R/(P₀m̄)∇T + c₀RT/P₀ ∇(1/m̄) = c₀∇ρ⁻¹` with
/// `T = P₀m̄/(Rρ)` and `1/m̄ = Y₁/m₁ + (1-Y₁)/m₂`.
pub fn temperature_chain_residual(rho: &ScalarField, y1: &ScalarField, cfg: &MixtureConfig, refine: usize) -> f64 {
    let g = rho.grid();
    let fine = Grid::new(g.dim(), g.n() * refine.max(1).next_power_of_two(), g.length(), g.dealias_fraction()).expect("refined grid");
    let rho = rho.resample(&fine).expect("same period");
    let y1 = y1.resample(&fine).expect("same period");
    let d = fine.dim();
    let rv = rho.values();
    let yv = y1.values();
    let np = rv.len();
    let inv_m: Vec<f64> = yv.iter().map(|y| y / cfg.m1 + (1.0 - y) / cfg.m2).collect();
    let t: Vec<f64> = (0..np).map(|p| cfg.p0 / (inv_m[p] * cfg.gas_constant * rv[p])).collect();
    let gt = grad(&ScalarField::from_values(&fine, &t).expect("finite")).values();
    let gim = grad(&ScalarField::from_values(&fine, &inv_m).expect("finite")).values();
    let ginv = grad(&rho.map_full(|r| 1.0 / r)).values();
    let (rg, p0) = (cfg.gas_constant, cfg.p0);
    let lhs = pointwise_vector(&fine, d, |a, p| {
        let c0 = cfg.c0(rv[p]);
        c0 * rg * inv_m[p] / p0 * gt[a][p] + c0 * rg * t[p] / p0 * gim[a][p]
    });
    let rhs = pointwise_vector(&fine, d, |a, p| cfg.c0(rv[p]) * ginv[a][p]);
    rel_l2(&lhs, &rhs)
}

/// One semi-implicit step of the species equation in conservative form:
/// `ρ⁺Y⁺ - dt div(c₀(ρ⁺)∇Y⁺) = ρY - dt div(F Y)`, where `ρ⁺ = ρ - dt div F`
/// and `F` is the mollified mass flux. Returns `Y⁺` and the CG iteration count.
pub fn species_step(
    y1: &ScalarField,
    rho_old: &ScalarField,
    flux: &VectorField,
    c0: &dyn Fn(f64) -> f64,
    dt: f64,
) -> Result<(ScalarField, usize), SolverError> {
    let grid = *y1.grid();
    let ctx = context(&grid);
    let d = grid.dim();
    let rho_new = rho_old.axpy(-dt, &div(flux)).expect("same grid");
    let rn = rho_new.values();
    if rn.iter().any(|r| !(*r > 0.0)) {
        return Err(SolverError::PositivityFloor { t: f64::NAN, min: rn.iter().cloned().fold(f64::INFINITY, f64::min), floor: 0.0 });
    }
    let c0v: Vec<f64> = rn.iter().map(|&r| c0(r)).collect();
    let yv = y1.values();
    let ro = rho_old.values();
    let fv = flux.values();
    // right-hand side ρY - dt div(F Y)
    let ry: Vec<f64> = ro.iter().zip(&yv).map(|(r, y)| r * y).collect();
    let mut b = ctx.forward(&ry);
    let fy: Vec<Vec<C>> = (0..d)
        .map(|a| {
            let v: Vec<f64> = fv[a].iter().zip(&yv).map(|(f, y)| f * y).collect();
            ctx.forward(&v)
        })
        .collect();
    let dfy = ctx.div(&fy);
    for (bi, x) in b.iter_mut().zip(&dfy) {
        *bi -= dt * x;
    }
    ctx.dealias(&mut b);
    let op = |x: &[C]| -> Vec<C> {
        let xv = ctx.inverse(x);
        let m: Vec<f64> = rn.iter().zip(&xv).map(|(r, v)| r * v).collect();
        let mut out = ctx.forward(&m);
        let g: Vec<Vec<C>> = (0..d)
            .map(|a| {
                let gv = ctx.inverse(&ctx.deriv(x, a));
                let v: Vec<f64> = gv.iter().zip(&c0v).map(|(g, c)| g * c).collect();
                ctx.forward(&v)
            })
            .collect();
        let dg = ctx.div(&g);
        for (o, v) in out.iter_mut().zip(&dg) {
            *o -= dt * v;
        }
        ctx.dealias(&mut out);
        out
    };
    let rbar = rn.iter().sum::<f64>() / rn.len() as f64;
    let cbar = c0v.iter().sum::<f64>() / c0v.len() as f64;
    let pre: Vec<f64> = ctx.k2.iter().map(|&k2| 1.0 / (rbar + dt * cbar * k2)).collect();
    let mut x = y1.coeffs().to_vec();
    ctx.dealias(&mut x);
    let iters = pcg(&ctx, &op, &b, &mut x, &pre, 1e-14, 1000)?;
    Ok((ScalarField::from_coeffs(&grid, x).expect("length"), iters))
}

fn dot(ctx: &Context, a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).zip(&ctx.weight).map(|((x, y), &w)| w * (x.re * y.re + x.im * y.im)).sum()
}

fn pcg(
    ctx: &Context,
    op: &dyn Fn(&[C]) -> Vec<C>,
    b: &[C],
    x: &mut [C],
    pre: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<usize, SolverError> {
    let ax = op(x);
    let mut r: Vec<C> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let bn = dot(ctx, b, b).sqrt().max(f64::MIN_POSITIVE);
    let apply = |r: &[C]| -> Vec<C> { r.iter().zip(pre).map(|(v, p)| v * p).collect() };
    let mut z = apply(&r);
    let mut p = z.clone();
    let mut rz = dot(ctx, &r, &z);
    let mut it = 0;
    while dot(ctx, &r, &r).sqrt() > tol * bn {
        if it >= max_iter {
            return Err(SolverError::Pressure { residual: dot(ctx, &r, &r).sqrt() / bn, iterations: it });
        }
        it += 1;
        let ap = op(&p);
        let pap = dot(ctx, &p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = apply(&r);
        let rz_new = dot(ctx, &r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Ok(it)
}

/// Species transport driven by the flow steps; adds `Y1_min`, `Y1_max` and
/// `int_rhoY1` to the diagnostics.
pub struct SpeciesTracker {
    pub cfg: MixtureConfig,
    pub y1: ScalarField,
    /// Mollified density `G ρ`.
    pub rho_m: ScalarField,
    pub dt: f64,
    pub tolerance: f64,
    pub initial_mass: f64,
    pub max_mass_drift: f64,
    pub y_range: (f64, f64),
    pub iterations: usize,
}

impl SpeciesTracker {
    pub fn new(cfg: MixtureConfig, rho0: &ScalarField, y1: ScalarField, dt: f64) -> Self {
        let width = cfg.width(rho0.grid());
        let rho_m = gaussian_filter(rho0, width);
        let initial_mass = int_rho_y(&rho_m, &y1);
        let e = continuous_extrema(&y1);
        Self {
            cfg,
            y1,
            rho_m,
            dt,
            tolerance: 1e-8,
            initial_mass,
            max_mass_drift: 0.0,
            y_range: (e.min, e.max),
            iterations: 0,
        }
    }

    /// `Y₂ = 1 - Y₁`.
    pub fn y2(&self) -> ScalarField {
        &ScalarField::constant(self.y1.grid(), 1.0) - &self.y1
    }

    fn columns(&mut self) -> Vec<(String, f64)> {
        let cols = species_columns(&self.rho_m, &self.y1);
        self.y_range = (self.y_range.0.min(cols[0].1), self.y_range.1.max(cols[1].1));
        let m = cols[2].1;
        self.max_mass_drift = self.max_mass_drift.max((m - self.initial_mass).abs() / self.initial_mass.abs());
        cols
    }
}

/// `Y1_min`, `Y1_max` and `int_rhoY1` of a mollified density and mass
/// fraction.
pub fn species_columns(rho_m: &ScalarField, y1: &ScalarField) -> Vec<(String, f64)> {
    let e = continuous_extrema(y1);
    vec![("Y1_min".into(), e.min), ("Y1_max".into(), e.max), ("int_rhoY1".into(), int_rho_y(rho_m, y1))]
}

/// `∫ρY` by grid quadrature.
pub fn int_rho_y(rho: &ScalarField, y: &ScalarField) -> f64 {
    let r = rho.values();
    let v = y.values();
    r.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() * rho.grid().cell_volume()
}

impl StepObserver for SpeciesTracker {
    fn observe(&mut self, _state: &FluidState, step: Option<&StepOutput>) -> Result<Vec<(String, f64)>, SolverError> {
        if let Some(out) = step {
            let width = self.cfg.width(self.y1.grid());
            let flux = gaussian_filter_vector(&out.mass_flux, width);
            let cfg = self.cfg.clone();
            let c0 = move |s: f64| cfg.c0(s);
            let (y, it) = species_step(&self.y1, &self.rho_m, &flux, &c0, self.dt)?;
            self.rho_m = self.rho_m.axpy(-self.dt, &div(&flux)).expect("same grid");
            self.y1 = y;
            self.iterations += it;
        }
        Ok(self.columns())
    }

    fn snapshot_fields(&self) -> Vec<(String, ScalarField)> {
        vec![("Y1".into(), self.y1.clone()), ("rho_m".into(), self.rho_m.clone())]
    }

    fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (lo, hi) = self.y_range;
        if lo < -self.tolerance || hi > 1.0 + self.tolerance {
            out.push(format!("mass fraction left [0, 1]: range [{lo:.3e}, {hi:.3e}]"));
        }
        if self.max_mass_drift > 1e-10 {
            out.push(format!("species mass drift {:.3e}", self.max_mass_drift));
        }
        out
    }
}
