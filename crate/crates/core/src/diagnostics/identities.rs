use crate::fields::{div, grad, grad_tensor, gn_ratio, Grid, ScalarField, VectorField};
use crate::solver::{FluidState, Model};

/// Relative residuals of the pointwise identities for one state.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    /// `∫m|D(u)|² = ∫m|D(u) - (div u/d)I|² + ∫(m/d)(div u)²` with `m = μ(ρ)`.
    pub split: f64,
    /// `|w|² + κ(1-κ)|2∇φ|² = (1-κ)|u|² + κ|u+2∇φ|²`, weighted by `ρ`.
    pub two_velocity: f64,
    /// `μ'(ρ)∂tρ = -div(μu) - (μ'ρ - μ)div u`.
    pub renormalized: f64,
    /// `D(u) - (div u/d)I = D(w - 2κ∇φ) + (2κ/d)Δφ I`.
    pub deviatoric_forms: f64,
    /// `div u = -2κΔφ(ρ)`.
    pub constraint: f64,
    /// Interpolation ratio of `ρ`, reported only.
    pub gn_ratio: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        [self.split, self.two_velocity, self.renormalized, self.deviatoric_forms, self.constraint]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = a.iter().map(|x| x * x).sum::<f64>().max(b.iter().map(|x| x * x).sum());
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Both sides of the split identity, `(∫m|D|², ∫m|D_dev|² + ∫(m/d)(div u)²)`.
pub fn split_identity(u: &VectorField, m: &ScalarField) -> (f64, f64) {
    let d = u.dim();
    let df = d as f64;
    let g = grad_tensor(u).values();
    let mv = m.values();
    let (mut lhs, mut dev, mut tr) = (0.0, 0.0, 0.0);
    for p in 0..mv.len() {
        let divu: f64 = (0..d).map(|a| g[a * d + a][p]).sum();
        for i in 0..d {
            for j in 0..d {
                let dij = 0.5 * (g[i * d + j][p] + g[j * d + i][p]);
                let id = if i == j { 1.0 } else { 0.0 };
                lhs += mv[p] * dij * dij;
                dev += mv[p] * (dij - id * divu / df).powi(2);
            }
        }
        tr += mv[p] / df * divu * divu;
    }
    let cv = u.grid().cell_volume();
    (lhs * cv, (dev + tr) * cv)
}

/// Spectral interpolation of a state onto a grid refined `factor` times,
/// rounded up to a power of two.
pub fn refine_state(state: &FluidState, factor: usize) -> FluidState {
    let g = state.grid();
    let fine = Grid::new(g.dim(), g.n() * factor.max(1).next_power_of_two(), g.length(), g.dealias_fraction()).expect("refined grid");
    let rv = |v: &VectorField| {
        VectorField::new(v.comps().iter().map(|c| c.resample(&fine).expect("same period")).collect())
            .expect("components")
    };
    FluidState {
        rho: state.rho.resample(&fine).expect("same period"),
        w: rv(&state.w),
        v: state.v.as_ref().map(rv),
        t: state.t,
    }
}

/// Evaluates every identity on the state refined by `refine` so that the
/// non-polynomial compositions are resolved beyond the retained band.
pub fn identity_suite(state: &FluidState, model: &Model, kappa: f64, refine: usize) -> IdentityReport {
    let s = refine_state(state, refine.max(1));
    let grid = *s.grid();
    let d = grid.dim();
    let df = d as f64;
    let np = grid.num_points();
    let rho = s.rho.values();
    let phi = s.rho.map_full(|r| model.potential.phi(r));
    let gphi = grad(&phi);
    let tgp = gphi.scale(2.0);
    let u = s.w.axpy(-kappa, &tgp).expect("same grid");
    let mu = s.rho.map_full(|r| model.law.mu(r));

    let (a, b) = split_identity(&u, &mu);
    let split = rel(a, b);

    let wv = s.w.values();
    let tv = tgp.values();
    let uv = u.values();
    let mut e1 = vec![0.0; np];
    let mut e2 = vec![0.0; np];
    for p in 0..np {
        let mut w2 = 0.0;
        let mut t2 = 0.0;
        let mut u2 = 0.0;
        let mut ut2 = 0.0;
        for c in 0..d {
            w2 += wv[c][p] * wv[c][p];
            t2 += tv[c][p] * tv[c][p];
            u2 += uv[c][p] * uv[c][p];
            ut2 += (uv[c][p] + tv[c][p]).powi(2);
        }
        e1[p] = rho[p] * (w2 + kappa * (1.0 - kappa) * t2);
        e2[p] = rho[p] * ((1.0 - kappa) * u2 + kappa * ut2);
    }
    let two_velocity = rel_l2(&e1, &e2);

    // continuity rate from the w-form, raw products on the refined grid
    let rw = VectorField::new(
        (0..d)
            .map(|c| {
                let vals: Vec<f64> = (0..np).map(|p| rho[p] * wv[c][p]).collect();
                ScalarField::from_values(&grid, &vals).expect("finite")
            })
            .collect(),
    )
    .expect("components");
    let lap_mu = crate::fields::laplacian(&mu);
    let rho_t = (&(-&div(&rw))) + &lap_mu.scale(2.0 * kappa);
    let rho_t = rho_t.values();
    let muv = mu.values();
    let mup: Vec<f64> = rho.iter().map(|&r| model.law.mu_prime(r)).collect();
    let lhs: Vec<f64> = (0..np).map(|p| mup[p] * rho_t[p]).collect();
    let mu_u = VectorField::new(
        (0..d)
            .map(|c| {
                let vals: Vec<f64> = (0..np).map(|p| muv[p] * uv[c][p]).collect();
                ScalarField::from_values(&grid, &vals).expect("finite")
            })
            .collect(),
    )
    .expect("components");
    let div_mu_u = div(&mu_u).values();
    let divu = div(&u).values();
    let rhs: Vec<f64> = (0..np).map(|p| -div_mu_u[p] - (mup[p] * rho[p] - muv[p]) * divu[p]).collect();
    let renormalized = rel_l2(&lhs, &rhs);

    let gu = grad_tensor(&u).values();
    let gw = grad_tensor(&s.w).values();
    let hess = grad_tensor(&gphi).values();
    let lap_phi = crate::fields::laplacian(&phi).values();
    let mut f1 = Vec::with_capacity(np * d * d);
    let mut f2 = Vec::with_capacity(np * d * d);
    for p in 0..np {
        for i in 0..d {
            for j in 0..d {
                let id = if i == j { 1.0 } else { 0.0 };
                f1.push(0.5 * (gu[i * d + j][p] + gu[j * d + i][p]) - id * divu[p] / df);
                let dw = 0.5 * (gw[i * d + j][p] + gw[j * d + i][p]);
                f2.push(dw - 2.0 * kappa * hess[i * d + j][p] + id * 2.0 * kappa / df * lap_phi[p]);
            }
        }
    }
    let deviatoric_forms = rel_l2(&f1, &f2);

    let target: Vec<f64> = lap_phi.iter().map(|l| -2.0 * kappa * l).collect();
    let scale: f64 = uv.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let err: f64 = divu.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let constraint = if scale > 0.0 { err / scale } else { err };

    IdentityReport { split, two_velocity, renormalized, deviatoric_forms, constraint, gn_ratio: gn_ratio(&state.rho) }
}
