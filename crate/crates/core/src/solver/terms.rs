//! Term-by-term assembly through the field API, used to cross-check the
//! fused hot path and the dedicated κ = 0 / κ = 1 equations.

use super::{FluidState, Model};
use crate::fields::{
    gaussian_filter_vector, grad, grad_tensor, laplacian, tensor_div, vector_laplacian, ScalarField, Symmetry,
    TensorField, VectorField,
};

/// Contributions to `∂tρ`.
#[derive(Clone, Debug)]
pub struct ContinuityTerms {
    /// `-div(ρ[w]_δ)`
    pub transport: ScalarField,
    /// `2κΔμ(ρ)`
    pub diffusion: ScalarField,
}

/// Contributions to `∂t(ρw) + ∇π₁`.
#[derive(Clone, Debug)]
pub struct MomentumTerms {
    /// `-Div(J⊗w)`
    pub advection: VectorField,
    /// `2(1-κ)Div(μD(w))`
    pub viscous_sym: VectorField,
    /// `2κDiv(μA(w))`
    pub viscous_rot: VectorField,
    /// `-2κ(1-κ)Div(μ∇v)`
    pub coupling: VectorField,
    /// `-ε(Δ²w - Div((1+|∇w|²)∇w))`
    pub regularization: VectorField,
    /// `c Div(ρ∇∇log ρ)`
    pub capillary: VectorField,
}

impl MomentumTerms {
    pub fn total(&self) -> VectorField {
        [&self.viscous_sym, &self.viscous_rot, &self.coupling, &self.regularization, &self.capillary]
            .iter()
            .fold(self.advection.clone(), |acc, t| acc.axpy(1.0, t).expect("same grid"))
    }

    pub fn list(&self) -> [(&'static str, &VectorField); 6] {
        [
            ("advection", &self.advection),
            ("viscous_sym", &self.viscous_sym),
            ("viscous_rot", &self.viscous_rot),
            ("coupling", &self.coupling),
            ("regularization", &self.regularization),
            ("capillary", &self.capillary),
        ]
    }
}

/// Parameters of the general assembly.
#[derive(Clone, Copy, Debug)]
pub struct TermParams {
    pub kappa: f64,
    pub epsilon: f64,
    pub mollify_width: f64,
    pub capillarity: f64,
}

impl TermParams {
    pub fn plain(kappa: f64) -> Self {
        Self { kappa, epsilon: 0.0, mollify_width: 0.0, capillarity: 0.0 }
    }
}

/// Pointwise product `a_p * b_p` of raw samples, dealiased.
fn mul(a: &ScalarField, b: &ScalarField) -> ScalarField {
    a.product(b).expect("same grid")
}

/// Tensor with entries `f(i, j)`.
fn tensor(d: usize, f: impl Fn(usize, usize) -> ScalarField) -> TensorField {
    let comps = (0..d * d).map(|k| f(k / d, k % d)).collect();
    TensorField::new(comps, Symmetry::General).expect("components")
}

/// `Div(J⊗b)` with `(J⊗b)_ij = J_j b_i`.
fn div_outer(j: &VectorField, b: &VectorField) -> VectorField {
    let d = j.dim();
    tensor_div(&tensor(d, |i, k| mul(j.comp(k), b.comp(i))))
}

/// `Div(m T)`.
fn div_weighted(m: &ScalarField, t: &TensorField) -> VectorField {
    tensor_div(&tensor(t.dim(), |i, j| mul(m, t.get(i, j))))
}

fn zero_like(v: &VectorField) -> VectorField {
    VectorField::zeros(v.grid())
}

/// Mass flux `ρ[w]_δ - 2κ∇μ(ρ)` with dealiased products.
pub fn mass_flux(state: &FluidState, model: &Model, kappa: f64, mollify_width: f64) -> VectorField {
    let wadv = gaussian_filter_vector(&state.w, mollify_width);
    let d = state.w.dim();
    let conv = VectorField::new((0..d).map(|a| mul(&state.rho, wadv.comp(a))).collect()).expect("components");
    conv.axpy(-2.0 * kappa, &grad(&model.mu_field(&state.rho))).expect("same grid")
}

/// General κ-system, term by term. `v` is the state's auxiliary field if
/// present, otherwise `2∇φ(ρ)`.
pub fn kappa_terms(state: &FluidState, model: &Model, p: TermParams) -> (ContinuityTerms, MomentumTerms) {
    let kappa = p.kappa;
    let rho = &state.rho;
    let w = &state.w;
    let d = w.dim();
    let mu_raw = rho.map_full(|s| model.law.mu(s));
    let mu = mu_raw.dealiased();
    let wadv = gaussian_filter_vector(w, p.mollify_width);
    let conv = VectorField::new((0..d).map(|a| mul(rho, wadv.comp(a))).collect()).expect("components");
    let transport = -&crate::fields::div(&conv);
    let diffusion = laplacian(&mu).scale(2.0 * kappa);
    // the momentum flux uses raw products, as the fused assembly does
    let flux_raw = {
        let gmu = grad(&mu);
        let rv = rho.values();
        let comps = (0..d)
            .map(|a| {
                let wa = wadv.comp(a).values();
                let ga = gmu.comp(a).values();
                let vals: Vec<f64> = (0..rv.len()).map(|q| rv[q] * wa[q] - 2.0 * kappa * ga[q]).collect();
                ScalarField::from_values(rho.grid(), &vals).expect("finite")
            })
            .collect();
        VectorField::new(comps).expect("components")
    };
    let advection = div_outer(&flux_raw, w).scale(-1.0);
    let g = grad_tensor(w);
    let sym = tensor(d, |i, j| g.get(i, j).axpy(1.0, g.get(j, i)).expect("grid").scale(0.5));
    let anti = tensor(d, |i, j| g.get(i, j).axpy(-1.0, g.get(j, i)).expect("grid").scale(0.5));
    let viscous_sym = div_weighted(&mu_raw, &sym).scale(2.0 * (1.0 - kappa));
    let viscous_rot = div_weighted(&mu_raw, &anti).scale(2.0 * kappa);
    let coupling = if kappa * (1.0 - kappa) != 0.0 {
        let v = state.v_or_identified(model);
        div_weighted(&mu_raw, &grad_tensor(&v)).scale(-2.0 * kappa * (1.0 - kappa))
    } else {
        zero_like(w)
    };
    let regularization = if p.epsilon != 0.0 {
        let gv = g.values();
        let np = gv[0].len();
        let g2: Vec<f64> = (0..np).map(|q| 1.0 + gv.iter().map(|c| c[q] * c[q]).sum::<f64>()).collect();
        let weight = ScalarField::from_values(w.grid(), &g2).expect("finite");
        let nl = div_weighted(&weight, &g);
        let bih = vector_laplacian(&vector_laplacian(w));
        nl.axpy(-1.0, &bih).expect("grid").scale(p.epsilon)
    } else {
        zero_like(w)
    };
    let capillary = if p.capillarity != 0.0 {
        crate::applications::capillary_direct(rho).scale(p.capillarity)
    } else {
        zero_like(w)
    };
    (
        ContinuityTerms { transport, diffusion },
        MomentumTerms { advection, viscous_sym, viscous_rot, coupling, regularization, capillary },
    )
}

/// κ = 0 limit: `∂tρ + div(ρu) = 0`, `∂t(ρu) + Div(ρu⊗u) - 2Div(μD(u)) + ∇π₁ = 0`.
pub fn incompressible_terms(state: &FluidState, model: &Model) -> (ContinuityTerms, MomentumTerms) {
    let rho = &state.rho;
    let u = &state.w;
    let d = u.dim();
    let mu = rho.map_full(|s| model.law.mu(s));
    let m = VectorField::new((0..d).map(|a| mul(rho, u.comp(a))).collect()).expect("components");
    let transport = -&crate::fields::div(&m);
    let m_raw = {
        let rv = rho.values();
        VectorField::new(
            (0..d)
                .map(|a| {
                    let ua = u.comp(a).values();
                    let vals: Vec<f64> = rv.iter().zip(&ua).map(|(r, x)| r * x).collect();
                    ScalarField::from_values(rho.grid(), &vals).expect("finite")
                })
                .collect(),
        )
        .expect("components")
    };
    let advection = div_outer(&m_raw, u).scale(-1.0);
    let g = grad_tensor(u);
    let dsym = tensor(d, |i, j| g.get(i, j).axpy(1.0, g.get(j, i)).expect("grid").scale(0.5));
    let viscous_sym = div_weighted(&mu, &dsym).scale(2.0);
    (
        ContinuityTerms { transport, diffusion: ScalarField::zeros(rho.grid()) },
        MomentumTerms {
            advection,
            viscous_sym,
            viscous_rot: zero_like(u),
            coupling: zero_like(u),
            regularization: zero_like(u),
            capillary: zero_like(u),
        },
    )
}

/// κ = 1 limit: `∂tρ + div(ρw) - 2Δμ = 0`,
/// `∂t(ρw) + Div((ρw - 2∇μ)⊗w) - 2Div(μA(w)) + ∇π₁ = 0`.
pub fn ks_terms(state: &FluidState, model: &Model) -> (ContinuityTerms, MomentumTerms) {
    let rho = &state.rho;
    let w = &state.w;
    let d = w.dim();
    let mu_raw = rho.map_full(|s| model.law.mu(s));
    let mu = mu_raw.dealiased();
    let m = VectorField::new((0..d).map(|a| mul(rho, w.comp(a))).collect()).expect("components");
    let transport = -&crate::fields::div(&m);
    let diffusion = laplacian(&mu).scale(2.0);
    let gmu = grad(&mu);
    let rv = rho.values();
    let j = VectorField::new(
        (0..d)
            .map(|a| {
                let wa = w.comp(a).values();
                let ga = gmu.comp(a).values();
                let vals: Vec<f64> = (0..rv.len()).map(|q| rv[q] * wa[q] - 2.0 * ga[q]).collect();
                ScalarField::from_values(rho.grid(), &vals).expect("finite")
            })
            .collect(),
    )
    .expect("components");
    let advection = div_outer(&j, w).scale(-1.0);
    let g = grad_tensor(w);
    let anti = tensor(d, |i, k| g.get(i, k).axpy(-1.0, g.get(k, i)).expect("grid").scale(0.5));
    let viscous_rot = div_weighted(&mu_raw, &anti).scale(2.0);
    (
        ContinuityTerms { transport, diffusion },
        MomentumTerms {
            advection,
            viscous_sym: zero_like(w),
            viscous_rot,
            coupling: zero_like(w),
            regularization: zero_like(w),
            capillary: zero_like(w),
        },
    )
}
