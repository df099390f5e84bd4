//! Spectral differential operators, projections and norms.

use num_complex::Complex64;

use super::spectral::context;
use super::{FieldError, ScalarField, Symmetry, TensorField, VectorField};

fn wrap(grid: &super::Grid, c: Vec<Complex64>) -> ScalarField {
    ScalarField::from_coeffs(grid, c).expect("spectral length")
}

pub fn grad(f: &ScalarField) -> VectorField {
    let ctx = context(f.grid());
    let comps = (0..f.grid().dim()).map(|a| wrap(f.grid(), ctx.deriv(f.coeffs(), a))).collect();
    VectorField::new(comps).expect("consistent components")
}

pub fn div(v: &VectorField) -> ScalarField {
    let ctx = context(v.grid());
    let mut out = vec![Complex64::new(0.0, 0.0); v.grid().spectral_len()];
    for (a, c) in v.comps().iter().enumerate() {
        for ((o, x), &k) in out.iter_mut().zip(c.coeffs()).zip(&ctx.k[a]) {
            *o += Complex64::new(-k * x.im, k * x.re);
        }
    }
    wrap(v.grid(), out)
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    wrap(f.grid(), context(f.grid()).laplacian(f.coeffs()))
}

pub fn vector_laplacian(v: &VectorField) -> VectorField {
    VectorField::new(v.comps().iter().map(laplacian).collect()).expect("consistent components")
}

/// `G_ij = ∂_j v_i`.
pub fn grad_tensor(v: &VectorField) -> TensorField {
    let ctx = context(v.grid());
    let d = v.dim();
    let mut comps = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            comps.push(wrap(v.grid(), ctx.deriv(v.comp(i).coeffs(), j)));
        }
    }
    TensorField::new(comps, Symmetry::General).expect("consistent components")
}

/// Symmetric part of the velocity gradient, `(∇v + ∇v^T) / 2`.
pub fn sym_grad(v: &VectorField) -> TensorField {
    let g = grad_tensor(v);
    combine(&g, 0.5, Symmetry::Symmetric)
}

/// Antisymmetric part of the velocity gradient, `(∇v - ∇v^T) / 2`.
pub fn antisym_grad(v: &VectorField) -> TensorField {
    let g = grad_tensor(v);
    combine(&g, -0.5, Symmetry::Antisymmetric)
}

fn combine(g: &TensorField, sign_half: f64, symmetry: Symmetry) -> TensorField {
    let d = g.dim();
    let mut comps = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let a = g.get(i, j).scale(0.5);
            comps.push(a.axpy(sign_half, g.get(j, i)).expect("same grid"));
        }
    }
    TensorField::new(comps, symmetry).expect("consistent components")
}

/// Row divergence, `(Div T)_i = sum_j ∂_j T_ij`.
pub fn tensor_div(t: &TensorField) -> VectorField {
    let ctx = context(t.grid());
    let d = t.dim();
    let comps = (0..d)
        .map(|i| {
            let rows: Vec<Vec<Complex64>> = (0..d).map(|j| t.get(i, j).coeffs().to_vec()).collect();
            wrap(t.grid(), ctx.div(&rows))
        })
        .collect();
    VectorField::new(comps).expect("consistent components")
}

/// Orthogonal projection onto divergence-free fields. The mean is kept.
pub fn leray_project(v: &VectorField) -> VectorField {
    let ctx = context(v.grid());
    let mut c: Vec<Vec<Complex64>> = v.comps().iter().map(|s| s.coeffs().to_vec()).collect();
    ctx.leray(&mut c);
    let mut out = VectorField::new(c.into_iter().map(|x| wrap(v.grid(), x)).collect()).expect("components");
    out.solenoidal = true;
    out
}

pub fn dealias(f: &ScalarField) -> ScalarField {
    f.dealiased()
}

/// Spectral Gaussian mollifier of the given width.
pub fn gaussian_filter(f: &ScalarField, width: f64) -> ScalarField {
    let mut c = f.coeffs().to_vec();
    context(f.grid()).gaussian(&mut c, width);
    wrap(f.grid(), c)
}

pub fn gaussian_filter_vector(v: &VectorField, width: f64) -> VectorField {
    let mut out = VectorField::new(v.comps().iter().map(|c| gaussian_filter(c, width)).collect())
        .expect("components");
    out.solenoidal = v.solenoidal;
    out
}

/// `∫ f g`.
pub fn inner(f: &ScalarField, g: &ScalarField) -> Result<f64, FieldError> {
    f.check(g)?;
    Ok(context(f.grid()).inner(f.coeffs(), g.coeffs()))
}

pub fn l2(f: &ScalarField) -> f64 {
    context(f.grid()).inner(f.coeffs(), f.coeffs()).max(0.0).sqrt()
}

pub fn linf(f: &ScalarField) -> f64 {
    f.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn l4(f: &ScalarField) -> f64 {
    let s: f64 = f.values().iter().map(|v| v.powi(4)).sum();
    (s * f.grid().cell_volume()).powf(0.25)
}

/// `(∫ f^2 + |∇f|^2)^{1/2}`.
pub fn h1(f: &ScalarField) -> f64 {
    let ctx = context(f.grid());
    let s: f64 = f
        .coeffs()
        .iter()
        .zip(&ctx.weight)
        .zip(&ctx.k2)
        .map(|((c, &w), &k2)| w * (1.0 + k2) * c.norm_sqr())
        .sum();
    (s * f.grid().volume()).sqrt()
}

pub fn vector_l2(v: &VectorField) -> f64 {
    v.comps().iter().map(|c| l2(c).powi(2)).sum::<f64>().sqrt()
}

pub fn vector_h1(v: &VectorField) -> f64 {
    v.comps().iter().map(|c| h1(c).powi(2)).sum::<f64>().sqrt()
}

pub fn vector_linf(v: &VectorField) -> f64 {
    let vals = v.values();
    (0..vals[0].len())
        .map(|p| vals.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

pub fn tensor_l2(t: &TensorField) -> f64 {
    t.comps().iter().map(|c| l2(c).powi(2)).sum::<f64>().sqrt()
}

/// Ratio `‖∇f‖_{L4}^2 / (‖Δf‖_{L2} ‖f‖_{L∞})`; the interpolation bound is
/// only reported, never asserted against a fixed constant.
pub fn gn_ratio(f: &ScalarField) -> f64 {
    let g = grad(f);
    let gv = g.values();
    let n = gv[0].len();
    let s: f64 = (0..n).map(|p| gv.iter().map(|c| c[p] * c[p]).sum::<f64>().powi(2)).sum();
    let l4g = (s * f.grid().cell_volume()).powf(0.25);
    l4g * l4g / (l2(&laplacian(f)) * linf(f))
}
