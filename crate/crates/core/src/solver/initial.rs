//! Initial data: seeded low-mode random fields, Taylor-Green vortices and
//! the compatible construction `w⁰ = P(u⁰ + 2κ∇φ(ρ⁰))`.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FluidState, Model};
use crate::fields::{div, l2, leray_project, vector_h1, vector_l2, Grid, ScalarField, VectorField};

/// Recipe for smooth random initial data built from the Fourier modes with
/// `|k_i| <= modes`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomData {
    pub seed: u64,
    pub modes: usize,
    pub rho_mean: f64,
    /// Largest deviation of `ρ⁰` from its mean.
    pub rho_amplitude: f64,
    /// Root mean square of `u⁰`.
    pub velocity_rms: f64,
}

impl RandomData {
    pub fn new(seed: u64) -> Self {
        Self { seed, modes: 2, rho_mean: 1.0, rho_amplitude: 0.2, velocity_rms: 0.5 }
    }

    pub fn generate(&self, grid: &Grid) -> InitialData {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let f = random_field(grid, &mut rng, self.modes);
        let peak = f.upsampled_values(4).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let rho = if peak > 0.0 {
            ScalarField::constant(grid, self.rho_mean).axpy(self.rho_amplitude / peak, &f).expect("same grid")
        } else {
            ScalarField::constant(grid, self.rho_mean)
        };
        let raw = VectorField::new((0..grid.dim()).map(|_| random_field(grid, &mut rng, self.modes)).collect())
            .expect("components");
        let u = leray_project(&raw);
        let rms = vector_l2(&u) / grid.volume().sqrt();
        let u = if rms > 0.0 { u.scale(self.velocity_rms / rms) } else { u };
        InitialData { rho, u }
    }
}

/// Density and velocity before the `w` construction.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub rho: ScalarField,
    pub u: VectorField,
}

/// Mean-zero real trigonometric polynomial with uniform random coefficients.
fn random_field(grid: &Grid, rng: &mut ChaCha8Rng, modes: usize) -> ScalarField {
    let d = grid.dim();
    let k = modes as i64;
    let mut terms = Vec::new();
    let ranges: Vec<i64> = (-k..=k).collect();
    let mut idx = vec![0usize; d];
    loop {
        let m: Vec<i64> = idx.iter().map(|&i| ranges[i]).collect();
        // one representative of each ±k pair
        let first = m.iter().find(|&&x| x != 0);
        if matches!(first, Some(&x) if x > 0) {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            terms.push((m, a, b));
        }
        let mut a = 0;
        loop {
            if a == d {
                return sum_modes(grid, &terms);
            }
            idx[a] += 1;
            if idx[a] < ranges.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

fn sum_modes(grid: &Grid, terms: &[(Vec<i64>, f64, f64)]) -> ScalarField {
    let k0 = grid.fundamental();
    ScalarField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(m, a, b)| {
                let ph: f64 = m.iter().enumerate().map(|(i, &mi)| mi as f64 * k0 * x[i]).sum();
                a * ph.cos() + b * ph.sin()
            })
            .sum()
    })
}

/// Taylor-Green vortex `A(sin x cos y, -cos x sin y)`, extended by `cos z`
/// in three dimensions.
pub fn taylor_green(grid: &Grid, amplitude: f64) -> VectorField {
    let k = grid.fundamental();
    let three = grid.dim() == 3;
    let mut v = VectorField::from_fn(grid, |x| {
        let cz = if three { (k * x[2]).cos() } else { 1.0 };
        [
            amplitude * (k * x[0]).sin() * (k * x[1]).cos() * cz,
            -amplitude * (k * x[0]).cos() * (k * x[1]).sin() * cz,
            0.0,
        ]
    });
    v.solenoidal = true;
    v
}

/// Smooth unit-rms field used to perturb `v⁰`.
pub fn aux_perturbation(grid: &Grid) -> VectorField {
    let k = grid.fundamental();
    let d = grid.dim();
    let v = VectorField::from_fn(grid, |x| {
        let mut out = [0.0; 3];
        for a in 0..d {
            out[a] = (k * x[(a + 1) % d]).sin();
        }
        out
    });
    let rms = vector_l2(&v) / grid.volume().sqrt();
    v.scale(1.0 / rms)
}

/// Choice of `v⁰` in augmented mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AuxInit {
    /// Reduced mode, no `v`.
    None,
    /// `v⁰ = 2∇φ(ρ⁰)`.
    Consistent,
    /// `v⁰ = 2∇φ(ρ⁰) + η p` with the unit-rms field [`aux_perturbation`].
    Perturbed(f64),
}

/// Builds `(ρ⁰, w⁰, v⁰)` with `w⁰ = P(u⁰ + 2κ∇φ(ρ⁰))`. A warning is logged
/// when `u⁰ + 2κ∇φ(ρ⁰)` is not already solenoidal.
pub fn initial_state(data: &InitialData, model: &Model, kappa: f64, aux: AuxInit) -> FluidState {
    let tgp = model.two_grad_phi(&data.rho);
    let w = data.u.axpy(kappa, &tgp).expect("same grid");
    let h = vector_h1(&w);
    if h > 0.0 && l2(&div(&w)) > 1e-12 * h {
        log::warn!("initial w is not solenoidal (relative divergence {:.3e}); projecting", l2(&div(&w)) / h);
    }
    let w = leray_project(&w);
    let v = match aux {
        AuxInit::None => None,
        AuxInit::Consistent => Some(tgp),
        AuxInit::Perturbed(eta) => Some(tgp.axpy(eta, &aux_perturbation(data.rho.grid())).expect("same grid")),
    };
    FluidState { rho: data.rho.clone(), w, v, t: 0.0 }
}
