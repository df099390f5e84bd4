//! Real scalar fields stored by their spectral coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::spectral::context;
use super::{FieldError, Grid};

/// A real periodic scalar field.
///
/// The normalized half-spectrum is the master representation, so the
/// mean (and therefore any integral) is carried exactly.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: *grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.spectral_len()] }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// From grid samples, keeping every resolvable mode.
    pub fn from_values(grid: &Grid, values: &[f64]) -> Result<Self, FieldError> {
        if values.len() != grid.num_points() {
            return Err(FieldError::Shape { expected: grid.num_points(), got: values.len() });
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite(p));
        }
        Ok(Self { grid: *grid, coeffs: context(grid).forward(values) })
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self, FieldError> {
        if coeffs.len() != grid.spectral_len() {
            return Err(FieldError::Shape { expected: grid.spectral_len(), got: coeffs.len() });
        }
        Ok(Self { grid: *grid, coeffs })
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let vals: Vec<f64> = (0..grid.num_points()).map(|p| f(grid.coordinates(p))).collect();
        Self { grid: *grid, coeffs: context(grid).forward(&vals) }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Grid samples.
    pub fn values(&self) -> Vec<f64> {
        context(&self.grid).inverse(&self.coeffs)
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn integral(&self) -> f64 {
        self.mean() * self.grid.volume()
    }

    /// Truncated to the retained band.
    pub fn dealiased(&self) -> Self {
        let mut c = self.coeffs.clone();
        context(&self.grid).dealias(&mut c);
        Self { grid: self.grid, coeffs: c }
    }

    /// Pointwise `f(value)`, truncated to the retained band.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.map_full(f).dealiased()
    }

    /// Pointwise `f(value)` without truncation.
    pub fn map_full(&self, f: impl Fn(f64) -> f64) -> Self {
        let ctx = context(&self.grid);
        let vals: Vec<f64> = ctx.inverse(&self.coeffs).into_iter().map(f).collect();
        Self { grid: self.grid, coeffs: ctx.forward(&vals) }
    }

    /// Dealiased pointwise product.
    pub fn product(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        let ctx = context(&self.grid);
        let a = ctx.inverse(&self.coeffs);
        let b = ctx.inverse(&other.coeffs);
        let p: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut c = ctx.forward(&p);
        ctx.dealias(&mut c);
        Ok(Self { grid: self.grid, coeffs: c })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { grid: self.grid, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + s * b).collect(),
        })
    }

    pub fn check(&self, other: &Self) -> Result<(), FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        Ok(())
    }

    /// Largest grid value and smallest grid value.
    pub fn min_max(&self) -> (f64, f64) {
        self.values()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Spectral interpolation onto another grid of the same dimension and
    /// period: zero padding when refining, truncation when coarsening.
    /// Nyquist modes of the source are dropped.
    pub fn resample(&self, grid: &Grid) -> Result<Self, FieldError> {
        if grid.dim() != self.grid.dim() || grid.length() != self.grid.length() {
            return Err(FieldError::GridMismatch);
        }
        let mut c = vec![Complex64::new(0.0, 0.0); grid.spectral_len()];
        let nyq = (self.grid.n() / 2) as i64;
        let fine_nyq = (grid.n() / 2) as i64;
        for (idx, v) in self.coeffs.iter().enumerate() {
            let m = self.grid.mode(idx);
            if m.iter().any(|x| x.abs() == nyq || x.abs() >= fine_nyq) {
                continue;
            }
            if let Some(j) = grid.spectral_index(m) {
                c[j] = *v;
            }
        }
        Ok(Self { grid: *grid, coeffs: c })
    }

    /// Value, gradient and Hessian of the trigonometric interpolant at `x`.
    pub fn eval_at(&self, x: [f64; 3]) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let ctx = context(&self.grid);
        let d = self.grid.dim();
        let k0 = self.grid.fundamental();
        let nyq = (self.grid.n() / 2) as i64;
        let mut val = 0.0;
        let mut g = [0.0; 3];
        let mut h = [[0.0; 3]; 3];
        for (idx, c) in self.coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let m = self.grid.mode(idx);
            if m.iter().any(|v| v.abs() == nyq) {
                continue;
            }
            let k = [m[0] as f64 * k0, m[1] as f64 * k0, m[2] as f64 * k0];
            let ph: f64 = (0..d).map(|a| k[a] * x[a]).sum();
            let (s, co) = ph.sin_cos();
            let w = ctx.weight[idx];
            // Re(c e^{iφ}) and Im(c e^{iφ})
            let re = w * (c.re * co - c.im * s);
            let im = w * (c.re * s + c.im * co);
            val += re;
            for a in 0..d {
                g[a] -= k[a] * im;
                for b in 0..d {
                    h[a][b] -= k[a] * k[b] * re;
                }
            }
        }
        (val, g, h)
    }

    /// Samples on a grid refined by `factor` per axis via zero padding.
    pub fn upsampled_values(&self, factor: usize) -> Vec<f64> {
        let fine = Grid::new(self.grid.dim(), self.grid.n() * factor, self.grid.length(), 1.0)
            .expect("refined grid");
        let mut c = vec![Complex64::new(0.0, 0.0); fine.spectral_len()];
        let nyq = (self.grid.n() / 2) as i64;
        for (idx, v) in self.coeffs.iter().enumerate() {
            let m = self.grid.mode(idx);
            if m.iter().any(|x| x.abs() == nyq) {
                continue;
            }
            if let Some(j) = fine.spectral_index(m) {
                c[j] = *v;
            }
        }
        context(&fine).inverse(&c)
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    /// Panics if the grids differ.
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.axpy(1.0, rhs).expect("grid mismatch")
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    /// Panics if the grids differ.
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.axpy(-1.0, rhs).expect("grid mismatch")
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, s: f64) -> ScalarField {
        self.scale(s)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}
