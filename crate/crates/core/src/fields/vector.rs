//! Vector and rank-two tensor fields built from scalar components.

use super::{FieldError, Grid, ScalarField};

/// A `d`-component periodic vector field.
#[derive(Clone, Debug)]
pub struct VectorField {
    comps: Vec<ScalarField>,
    /// Set by the Leray projection; informational only.
    pub solenoidal: bool,
}

impl VectorField {
    /// Components must share one grid and match its dimension.
    pub fn new(comps: Vec<ScalarField>) -> Result<Self, FieldError> {
        let first = comps.first().ok_or(FieldError::Components { expected: 2, got: 0 })?;
        let grid = *first.grid();
        if comps.len() != grid.dim() {
            return Err(FieldError::Components { expected: grid.dim(), got: comps.len() });
        }
        if comps.iter().any(|c| *c.grid() != grid) {
            return Err(FieldError::GridMismatch);
        }
        Ok(Self { comps, solenoidal: false })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self { comps: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(), solenoidal: true }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let comps = (0..grid.dim()).map(|a| ScalarField::from_fn(grid, |x| f(x)[a])).collect();
        Self { comps, solenoidal: false }
    }

    pub fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, a: usize) -> &ScalarField {
        &self.comps[a]
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn into_comps(self) -> Vec<ScalarField> {
        self.comps
    }

    /// Grid samples per component.
    pub fn values(&self) -> Vec<Vec<f64>> {
        self.comps.iter().map(|c| c.values()).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { comps: self.comps.iter().map(|c| c.scale(s)).collect(), solenoidal: self.solenoidal }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self, FieldError> {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.axpy(s, b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { comps, solenoidal: self.solenoidal && other.solenoidal })
    }

    pub fn dealiased(&self) -> Self {
        Self { comps: self.comps.iter().map(|c| c.dealiased()).collect(), solenoidal: self.solenoidal }
    }

    /// Pointwise `|v|^2`, dealiased.
    pub fn norm_squared(&self) -> ScalarField {
        let vals = self.values();
        let n = vals[0].len();
        let s: Vec<f64> = (0..n).map(|p| vals.iter().map(|c| c[p] * c[p]).sum()).collect();
        ScalarField::from_values(self.grid(), &s).expect("finite").dealiased()
    }
}

/// Structural symmetry of a tensor field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
    Antisymmetric,
}

/// A `d x d` tensor field; component `(i, j)` is stored at `i * d + j`.
#[derive(Clone, Debug)]
pub struct TensorField {
    comps: Vec<ScalarField>,
    pub symmetry: Symmetry,
}

impl TensorField {
    pub fn new(comps: Vec<ScalarField>, symmetry: Symmetry) -> Result<Self, FieldError> {
        let first = comps.first().ok_or(FieldError::Components { expected: 4, got: 0 })?;
        let grid = *first.grid();
        let d = grid.dim();
        if comps.len() != d * d {
            return Err(FieldError::Components { expected: d * d, got: comps.len() });
        }
        if comps.iter().any(|c| *c.grid() != grid) {
            return Err(FieldError::GridMismatch);
        }
        Ok(Self { comps, symmetry })
    }

    pub fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[i * self.dim() + j]
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim();
        let comps = (0..d * d).map(|k| self.comps[(k % d) * d + k / d].clone()).collect();
        Self { comps, symmetry: self.symmetry }
    }

    /// Grid samples per component.
    pub fn values(&self) -> Vec<Vec<f64>> {
        self.comps.iter().map(|c| c.values()).collect()
    }

    pub fn trace(&self) -> ScalarField {
        let d = self.dim();
        let mut t = self.comps[0].clone();
        for i in 1..d {
            t = &t + self.get(i, i);
        }
        t
    }
}
