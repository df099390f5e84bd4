//! Periodic box geometry and spectral index bookkeeping.
//!
//! Physical samples are stored row-major with the last axis fastest.
//! Spectral coefficients use the real-to-complex half layout: every axis
//! but the last keeps all `n` wavenumbers, the last keeps `n / 2 + 1`.

use std::f64::consts::PI;

use super::FieldError;

/// Uniform periodic grid on `[0, length)^dim`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
    dealias_fraction: f64,
}

impl Grid {
    /// Validates and builds a grid.
    pub fn new(dim: usize, n: usize, length: f64, dealias_fraction: f64) -> Result<Self, FieldError> {
        if dim != 2 && dim != 3 {
            return Err(FieldError::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(FieldError::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(FieldError::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(FieldError::InvalidGrid(format!(
                "dealias fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        Ok(Self { dim, n, length, dealias_fraction })
    }

    /// The standard `2π`-periodic box with the 2/3 truncation rule.
    pub fn periodic(dim: usize, n: usize) -> Result<Self, FieldError> {
        Self::new(dim, n, 2.0 * PI, 2.0 / 3.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Same geometry with a different number of points per axis.
    pub fn with_n(&self, n: usize) -> Result<Self, FieldError> {
        Self::new(self.dim, n, self.length, self.dealias_fraction)
    }

    pub fn num_points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Number of stored coefficients along the last axis.
    pub fn half(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn spectral_len(&self) -> usize {
        self.n.pow(self.dim as u32 - 1) * self.half()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Wavenumber of the first non-trivial mode, `2π / L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest retained integer wavenumber under the truncation rule.
    /// The Nyquist mode is never retained.
    pub fn cutoff(&self) -> usize {
        let c = (self.dealias_fraction * (self.n / 2) as f64 + 1e-9).floor() as usize;
        c.min(self.n / 2 - 1)
    }

    /// Signed integer wavenumber of index `i` on a full axis.
    pub fn signed_index(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Integer wavevector of a flat spectral index (unused axes are zero).
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let h = self.half();
        let n = self.n;
        let last = idx % h;
        let rest = idx / h;
        match self.dim {
            2 => [self.signed_index(rest), last as i64, 0],
            _ => [self.signed_index(rest / n), self.signed_index(rest % n), last as i64],
        }
    }

    /// Flat spectral index of an integer wavevector whose last component is
    /// non-negative. Returns `None` if the mode is not stored.
    pub fn spectral_index(&self, k: [i64; 3]) -> Option<usize> {
        let n = self.n as i64;
        let wrap = |v: i64| -> Option<usize> {
            if v.abs() > n / 2 {
                None
            } else {
                Some(v.rem_euclid(n) as usize)
            }
        };
        let d = self.dim;
        let last = k[d - 1];
        if last < 0 || last > n / 2 {
            return None;
        }
        match d {
            2 => Some(wrap(k[0])? * self.half() + last as usize),
            _ => Some((wrap(k[0])? * self.n + wrap(k[1])?) * self.half() + last as usize),
        }
    }

    /// Physical coordinates of a flat point index.
    pub fn coordinates(&self, p: usize) -> [f64; 3] {
        let h = self.spacing();
        let n = self.n;
        match self.dim {
            2 => [(p / n) as f64 * h, (p % n) as f64 * h, 0.0],
            _ => [(p / (n * n)) as f64 * h, ((p / n) % n) as f64 * h, (p % n) as f64 * h],
        }
    }

    pub(crate) fn key(&self) -> (usize, usize, u64, u64) {
        (self.dim, self.n, self.length.to_bits(), self.dealias_fraction.to_bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::periodic(1, 16).is_err());
        assert!(Grid::periodic(2, 12).is_err());
        assert!(Grid::periodic(2, 4).is_err());
        assert!(Grid::new(2, 16, -1.0, 0.5).is_err());
        assert!(Grid::new(2, 16, 1.0, 0.0).is_err());
    }

    #[test]
    fn cutoff_follows_two_thirds_rule() {
        assert_eq!(Grid::periodic(2, 64).unwrap().cutoff(), 21);
        assert_eq!(Grid::periodic(2, 16).unwrap().cutoff(), 5);
        assert_eq!(Grid::new(2, 16, 1.0, 1.0).unwrap().cutoff(), 7);
    }

    #[test]
    fn spectral_index_roundtrip() {
        for d in [2, 3] {
            let g = Grid::periodic(d, 8).unwrap();
            for idx in 0..g.spectral_len() {
                assert_eq!(g.spectral_index(g.mode(idx)), Some(idx));
            }
        }
    }
}
