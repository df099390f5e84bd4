//! Cached FFT plans, wavenumber tables and slice-level spectral kernels.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use super::Grid;

type C = Complex64;

/// Per-grid transform plans and wavenumber tables.
pub struct Context {
    pub grid: Grid,
    /// Derivative wavenumbers per axis; Nyquist entries are zero.
    pub k: Vec<Vec<f64>>,
    /// `|k|^2` built from the derivative wavenumbers.
    pub k2: Vec<f64>,
    /// Modes retained by the truncation rule.
    pub keep: Vec<bool>,
    /// Multiplicity of each stored coefficient in the full spectrum.
    pub weight: Vec<f64>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

type Key = (usize, usize, u64, u64);

fn registry() -> &'static Mutex<HashMap<Key, Arc<Context>>> {
    static REG: OnceLock<Mutex<HashMap<Key, Arc<Context>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared context for a grid, built on first use.
pub fn context(grid: &Grid) -> Arc<Context> {
    let key = grid.key();
    let mut reg = registry().lock().unwrap_or_else(|e| e.into_inner());
    reg.entry(key).or_insert_with(|| Arc::new(Context::build(*grid))).clone()
}

impl Context {
    fn build(grid: Grid) -> Self {
        let n = grid.n();
        let d = grid.dim();
        let len = grid.spectral_len();
        let k0 = grid.fundamental();
        let cut = grid.cutoff() as i64;
        let nyq = (n / 2) as i64;
        let mut k = vec![vec![0.0; len]; d];
        let mut k2 = vec![0.0; len];
        let mut keep = vec![false; len];
        let mut weight = vec![0.0; len];
        for idx in 0..len {
            let m = grid.mode(idx);
            let mut s = 0.0;
            let mut kept = true;
            for a in 0..d {
                let ka = if m[a].abs() == nyq { 0.0 } else { m[a] as f64 * k0 };
                k[a][idx] = ka;
                s += ka * ka;
                kept &= m[a].abs() <= cut;
            }
            k2[idx] = s;
            keep[idx] = kept;
            let last = m[d - 1];
            weight[idx] = if last == 0 || last == nyq { 1.0 } else { 2.0 };
        }
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        Self {
            grid,
            k,
            k2,
            keep,
            weight,
            r2c: rp.plan_fft_forward(n),
            c2r: rp.plan_fft_inverse(n),
            fwd: cp.plan_fft_forward(n),
            inv: cp.plan_fft_inverse(n),
        }
    }

    /// Normalized forward transform: `f(x) = sum_k c_k exp(i k.x)`.
    pub fn forward(&self, values: &[f64]) -> Vec<C> {
        let n = self.grid.n();
        let h = self.grid.half();
        assert_eq!(values.len(), self.grid.num_points(), "physical array length");
        let rows = values.len() / n;
        let mut out = vec![C::new(0.0, 0.0); rows * h];
        let mut input = values.to_vec();
        let mut scratch = self.r2c.make_scratch_vec();
        for r in 0..rows {
            self.r2c
                .process_with_scratch(&mut input[r * n..(r + 1) * n], &mut out[r * h..(r + 1) * h], &mut scratch)
                .expect("real forward transform");
        }
        self.full_axes(&mut out, &*self.fwd);
        let scale = 1.0 / self.grid.num_points() as f64;
        for c in out.iter_mut() {
            *c *= scale;
        }
        out
    }

    /// Inverse of [`Context::forward`].
    pub fn inverse(&self, coeffs: &[C]) -> Vec<f64> {
        let n = self.grid.n();
        let h = self.grid.half();
        assert_eq!(coeffs.len(), self.grid.spectral_len(), "spectral array length");
        let mut work = coeffs.to_vec();
        self.full_axes(&mut work, &*self.inv);
        let rows = work.len() / h;
        let mut out = vec![0.0; rows * n];
        let mut scratch = self.c2r.make_scratch_vec();
        for r in 0..rows {
            let row = &mut work[r * h..(r + 1) * h];
            row[0].im = 0.0;
            row[h - 1].im = 0.0;
            self.c2r
                .process_with_scratch(row, &mut out[r * n..(r + 1) * n], &mut scratch)
                .expect("real inverse transform");
        }
        out
    }

    /// Complex transforms along every axis except the last.
    fn full_axes(&self, data: &mut [C], fft: &dyn Fft<f64>) {
        let n = self.grid.n();
        let h = self.grid.half();
        let d = self.grid.dim();
        let mut scratch = vec![C::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..d - 1 {
            // stride between consecutive entries along `axis`
            let stride = n.pow((d - 2 - axis) as u32) * h;
            let outer = data.len() / (n * stride);
            let mut buf = vec![C::new(0.0, 0.0); n * stride];
            for o in 0..outer {
                let base = o * n * stride;
                for t in 0..n {
                    for s in 0..stride {
                        buf[s * n + t] = data[base + t * stride + s];
                    }
                }
                fft.process_with_scratch(&mut buf, &mut scratch);
                for t in 0..n {
                    for s in 0..stride {
                        data[base + t * stride + s] = buf[s * n + t];
                    }
                }
            }
        }
    }

    /// Zeroes every mode outside the truncation band.
    pub fn dealias(&self, c: &mut [C]) {
        for (v, &k) in c.iter_mut().zip(&self.keep) {
            if !k {
                *v = C::new(0.0, 0.0);
            }
        }
    }

    /// `i k_axis c`.
    pub fn deriv(&self, c: &[C], axis: usize) -> Vec<C> {
        c.iter().zip(&self.k[axis]).map(|(v, &k)| C::new(-k * v.im, k * v.re)).collect()
    }

    /// `sum_axis i k_axis c_axis`.
    pub fn div(&self, comps: &[Vec<C>]) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); self.grid.spectral_len()];
        for (a, c) in comps.iter().enumerate() {
            for ((o, v), &k) in out.iter_mut().zip(c).zip(&self.k[a]) {
                *o += C::new(-k * v.im, k * v.re);
            }
        }
        out
    }

    pub fn laplacian(&self, c: &[C]) -> Vec<C> {
        c.iter().zip(&self.k2).map(|(v, &k2)| -k2 * v).collect()
    }

    /// Removes the gradient part of a vector field mode by mode.
    pub fn leray(&self, comps: &mut [Vec<C>]) {
        let d = comps.len();
        for idx in 0..self.grid.spectral_len() {
            let k2 = self.k2[idx];
            if k2 == 0.0 {
                continue;
            }
            let mut kv = C::new(0.0, 0.0);
            for a in 0..d {
                kv += self.k[a][idx] * comps[a][idx];
            }
            let f = kv / k2;
            for a in 0..d {
                let ka = self.k[a][idx];
                comps[a][idx] -= ka * f;
            }
        }
    }

    /// Multiplies every mode by `exp(-width^2 |k|^2 / 2)`.
    pub fn gaussian(&self, c: &mut [C], width: f64) {
        if width == 0.0 {
            return;
        }
        for (v, &k2) in c.iter_mut().zip(&self.k2) {
            *v *= (-0.5 * width * width * k2).exp();
        }
    }

    /// `∫ f g` for real fields given by their coefficients.
    pub fn inner(&self, a: &[C], b: &[C]) -> f64 {
        let s: f64 = a
            .iter()
            .zip(b)
            .zip(&self.weight)
            .map(|((x, y), &w)| w * (x.re * y.re + x.im * y.im))
            .sum();
        s * self.grid.volume()
    }
}
