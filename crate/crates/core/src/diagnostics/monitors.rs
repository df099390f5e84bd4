use crate::fields::ScalarField;

/// Extrema of the trigonometric interpolant of a field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrema {
    pub min: f64,
    pub max: f64,
    pub argmin: [f64; 3],
    pub argmax: [f64; 3],
}

/// Minimum and maximum of the band-limited interpolant: best sample on a
/// twice refined grid, polished by Newton steps on the interpolant.
pub fn continuous_extrema(f: &ScalarField) -> Extrema {
    let grid = *f.grid();
    let fine = grid.with_n(grid.n() * 2).expect("refined grid");
    let vals = f.upsampled_values(2);
    let (mut imin, mut imax) = (0, 0);
    for (i, v) in vals.iter().enumerate() {
        if *v < vals[imin] {
            imin = i;
        }
        if *v > vals[imax] {
            imax = i;
        }
    }
    let (min, argmin) = polish(f, fine.coordinates(imin), vals[imin], -1.0);
    let (max, argmax) = polish(f, fine.coordinates(imax), vals[imax], 1.0);
    Extrema { min, max, argmin, argmax }
}

/// Newton iteration for a stationary point; `sign` is +1 for a maximum and
/// -1 for a minimum. Steps that do not improve the value are rejected.
fn polish(f: &ScalarField, x0: [f64; 3], v0: f64, sign: f64) -> (f64, [f64; 3]) {
    let d = f.grid().dim();
    let h = f.grid().spacing();
    let mut x = x0;
    let mut best = v0;
    for _ in 0..12 {
        let (v, g, hs) = f.eval_at(x);
        if sign * v > sign * best {
            best = v;
        }
        let step = match solve(d, &hs, &g) {
            Some(s) => s,
            None => break,
        };
        let len = step.iter().map(|s| s * s).sum::<f64>().sqrt();
        if !(len < h) {
            break;
        }
        let mut y = x;
        for a in 0..d {
            y[a] -= step[a];
        }
        let (vy, _, _) = f.eval_at(y);
        if sign * vy < sign * best - 1e-15 * best.abs() {
            break;
        }
        if sign * vy > sign * best {
            best = vy;
        }
        x = y;
        if len < 1e-13 {
            break;
        }
    }
    (best, x)
}

/// Solves `H s = g` for `d ∈ {2, 3}` by Cramer's rule.
fn solve(d: usize, h: &[[f64; 3]; 3], g: &[f64; 3]) -> Option<[f64; 3]> {
    if d == 2 {
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        return Some([(g[0] * h[1][1] - g[1] * h[0][1]) / det, (h[0][0] * g[1] - h[1][0] * g[0]) / det, 0.0]);
    }
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let det = det3(h);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut s = [0.0; 3];
    for c in 0..3 {
        let mut m = *h;
        for r in 0..3 {
            m[r][c] = g[r];
        }
        s[c] = det3(&m) / det;
    }
    Some(s)
}

/// Extrema of `ρ` for one state.
pub fn bounds_monitor(rho: &ScalarField) -> Extrema {
    continuous_extrema(rho)
}

/// Tracks excursions of `ρ` outside the initial band `[lower, upper]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsMonitor {
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
    pub min_seen: f64,
    pub max_seen: f64,
    /// Largest distance outside the band.
    pub worst_excursion: f64,
    /// Time of the first excursion beyond the tolerance.
    pub first_violation: Option<f64>,
    /// Whether the lower bound never decreased and the upper never increased
    /// between consecutive observations, up to `tolerance`.
    pub monotone: bool,
    last: Option<(f64, f64)>,
}

impl BoundsMonitor {
    /// Band of the initial density with tolerance `rel_tol·(R - r)` plus a
    /// round-off allowance.
    pub fn from_initial(rho0: &ScalarField, rel_tol: f64) -> Self {
        let e = continuous_extrema(rho0);
        let tol = rel_tol * (e.max - e.min) + 64.0 * f64::EPSILON * e.max.abs();
        Self::new(e.min, e.max, tol)
    }

    pub fn new(lower: f64, upper: f64, tolerance: f64) -> Self {
        Self {
            lower,
            upper,
            tolerance,
            min_seen: lower,
            max_seen: upper,
            worst_excursion: 0.0,
            first_violation: None,
            monotone: true,
            last: None,
        }
    }

    pub fn observe(&mut self, t: f64, e: &Extrema) {
        self.min_seen = self.min_seen.min(e.min);
        self.max_seen = self.max_seen.max(e.max);
        let exc = (self.lower - e.min).max(e.max - self.upper).max(0.0);
        self.worst_excursion = self.worst_excursion.max(exc);
        if exc > self.tolerance && self.first_violation.is_none() {
            self.first_violation = Some(t);
        }
        if let Some((lo, hi)) = self.last {
            if e.min < lo - self.tolerance || e.max > hi + self.tolerance {
                self.monotone = false;
            }
        }
        self.last = Some((e.min, e.max));
    }

    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }

    /// Largest excursion relative to `R - r`.
    pub fn relative_excursion(&self) -> f64 {
        let w = self.upper - self.lower;
        if w > 0.0 {
            self.worst_excursion / w
        } else {
            self.worst_excursion
        }
    }
}

/// Max-principle check over a sequence of densities.
pub fn max_principle_monitor<'a>(rhos: impl IntoIterator<Item = (f64, &'a ScalarField)>, rel_tol: f64) -> Option<BoundsMonitor> {
    let mut it = rhos.into_iter();
    let (t0, r0) = it.next()?;
    let mut m = BoundsMonitor::from_initial(r0, rel_tol);
    m.observe(t0, &continuous_extrema(r0));
    for (t, r) in it {
        m.observe(t, &continuous_extrema(r));
    }
    Some(m)
}

/// Checks `E(t_{n+1}) <= E(t_n) + rel_tol·E(0)` per step and the sign of the
/// budget terms.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyMonitor {
    pub initial: f64,
    pub rel_tol: f64,
    /// Largest increase between consecutive observations, relative to `E(0)`.
    pub worst_increase: f64,
    pub violations: usize,
    /// Most negative budget term seen.
    pub min_term: f64,
    last: Option<f64>,
}

impl EntropyMonitor {
    pub fn new(rel_tol: f64) -> Self {
        Self { initial: f64::NAN, rel_tol, worst_increase: f64::NEG_INFINITY, violations: 0, min_term: 0.0, last: None }
    }

    /// `steps` is the number of time steps since the previous observation.
    pub fn observe(&mut self, e: f64, terms: &[f64], steps: usize) {
        if self.initial.is_nan() {
            self.initial = e;
        }
        for &t in terms {
            self.min_term = self.min_term.min(t);
        }
        if let Some(prev) = self.last {
            let scale = if self.initial.abs() > 0.0 { self.initial.abs() } else { 1.0 };
            let inc = (e - prev) / scale;
            self.worst_increase = self.worst_increase.max(inc);
            if inc > self.rel_tol * steps.max(1) as f64 {
                self.violations += 1;
            }
        }
        self.last = Some(e);
    }

    /// Entropy monotone within tolerance and budget terms at least `-1e-12`.
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.min_term >= -1e-12
    }
}
