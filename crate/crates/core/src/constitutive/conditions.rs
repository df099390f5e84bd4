//! Admissibility conditions on viscosity laws.

use super::{ConstitutiveError, ViscosityLaw};

const SAMPLES: usize = 10_000;

/// Minimum of `f` on `[a, b]`: dense sampling, then golden-section
/// refinement around the best sample. Returns `(argmin, min)`.
pub fn minimize(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let h = (b - a) / SAMPLES as f64;
    let mut best = (a, f(a));
    let mut bi = 0;
    for i in 1..=SAMPLES {
        let x = if i == SAMPLES { b } else { a + h * i as f64 };
        let v = f(x);
        if v < best.1 {
            best = (x, v);
            bi = i;
        }
    }
    let lo = a + h * bi.saturating_sub(1) as f64;
    let hi = (a + h * (bi + 1) as f64).min(b);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut l, mut r) = (lo, hi);
    let mut x1 = r - g * (r - l);
    let mut x2 = l + g * (r - l);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            r = x2;
            x2 = x1;
            f2 = f1;
            x1 = r - g * (r - l);
            f1 = f(x1);
        } else {
            l = x1;
            x1 = x2;
            f1 = f2;
            x2 = l + g * (r - l);
            f2 = f(x2);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Outcome of a pointwise admissibility check.
#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub satisfied: bool,
    /// Infimum over `[r, R]` of the governing expression.
    pub infimum: f64,
    pub argmin: f64,
    /// Human-readable description of the failure point, if any.
    pub witness: Option<String>,
}

/// Checks `inf_{[r,R]} ((1-d)/d) μ(s) + μ'(s) s > 0`.
pub fn check_important(law: &ViscosityLaw, d: usize) -> Result<ConditionReport, ConstitutiveError> {
    law.check_interval()?;
    let c = (1.0 - d as f64) / d as f64;
    let (r, big_r) = law.interval();
    let (x, v) = minimize(
        |s| {
            let (m, dm) = law.eval(s);
            c * m + dm * s
        },
        r,
        big_r,
    );
    let satisfied = v > 0.0;
    let witness = (!satisfied).then(|| {
        format!("((1-d)/d)μ(s) + μ'(s)s = {v:.6e} <= 0 at s = {x:.12} for law {} in d = {d}", law.label)
    });
    Ok(ConditionReport { satisfied, infimum: v, argmin: x, witness })
}

/// A viscosity law `μ` together with the comparison law `μ̃`.
/// `μ̃` need not be positive; only `μ`'s interval is used.
#[derive(Clone, Debug)]
pub struct GeneralLawPair {
    pub mu: ViscosityLaw,
    pub mu_tilde: ViscosityLaw,
}

impl GeneralLawPair {
    /// `J_2 = μ - μ̃`.
    pub fn j2(&self, s: f64) -> f64 {
        self.mu.mu(s) - self.mu_tilde.mu(s)
    }

    /// `J_1 = μ̃'(s) s + ((1-d)/d) μ̃(s)`.
    pub fn j1(&self, s: f64, d: usize) -> f64 {
        let (m, dm) = self.mu_tilde.eval(s);
        dm * s + (1.0 - d as f64) / d as f64 * m
    }

    pub fn with_interval(&self, r: f64, big_r: f64) -> Self {
        Self { mu: self.mu.with_interval(r, big_r), mu_tilde: self.mu_tilde.with_interval(r, big_r) }
    }
}

#[derive(Clone, Debug)]
pub struct CgenReport {
    pub satisfied: bool,
    /// `c = inf J_2`.
    pub j2_min: f64,
    /// `c' = inf J_1`.
    pub j1_min: f64,
    /// Admissible `ξ` found by the log-grid scan on `(0, 1e3]`.
    pub xi_range: Option<(f64, f64)>,
    pub witness: Option<String>,
}

const XI_MIN: f64 = 1e-8;
const XI_MAX: f64 = 1e3;

/// Checks the generalized condition: `J_2 >= c > 0`, `J_1 >= c' > 0` and
/// the existence of `ξ > 0` with `max (J_2 - ξμ̃)^2 / (2 J_2) <= ξ c'`.
pub fn check_cgen(pair: &GeneralLawPair, d: usize) -> Result<CgenReport, ConstitutiveError> {
    pair.mu.check_interval()?;
    let (r, big_r) = pair.mu.interval();
    let (s2, c) = minimize(|s| pair.j2(s), r, big_r);
    let (s1, c1) = minimize(|s| pair.j1(s, d), r, big_r);
    if !(c > 0.0) {
        return Ok(CgenReport {
            satisfied: false,
            j2_min: c,
            j1_min: c1,
            xi_range: None,
            witness: Some(format!("μ - μ̃ = {c:.6e} <= 0 at s = {s2:.12}")),
        });
    }
    if !(c1 > 0.0) {
        return Ok(CgenReport {
            satisfied: false,
            j2_min: c,
            j1_min: c1,
            xi_range: None,
            witness: Some(format!("μ̃'s + ((1-d)/d)μ̃ = {c1:.6e} <= 0 at s = {s1:.12}")),
        });
    }
    let h = (big_r - r) / SAMPLES as f64;
    let pts: Vec<(f64, f64, f64)> = (0..=SAMPLES)
        .map(|i| {
            let s = if i == SAMPLES { big_r } else { r + h * i as f64 };
            (s, pair.j2(s), pair.mu_tilde.mu(s))
        })
        .collect();
    // margin g(ξ) = ξ c' - max_s h(s, ξ) is concave, so its positive set is an interval
    let margin = |xi: f64| -> f64 {
        let hf = |s: f64| {
            let j2 = pair.j2(s);
            let t = j2 - xi * pair.mu_tilde.mu(s);
            t * t / (2.0 * j2)
        };
        let mut bi = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, &(_, j2, mt)) in pts.iter().enumerate() {
            let t = j2 - xi * mt;
            let v = t * t / (2.0 * j2);
            if v > best {
                best = v;
                bi = i;
            }
        }
        let lo = pts[bi.saturating_sub(1)].0;
        let hi = pts[(bi + 1).min(SAMPLES)].0;
        let (_, m) = minimize_local(|s| -hf(s), lo, hi);
        xi * c1 - best.max(-m)
    };
    let scan = 3000;
    let xs: Vec<f64> = (0..=scan)
        .map(|i| XI_MIN * (XI_MAX / XI_MIN).powf(i as f64 / scan as f64))
        .collect();
    let gs: Vec<f64> = xs.iter().map(|&x| margin(x)).collect();
    let Some(first) = gs.iter().position(|&g| g >= 0.0) else {
        let (i, g) = gs.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, &g)| if g > a.1 { (i, g) } else { a });
        return Ok(CgenReport {
            satisfied: false,
            j2_min: c,
            j1_min: c1,
            xi_range: None,
            witness: Some(format!(
                "no admissible ξ in [{XI_MIN:e}, {XI_MAX:e}]; best margin {g:.6e} at ξ = {:.6e}",
                xs[i]
            )),
        });
    };
    let last = gs.iter().rposition(|&g| g >= 0.0).unwrap();
    let lower = if first == 0 { xs[0] } else { bisect(&margin, xs[first - 1], xs[first]) };
    let upper = if last == scan { xs[scan] } else { bisect(&margin, xs[last + 1], xs[last]) };
    Ok(CgenReport { satisfied: true, j2_min: c, j1_min: c1, xi_range: Some((lower, upper)), witness: None })
}

fn minimize_local(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut l, mut r) = (a, b);
    let mut x1 = r - g * (r - l);
    let mut x2 = l + g * (r - l);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            r = x2;
            x2 = x1;
            f2 = f1;
            x1 = r - g * (r - l);
            f1 = f(x1);
        } else {
            l = x1;
            x1 = x2;
            f1 = f2;
            x2 = l + g * (r - l);
            f2 = f(x2);
        }
    }
    if f1 < f2 { (x1, f1) } else { (x2, f2) }
}

/// Boundary between `bad` (margin < 0) and `good` (margin >= 0).
fn bisect(margin: &impl Fn(f64) -> f64, mut bad: f64, mut good: f64) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (bad + good);
        if mid == bad || mid == good {
            break;
        }
        if margin(mid) >= 0.0 {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Closed-form admissible `ξ` range at a single density value.
#[derive(Clone, Copy, Debug)]
pub struct XiInterval {
    pub lower: f64,
    pub upper: f64,
    /// `J_2(s) (μ̃(s) + c_1)`.
    pub xi0: f64,
    pub xi0_inside: bool,
    /// `(lower + upper) / 2`, always admissible.
    pub midpoint: f64,
}

/// Roots `ξ± = J_2(s)(μ̃(s) + c_1 ± sqrt(c_1 (2μ̃(s) + c_1))) / μ̃(s)^2` of
/// `(J_2 - ξμ̃)^2 = 2 J_2 c_1 ξ`. `Ok(None)` when the range is empty.
pub fn xi_interval(s: f64, c1: f64, pair: &GeneralLawPair) -> Result<Option<XiInterval>, ConstitutiveError> {
    if !(c1 > 0.0) {
        return Err(ConstitutiveError::InvalidLaw(format!("c1 must be positive, got {c1}")));
    }
    let mt = pair.mu_tilde.mu(s);
    let j2 = pair.j2(s);
    if mt == 0.0 {
        return Err(ConstitutiveError::Degenerate(format!("μ̃({s}) = 0")));
    }
    if !(j2 > 0.0) {
        return Ok(None);
    }
    let disc = c1 * (2.0 * mt + c1);
    if mt <= -0.5 * c1 || disc < 0.0 {
        return Ok(None);
    }
    let root = disc.sqrt();
    let lower = j2 * (mt + c1 - root) / (mt * mt);
    let upper = j2 * (mt + c1 + root) / (mt * mt);
    let xi0 = j2 * (mt + c1);
    Ok(Some(XiInterval {
        lower,
        upper,
        xi0,
        xi0_inside: xi0 >= lower && xi0 <= upper,
        midpoint: 0.5 * (lower + upper),
    }))
}

/// Largest `η` (up to `eta_max`) for which [`check_cgen`] holds on
/// `[s - η, s + η]`, found by bisection.
pub fn xi_neighbourhood(pair: &GeneralLawPair, s: f64, d: usize, eta_max: f64) -> Result<f64, ConstitutiveError> {
    let ok = |eta: f64| -> Result<bool, ConstitutiveError> {
        Ok(check_cgen(&pair.with_interval(s - eta, s + eta), d)?.satisfied)
    };
    let mut good = 0.0;
    let mut bad = eta_max.min(0.999 * s);
    if ok(bad)? {
        return Ok(bad);
    }
    let mut probe = bad * 1e-6;
    if !ok(probe)? {
        return Ok(0.0);
    }
    good = f64::max(good, probe);
    for _ in 0..40 {
        probe = 0.5 * (good + bad);
        if ok(probe)? {
            good = probe;
        } else {
            bad = probe;
        }
    }
    Ok(good)
}
