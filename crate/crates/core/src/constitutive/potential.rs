//! The potential `φ` with `φ'(s) = μ'(s) / s`, so that `ρ∇φ(ρ) = ∇μ(ρ)`.

use std::sync::Arc;

use super::{ConstitutiveError, ViscosityLaw};

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss-Kronrod 7-15 panel: `(kronrod estimate, |kronrod - gauss|)`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, ConstitutiveError> {
    if a == b {
        return Ok(0.0);
    }
    let mut stack = vec![(a, b, 0usize)];
    let mut total = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, err) = gk15(&f, lo, hi);
        if !v.is_finite() {
            return Err(ConstitutiveError::Quadrature(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        if err <= tol * v.abs() || err <= 1e-300 || depth >= 50 {
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    Ok(total)
}

/// `φ(s) = ∫_{s0}^{s} μ'(σ)/σ dσ`, tabulated on a geometric grid and
/// evaluated by cubic Hermite interpolation with the exact derivative.
#[derive(Clone, Debug)]
pub struct PotentialLaw {
    law: ViscosityLaw,
    s0: f64,
    table: Arc<Table>,
}

#[derive(Debug)]
struct Table {
    log_lo: f64,
    inv_log_q: f64,
    nodes: Vec<f64>,
    phi: Vec<f64>,
    dphi: Vec<f64>,
}

const TABLE_NODES: usize = 1 << 14;

impl PotentialLaw {
    /// Reference point `s0 = 1` when it lies in `[r, R]`, otherwise `r`.
    pub fn new(law: &ViscosityLaw) -> Result<Self, ConstitutiveError> {
        let (r, big_r) = law.interval();
        let s0 = if r <= 1.0 && 1.0 <= big_r { 1.0 } else { r };
        Self::with_reference(law, s0)
    }

    pub fn with_reference(law: &ViscosityLaw, s0: f64) -> Result<Self, ConstitutiveError> {
        law.check_interval()?;
        let (r, big_r) = law.interval();
        let lo = 0.25 * r.min(s0);
        let hi = 4.0 * big_r.max(s0);
        let q = (hi / lo).powf(1.0 / (TABLE_NODES - 1) as f64);
        let nodes: Vec<f64> = (0..TABLE_NODES).map(|i| lo * q.powi(i as i32)).collect();
        let dphi: Vec<f64> = nodes.iter().map(|&s| law.mu_prime(s) / s).collect();
        let f = |s: f64| law.mu_prime(s) / s;
        let mut phi = vec![0.0; TABLE_NODES];
        for i in 1..TABLE_NODES {
            phi[i] = phi[i - 1] + integrate(f, nodes[i - 1], nodes[i], 1e-15)?;
        }
        let mut table = Table { log_lo: lo.ln(), inv_log_q: 1.0 / q.ln(), nodes, phi, dphi };
        let shift = table.eval(s0);
        for p in table.phi.iter_mut() {
            *p -= shift;
        }
        Ok(Self { law: law.clone(), s0, table: Arc::new(table) })
    }

    pub fn law(&self) -> &ViscosityLaw {
        &self.law
    }

    pub fn reference(&self) -> f64 {
        self.s0
    }

    #[inline]
    pub fn phi(&self, s: f64) -> f64 {
        let t = &self.table;
        if s >= t.nodes[0] && s <= t.nodes[TABLE_NODES - 1] {
            t.eval(s)
        } else {
            integrate(|x| self.law.mu_prime(x) / x, self.s0, s, 1e-15).unwrap_or(f64::NAN)
        }
    }

    #[inline]
    pub fn phi_prime(&self, s: f64) -> f64 {
        self.law.mu_prime(s) / s
    }
}

impl Table {
    #[inline]
    fn eval(&self, s: f64) -> f64 {
        let mut i = ((s.ln() - self.log_lo) * self.inv_log_q) as usize;
        i = i.min(TABLE_NODES - 2);
        if s < self.nodes[i] && i > 0 {
            i -= 1;
        } else if s > self.nodes[i + 1] && i + 2 < TABLE_NODES {
            i += 1;
        }
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let h = b - a;
        let t = (s - a) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.phi[i]
            + (t3 - 2.0 * t2 + t) * h * self.dphi[i]
            + (-2.0 * t3 + 3.0 * t2) * self.phi[i + 1]
            + (t3 - t2) * h * self.dphi[i + 1]
    }
}

/// Builds `φ` from `μ` (alias of [`PotentialLaw::new`]).
pub fn phi_from_mu(law: &ViscosityLaw) -> Result<PotentialLaw, ConstitutiveError> {
    PotentialLaw::new(law)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_of_smooth_functions() {
        let v = integrate(|x: f64| x.cos(), 0.0, 1.0, 1e-14).unwrap();
        assert!((v - 1f64.sin()).abs() < 1e-15);
        let v = integrate(|x: f64| 1.0 / x, 0.1, 10.0, 1e-14).unwrap();
        assert!((v - 100f64.ln()).abs() < 1e-13);
    }
}
