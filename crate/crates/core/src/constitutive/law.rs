//! Viscosity laws `μ(s)` with analytic derivatives.

use super::ConstitutiveError;

/// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(points: &[(f64, f64)]) -> Result<Self, ConstitutiveError> {
        if points.len() < 2 {
            return Err(ConstitutiveError::InvalidLaw("a table needs at least two points".into()));
        }
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ConstitutiveError::InvalidLaw("table abscissae must increase strictly".into()));
        }
        let n = x.len();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m = vec![0.0; n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            m[i] = if delta[i - 1] * delta[i] <= 0.0 { 0.0 } else { 0.5 * (delta[i - 1] + delta[i]) };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / delta[i];
            let b = m[i + 1] / delta[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[i] = t * a * delta[i];
                m[i + 1] = t * b * delta[i];
            }
        }
        Ok(Self { x, y, m })
    }

    /// Value and derivative; linear extrapolation outside the table.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let n = self.x.len();
        if s <= self.x[0] {
            return (self.y[0] + self.m[0] * (s - self.x[0]), self.m[0]);
        }
        if s >= self.x[n - 1] {
            return (self.y[n - 1] + self.m[n - 1] * (s - self.x[n - 1]), self.m[n - 1]);
        }
        let i = self.x.partition_point(|&xi| xi <= s) - 1;
        let h = self.x[i + 1] - self.x[i];
        let t = (s - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1];
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        let d = d00 * self.y[i] + d10 * self.m[i] + d01 * self.y[i + 1] + d11 * self.m[i + 1];
        (v, d)
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.x.iter().copied().zip(self.y.iter().copied()).collect()
    }
}

/// Functional form of a law, before the additive offset.
#[derive(Clone, Debug, PartialEq)]
pub enum LawKind {
    /// `coefficient * s^alpha`
    Power { coefficient: f64, alpha: f64 },
    /// `intercept + slope * s`
    Linear { intercept: f64, slope: f64 },
    /// `coefficient * ln s`
    Log { coefficient: f64 },
    Table(MonotoneCubic),
}

/// A viscosity law on the admissible density interval `[r, R]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ViscosityLaw {
    pub kind: LawKind,
    pub offset: f64,
    pub r: f64,
    pub big_r: f64,
    pub label: String,
}

impl ViscosityLaw {
    /// Builds a law without checking positivity or monotonicity.
    pub fn unchecked(kind: LawKind, offset: f64, r: f64, big_r: f64) -> Self {
        let label = match &kind {
            LawKind::Power { coefficient, alpha } => format!("{coefficient}*s^{alpha}"),
            LawKind::Linear { intercept, slope } => format!("{intercept}+{slope}*s"),
            LawKind::Log { coefficient } => format!("{coefficient}*ln(s)"),
            LawKind::Table(t) => format!("table[{}]", t.points().len()),
        };
        let label = if offset != 0.0 { format!("{offset}+{label}") } else { label };
        Self { kind, offset, r, big_r, label }
    }

    /// Builds a law and checks `μ >= c > 0`, `μ' >= 0` on `[r, R]`.
    pub fn new(kind: LawKind, offset: f64, r: f64, big_r: f64) -> Result<Self, ConstitutiveError> {
        let law = Self::unchecked(kind, offset, r, big_r);
        law.validate()?;
        Ok(law)
    }

    /// `μ(s) = s^alpha`.
    pub fn power(alpha: f64, r: f64, big_r: f64) -> Result<Self, ConstitutiveError> {
        Self::new(LawKind::Power { coefficient: 1.0, alpha }, 0.0, r, big_r)
    }

    pub fn with_interval(&self, r: f64, big_r: f64) -> Self {
        Self { r, big_r, ..self.clone() }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.r, self.big_r)
    }

    pub fn check_interval(&self) -> Result<(), ConstitutiveError> {
        if !(self.r > 0.0 && self.big_r > self.r && self.big_r.is_finite()) {
            return Err(ConstitutiveError::InvalidLaw(format!(
                "density interval must satisfy 0 < r < R, got [{}, {}]",
                self.r, self.big_r
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConstitutiveError> {
        self.check_interval()?;
        let n = 10_000;
        for i in 0..=n {
            let s = self.r + (self.big_r - self.r) * i as f64 / n as f64;
            let (m, dm) = self.eval(s);
            if !(m > 0.0) || !m.is_finite() {
                return Err(ConstitutiveError::InvalidLaw(format!(
                    "{}: viscosity must be positive, μ({s}) = {m}",
                    self.label
                )));
            }
            if dm < -1e-14 * m.abs().max(1.0) {
                return Err(ConstitutiveError::InvalidLaw(format!(
                    "{}: viscosity must be nondecreasing, μ'({s}) = {dm}",
                    self.label
                )));
            }
        }
        Ok(())
    }

    /// `(μ(s), μ'(s))`.
    #[inline]
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let (v, d) = match &self.kind {
            LawKind::Power { coefficient, alpha } => {
                if *alpha == 0.0 {
                    (*coefficient, 0.0)
                } else if *alpha == 1.0 {
                    (coefficient * s, *coefficient)
                } else {
                    let p = s.powf(alpha - 1.0);
                    (coefficient * p * s, coefficient * alpha * p)
                }
            }
            LawKind::Linear { intercept, slope } => (intercept + slope * s, *slope),
            LawKind::Log { coefficient } => (coefficient * s.ln(), coefficient / s),
            LawKind::Table(t) => t.eval(s),
        };
        (v + self.offset, d)
    }

    #[inline]
    pub fn mu(&self, s: f64) -> f64 {
        self.eval(s).0
    }

    #[inline]
    pub fn mu_prime(&self, s: f64) -> f64 {
        self.eval(s).1
    }
}
