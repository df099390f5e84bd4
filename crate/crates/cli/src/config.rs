//! Strict TOML run configuration. Physics parameters have no defaults.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use kef_core::applications::{linear_coefficient, GhostConfig, MixtureConfig, PowerCoefficient};
use kef_core::constitutive::{check_important, ConditionReport, LawKind, MonotoneCubic, ViscosityLaw};
use kef_core::fields::Grid;
use kef_core::solver::{AuxInit, Mode, Model, MonitorTolerances, RandomData, Scheme, SolverConfig};

use crate::CliError;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub grid: GridSpec,
    pub physics: PhysicsSpec,
    pub law: LawSpec,
    pub time: TimeSpec,
    pub initial: InitialSpec,
    pub ghost: Option<GhostSpec>,
    pub mixture: Option<MixtureSpec>,
    pub sweep: Option<SweepSpec>,
    pub monitors: Option<MonitorSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    /// Box length; `2π` when omitted.
    pub length: Option<f64>,
    pub dealias_fraction: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    Augmented,
    Reduced,
    IncompressibleNs,
    KsLimit,
    Ghost,
    Mixture,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSpec {
    pub kappa: f64,
    pub mode: ModeSpec,
    pub epsilon: f64,
    pub mollify_width: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    Power {
        coefficient: f64,
        alpha: f64,
        offset: Option<f64>,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
    Linear {
        intercept: f64,
        slope: f64,
        offset: Option<f64>,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
    Log {
        coefficient: f64,
        offset: Option<f64>,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
    /// `table` holds `[ρ, μ]` nodes of a monotone cubic interpolant.
    Table {
        #[serde(rename = "table")]
        points: Vec<[f64; 2]>,
        offset: Option<f64>,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
    /// Viscosity induced by the `[mixture]` diffusion coefficient.
    Mixture {
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    Imex1,
    Imex2,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: SchemeSpec,
    pub snapshots: Option<usize>,
    pub diagnostics_every: Option<usize>,
    pub pressure_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AuxSpec {
    Consistent,
    Perturbed,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Random {
        seed: Option<u64>,
        modes: Option<usize>,
        rho_mean: f64,
        rho_amplitude: f64,
        velocity_rms: f64,
        aux: Option<AuxSpec>,
        aux_eta: Option<f64>,
    },
    TaylorGreen {
        rho: f64,
        amplitude: f64,
        aux: Option<AuxSpec>,
        aux_eta: Option<f64>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GhostSpec {
    pub capillarity: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    /// `c̃₀(ρ) = coefficient ρ^exponent`.
    pub c0_tilde_coefficient: f64,
    pub c0_tilde_exponent: f64,
    /// Initial `Y₁ = mean + amplitude sin x cos y`.
    pub y1_mean: f64,
    pub y1_amplitude: f64,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub mollify_width: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kappas: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MonitorSpec {
    pub entropy: Option<f64>,
    pub bounds: Option<f64>,
    pub divergence: Option<f64>,
    pub mass: Option<f64>,
}

/// A parsed configuration with its derived solver objects.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub raw: CaseConfig,
    pub grid: Grid,
    pub solver: SolverConfig,
    pub model: Arc<Model>,
    pub law: ViscosityLaw,
    pub admissibility: ConditionReport,
    pub mixture: Option<MixtureConfig>,
    pub tolerances: MonitorTolerances,
}

impl Resolved {
    pub fn seed(&self) -> Option<u64> {
        match &self.raw.initial {
            InitialSpec::Random { seed, .. } => Some(seed.unwrap_or(0)),
            InitialSpec::TaylorGreen { .. } => None,
        }
    }

    pub fn random_data(&self) -> Option<RandomData> {
        match &self.raw.initial {
            InitialSpec::Random { seed, modes, rho_mean, rho_amplitude, velocity_rms, .. } => Some(RandomData {
                seed: seed.unwrap_or(0),
                modes: modes.unwrap_or(2),
                rho_mean: *rho_mean,
                rho_amplitude: *rho_amplitude,
                velocity_rms: *velocity_rms,
            }),
            InitialSpec::TaylorGreen { .. } => None,
        }
    }

    pub fn aux(&self) -> AuxInit {
        if self.solver.mode != Mode::Augmented {
            return AuxInit::None;
        }
        let (aux, eta) = match &self.raw.initial {
            InitialSpec::Random { aux, aux_eta, .. } | InitialSpec::TaylorGreen { aux, aux_eta, .. } => (aux, aux_eta),
        };
        match aux {
            Some(AuxSpec::Perturbed) => AuxInit::Perturbed(eta.unwrap_or(0.0)),
            _ => AuxInit::Consistent,
        }
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<Resolved, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_str(&text)
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse_str(text: &str) -> Result<Resolved, CliError> {
    if text.trim().is_empty() {
        return Err(bad("empty configuration"));
    }
    let raw: CaseConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
    resolve(raw)
}

pub fn resolve(mut raw: CaseConfig) -> Result<Resolved, CliError> {
    let g = &raw.grid;
    let grid = Grid::new(
        g.dim,
        g.n,
        g.length.unwrap_or(2.0 * std::f64::consts::PI),
        g.dealias_fraction.unwrap_or(2.0 / 3.0),
    )
    .map_err(|e| bad(e.to_string()))?;
    let p = &raw.physics;
    if !(0.0..=1.0).contains(&p.kappa) {
        return Err(bad(format!("kappa = {} is outside [0, 1]", p.kappa)));
    }
    if p.epsilon < 0.0 || p.mollify_width < 0.0 {
        return Err(bad("epsilon and mollify_width must be nonnegative"));
    }
    if let InitialSpec::Random { seed, .. } = &mut raw.initial {
        seed.get_or_insert(0);
    }

    let mut mixture = None;
    let law = match (&raw.law, p.mode) {
        (LawSpec::Mixture { r, big_r }, ModeSpec::Mixture) => {
            let m = raw.mixture.as_ref().ok_or_else(|| bad("mode = \"mixture\" needs a [mixture] table"))?;
            let mut cfg = MixtureConfig::new(
                PowerCoefficient { coefficient: m.c0_tilde_coefficient, exponent: m.c0_tilde_exponent },
                p.kappa,
            );
            cfg.m1 = m.m1.unwrap_or(cfg.m1);
            cfg.m2 = m.m2.unwrap_or(cfg.m2);
            cfg.mollify_width = m.mollify_width;
            let law = cfg.viscosity_law(*r, *big_r);
            law.validate().map_err(|e| bad(e.to_string()))?;
            mixture = Some(cfg);
            law
        }
        (LawSpec::Mixture { .. }, _) => return Err(bad("law kind \"mixture\" requires mode = \"mixture\"")),
        (_, ModeSpec::Mixture) => return Err(bad("mode = \"mixture\" requires law kind \"mixture\"")),
        (spec, _) => build_law(spec)?,
    };
    if p.mode == ModeSpec::Ghost {
        linear_coefficient(&law).map_err(|e| bad(e.to_string()))?;
        let gh = raw.ghost.as_ref().ok_or_else(|| bad("mode = \"ghost\" needs a [ghost] table"))?;
        let gc = GhostConfig { capillarity: gh.capillarity, kappa: p.kappa, mu_bar: linear_coefficient(&law).unwrap() };
        gc.validate().map_err(|e| bad(e.to_string()))?;
    } else if raw.ghost.is_some() {
        return Err(bad("[ghost] is only valid with mode = \"ghost\""));
    }
    if p.mode != ModeSpec::Mixture && raw.mixture.is_some() {
        return Err(bad("[mixture] is only valid with mode = \"mixture\""));
    }
    match (p.mode, p.kappa) {
        (ModeSpec::IncompressibleNs, k) if k != 0.0 => return Err(bad("mode incompressible_ns needs kappa = 0")),
        (ModeSpec::KsLimit, k) if k != 1.0 => return Err(bad("mode ks_limit needs kappa = 1")),
        _ => {}
    }

    let admissibility = check_important(&law, grid.dim()).map_err(|e| bad(e.to_string()))?;
    if admissibility.satisfied {
        log::info!("admissibility on [{}, {}] holds: infimum {:.6e}", law.r, law.big_r, admissibility.infimum);
    } else {
        log::warn!("admissibility fails: {}", admissibility.witness.as_deref().unwrap_or(""));
    }
    let requires = !matches!(p.mode, ModeSpec::IncompressibleNs | ModeSpec::KsLimit);
    if requires && !admissibility.satisfied {
        return Err(CliError::Admissibility(admissibility.witness.clone().unwrap_or_default()));
    }

    let model = Arc::new(Model::new(law.clone()).map_err(|e| bad(e.to_string()))?);
    let t = &raw.time;
    let mut solver = SolverConfig::new(grid, p.kappa, t.dt, t.t_end);
    solver.scheme = match t.scheme {
        SchemeSpec::Imex1 => Scheme::Imex1,
        SchemeSpec::Imex2 => Scheme::Imex2,
    };
    solver.mode = match p.mode {
        ModeSpec::Augmented => Mode::Augmented,
        ModeSpec::IncompressibleNs => Mode::IncompressibleNs,
        ModeSpec::KsLimit => Mode::KsLimit,
        ModeSpec::Reduced | ModeSpec::Ghost | ModeSpec::Mixture => Mode::Reduced,
    };
    solver.epsilon = p.epsilon;
    solver.mollify_width = p.mollify_width;
    solver.capillarity = raw.ghost.as_ref().map(|g| g.capillarity).unwrap_or(0.0);
    if let Some(s) = t.snapshots {
        solver.snapshots = s;
    }
    if let Some(e) = t.diagnostics_every {
        solver.diagnostics_every = e;
    }
    if let Some(tol) = t.pressure_tol {
        solver.pressure_tol = tol;
    }
    solver.validate().map_err(|e| bad(e.to_string()))?;

    let mut tolerances = MonitorTolerances::default();
    if let Some(m) = &raw.monitors {
        tolerances.entropy = m.entropy.unwrap_or(tolerances.entropy);
        tolerances.bounds = m.bounds.unwrap_or(tolerances.bounds);
        tolerances.divergence = m.divergence.unwrap_or(tolerances.divergence);
        tolerances.mass = m.mass.unwrap_or(tolerances.mass);
    }
    Ok(Resolved { raw, grid, solver, model, law, admissibility, mixture, tolerances })
}

fn build_law(spec: &LawSpec) -> Result<ViscosityLaw, CliError> {
    let (kind, offset, r, big_r) = match spec {
        LawSpec::Power { coefficient, alpha, offset, r, big_r } => {
            (LawKind::Power { coefficient: *coefficient, alpha: *alpha }, offset, r, big_r)
        }
        LawSpec::Linear { intercept, slope, offset, r, big_r } => {
            (LawKind::Linear { intercept: *intercept, slope: *slope }, offset, r, big_r)
        }
        LawSpec::Log { coefficient, offset, r, big_r } => (LawKind::Log { coefficient: *coefficient }, offset, r, big_r),
        LawSpec::Table { points, offset, r, big_r } => {
            let pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
            (LawKind::Table(MonotoneCubic::new(&pts).map_err(|e| bad(e.to_string()))?), offset, r, big_r)
        }
        LawSpec::Mixture { .. } => unreachable!("handled by the caller"),
    };
    ViscosityLaw::new(kind, offset.unwrap_or(0.0), *r, *big_r).map_err(|e| bad(e.to_string()))
}
