//! Run manifest written before any computation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use kef_core::solver::SolverConfig;

use crate::config::{CaseConfig, Resolved};
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SolverSummary {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub dealias_fraction: f64,
    pub kappa: f64,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    pub scheme: String,
    pub mode: String,
    pub epsilon: f64,
    pub mollify_width: f64,
    pub capillarity: f64,
    pub snapshots: usize,
    pub diagnostics_every: usize,
    pub pressure_tol: f64,
}

impl SolverSummary {
    pub fn new(c: &SolverConfig) -> Self {
        Self {
            dim: c.grid.dim(),
            n: c.grid.n(),
            length: c.grid.length(),
            dealias_fraction: c.grid.dealias_fraction(),
            kappa: c.kappa,
            dt: c.dt,
            t_end: c.t_end,
            steps: c.num_steps(),
            scheme: format!("{:?}", c.scheme),
            mode: format!("{:?}", c.mode),
            epsilon: c.epsilon,
            mollify_width: c.mollify_width,
            capillarity: c.capillarity,
            snapshots: c.snapshots,
            diagnostics_every: c.diagnostics_every,
            pressure_tol: c.pressure_tol,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Admissibility {
    pub satisfied: bool,
    pub infimum: f64,
    pub argmin: f64,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub config_sha256: Option<String>,
    /// Configuration with the seed actually used.
    pub config: Option<CaseConfig>,
    pub solver: Option<SolverSummary>,
    pub law: Option<String>,
    pub admissibility: Option<Admissibility>,
    pub output_dir: String,
    pub seed: Option<u64>,
    pub code_version: String,
    pub workers: usize,
    pub dry_run: bool,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn bare(command: &str, out: &Path, seed: Option<u64>, workers: usize, dry_run: bool) -> Self {
        Self {
            command: command.to_string(),
            config_path: None,
            config_sha256: None,
            config: None,
            solver: None,
            law: None,
            admissibility: None,
            output_dir: out.display().to_string(),
            seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            workers,
            dry_run,
        }
    }

    pub fn for_case(
        command: &str,
        config_path: &Path,
        resolved: &Resolved,
        out: &Path,
        workers: usize,
        dry_run: bool,
    ) -> Result<Self, CliError> {
        let bytes = std::fs::read(config_path)?;
        let a = &resolved.admissibility;
        Ok(Self {
            config_path: Some(config_path.display().to_string()),
            config_sha256: Some(sha256_hex(&bytes)),
            config: Some(resolved.raw.clone()),
            solver: Some(SolverSummary::new(&resolved.solver)),
            law: Some(resolved.law.label.clone()),
            admissibility: Some(Admissibility {
                satisfied: a.satisfied,
                infimum: a.infimum,
                argmin: a.argmin,
                witness: a.witness.clone(),
            }),
            ..Self::bare(command, out, resolved.seed(), workers, dry_run)
        })
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}
