//! Exact truncated-Fock checks on a small lattice.

use serde::Serialize;

use crate::checks::fock::{self, ConvergenceRow, DeltaRow, OracleRow, OracleSetup};
use crate::checks::Check;
use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{Emitter, Manifest};

/// Samples for the one-step energy check.
pub const ENERGY_SAMPLES: usize = 10_000;
/// Noise seeds compared path by path against the exact evolution.
pub const ORACLE_SEEDS: u64 = 20;
pub const CUTOFF: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub manifest: Manifest,
    pub cutoff: usize,
    pub checks: Vec<Check>,
    pub delta_scaling: Vec<DeltaRow>,
    pub equivalence: Vec<OracleRow>,
    pub convergence: Vec<ConvergenceRow>,
    /// Relative residual of `[H, A] = -i dA/dt` on interior rows.
    pub time_translation_residual: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run(config: &RunConfig) -> Result<OracleReport> {
    let setup = OracleSetup::new(CUTOFF)?;
    let mut checks = fock::algebra(&setup)?;
    checks.push(fock::microcausality(&setup)?);
    checks.push(fock::smeared_double_commutator(&setup)?);
    let (delta, delta_scaling) = fock::delta_scaling()?;
    checks.push(delta);
    checks.extend(fock::energy_drift(&setup, ENERGY_SAMPLES, config.seed)?);
    let (eq, equivalence) = fock::oracle_equivalence(&setup, ORACLE_SEEDS)?;
    checks.push(eq);
    let (conv, convergence) = fock::truncation_convergence(&setup)?;
    checks.push(conv);
    checks.push(fock::coherent_cross_check(&setup)?);
    Ok(OracleReport {
        manifest: Manifest::new("oracle", config),
        cutoff: CUTOFF,
        checks,
        delta_scaling,
        equivalence,
        convergence,
        time_translation_residual: fock::time_translation_residual(&setup)?,
    })
}

pub fn emit(report: &OracleReport, out: &mut Emitter) -> Result<()> {
    out.json("oracle", report)?;
    out.csv("oracle_checks", &report.checks)?;
    out.csv("oracle_equivalence", &report.equivalence)
}
