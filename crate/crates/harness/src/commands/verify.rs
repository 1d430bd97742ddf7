//! The full property suite.

use std::time::Instant;

use serde::Serialize;

use pointer_collapse_core::dynamics::Integrator;

use crate::checks::dynamics::{self as dy, BeableRow};
use crate::checks::Check;
use crate::commands::oracle;
use crate::config::RunConfig;
use crate::error::Result;
use crate::experiment::Experiment;
use crate::output::{Emitter, Manifest};

/// Paths for the martingale and estimator checks.
pub const MARTINGALE_PATHS: usize = 10_000;
/// Paths for each negative control.
pub const CONTROL_PATHS: usize = 2_000;
/// Random foliations compared against the standard one.
pub const RANDOM_FOLIATIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifySizes {
    pub martingale_paths: usize,
    pub control_paths: usize,
    pub beable_paths: usize,
}

impl VerifySizes {
    pub fn full(config: &RunConfig) -> Result<Self> {
        Ok(Self {
            martingale_paths: MARTINGALE_PATHS,
            control_paths: CONTROL_PATHS,
            beable_paths: config.experiment()?.paths,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub manifest: Manifest,
    pub sizes: VerifySizes,
    pub checks: Vec<Check>,
    /// Beable window rows `[t0, t1)`.
    pub beable_window: [usize; 2],
    pub beable: Vec<BeableRow>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Beable window: the second half of the lattice.
pub fn beable_window(steps: usize) -> (usize, usize) {
    (steps / 2, steps)
}

pub fn run(config: &RunConfig, sizes: VerifySizes, workers: usize) -> Result<VerifyReport> {
    let start = Instant::now();
    let exp = Experiment::build(config)?;
    let mild = Experiment::build(&dy::mild_config(config))?;
    let mut checks = Vec::new();

    let q = dy::sample(&mild, Integrator::Linear, sizes.martingale_paths, workers)?;
    let p = dy::sample(&mild, Integrator::Nonlinear, sizes.martingale_paths, workers)?;
    checks.push(dy::q_martingale(&q));
    checks.push(dy::p_martingale(&p));
    checks.push(dy::estimator_equivalence(&q, &p));
    checks.push(dy::sigma_f_insensitivity(&q));
    checks.push(dy::variance_supermartingale(&p));
    drop((q, p));
    checks.push(dy::tampered_noise(&mild, sizes.control_paths, workers)?);
    checks.extend(dy::mutations(&mild, sizes.control_paths, workers)?);

    checks.push(dy::foliation_independence(&exp, RANDOM_FOLIATIONS)?);
    checks.push(dy::noise_identity(&mild)?);
    checks.extend(dy::integrator_pairing(&mild)?);
    checks.push(dy::gaussian_step(&exp)?);
    checks.extend(dy::kernel_checks(&exp)?);

    let (t0, t1) = beable_window(exp.spec.steps());
    let beable = dy::beable_paths(&exp, sizes.beable_paths, t0, t1, workers)?;
    checks.extend(dy::beable_recovery(&exp, &beable, t0, t1)?);
    checks.push(dy::beable_noise_only(&exp, sizes.beable_paths, t0, t1, workers)?);

    checks.extend(oracle::run(config)?.checks);
    Ok(VerifyReport {
        manifest: Manifest::new("verify", config),
        sizes,
        checks,
        beable_window: [t0, t1],
        beable,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn emit(report: &VerifyReport, out: &mut Emitter) -> Result<()> {
    out.csv("verify", &report.checks)?;
    out.json("verify", report)
}
