//! Outcome frequencies under both integrators.

use serde::Serialize;

use pointer_collapse_core::dynamics::Integrator;
use pointer_collapse_core::path::{PathRecord, RunOptions};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::Experiment;
use crate::mc::map_paths;
use crate::output::{Emitter, Manifest};
use crate::stats::{chi_square_gof, compare_probability_vectors, Frequency};

/// Linear paths use noise streams from this index up, so they are
/// independent of the nonlinear ones.
pub const LINEAR_STREAM_OFFSET: usize = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeRow {
    pub branch: usize,
    pub probability: f64,
    pub nonlinear: f64,
    pub sigma: f64,
    pub z: f64,
    /// Reweighted linear estimate.
    pub linear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BornReport {
    pub manifest: Manifest,
    pub paths: usize,
    pub outcomes: Vec<OutcomeRow>,
    /// Goodness of fit of the nonlinear counts against `|c_i|^2`.
    pub chi_square: f64,
    pub chi_square_p: f64,
    /// Wald comparison of the two estimators.
    pub estimator_statistic: f64,
    pub estimator_p: f64,
    /// Mean path weight of the linear paths.
    pub mean_weight: f64,
}

impl BornReport {
    /// Every frequency within three binomial sigmas and estimators agreeing
    /// at the one percent level.
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.z.abs() <= 3.0) && self.estimator_p > 0.01
    }
}

/// Branch with the largest weight on the row-`sigma_f` surface, with the path
/// weight there.
pub fn outcome_at(rec: &PathRecord, sigma_f: usize, steps: usize) -> Result<(usize, f64)> {
    if sigma_f == steps {
        return Ok((rec.leading, rec.final_log_norm2.exp()));
    }
    let level = rec
        .levels
        .iter()
        .find(|l| l.t == sigma_f)
        .ok_or_else(|| HarnessError::Usage(format!("the foliation never reaches the flat surface at row {sigma_f}")))?;
    let lead = level.weights.iter().enumerate().fold(0, |b, (i, w)| if *w > level.weights[b] { i } else { b });
    Ok((lead, level.log_norm2.exp()))
}

/// Outcomes of `n` nonlinear paths. On the top surface a path's outcome is
/// the branch that collapsed, so it stops there; otherwise it is the leading
/// branch on the row-`sigma_f` surface.
pub fn nonlinear_outcomes(exp: &Experiment, n: usize, workers: usize) -> Result<Vec<usize>> {
    let steps = exp.spec.steps();
    let top = exp.sigma_f == steps;
    let opts = RunOptions { record_levels: !top, stop_at_collapse: top, ..Default::default() };
    let nl = exp.with_integrator(Integrator::Nonlinear);
    map_paths(workers, n, |p| {
        let rec = nl.run(p, &opts)?;
        match rec.outcome {
            Some(o) if top => Ok(o),
            _ => Ok(outcome_at(&rec, exp.sigma_f, steps)?.0),
        }
    })
}

/// Outcome counts per branch.
pub fn counts(outcomes: &[usize], k: usize) -> Vec<usize> {
    (0..k).map(|i| outcomes.iter().filter(|o| **o == i).count()).collect()
}

pub fn run(config: &RunConfig, workers: usize) -> Result<BornReport> {
    let exp = Experiment::build(config)?;
    let n = config.experiment()?.paths;
    if n < 2 {
        return Err(HarnessError::Usage("need at least two paths".into()));
    }
    let k = exp.profiles.len();
    let opts = RunOptions { record_levels: exp.sigma_f < exp.spec.steps(), ..Default::default() };
    let steps = exp.spec.steps();

    let nl_out = nonlinear_outcomes(&exp, n, workers)?;
    let lin = exp.with_integrator(Integrator::Linear);
    let reweight = lin.params.terms.measure_change;
    let lin_out = map_paths(workers, n, |p| {
        let (o, w) = outcome_at(&lin.run(p + LINEAR_STREAM_OFFSET, &opts)?, exp.sigma_f, steps)?;
        Ok((o, if reweight { w } else { 1.0 }))
    })?;

    let counts = counts(&nl_out, k);
    let probs: Vec<f64> = exp.amplitudes.iter().map(|c| c.norm_sqr()).collect();
    let (chi_square, chi_square_p) = chi_square_gof(&counts, &probs);
    let a: Vec<Vec<f64>> = nl_out.iter().map(|&o| (0..k).map(|i| if i == o { 1.0 } else { 0.0 }).collect()).collect();
    let b: Vec<Vec<f64>> =
        lin_out.iter().map(|&(o, w)| (0..k).map(|i| if i == o { w } else { 0.0 }).collect()).collect();
    let (estimator_statistic, estimator_p) = compare_probability_vectors(&a, &b);
    let outcomes = (0..k)
        .map(|i| {
            let f = Frequency::new(counts[i], n, probs[i]);
            OutcomeRow {
                branch: i,
                probability: probs[i],
                nonlinear: f.observed,
                sigma: f.sigma,
                z: f.z,
                linear: b.iter().map(|r| r[i]).sum::<f64>() / n as f64,
            }
        })
        .collect();
    Ok(BornReport {
        manifest: Manifest::new("born", config),
        paths: n,
        outcomes,
        chi_square,
        chi_square_p,
        estimator_statistic,
        estimator_p,
        mean_weight: lin_out.iter().map(|o| o.1).sum::<f64>() / n as f64,
    })
}

pub fn emit(report: &BornReport, out: &mut Emitter) -> Result<()> {
    out.csv("born", &report.outcomes)?;
    out.json("born", report)
}
