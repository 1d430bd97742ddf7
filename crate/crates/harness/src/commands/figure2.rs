//! Decay of the expected spatially integrated number variance, with the
//! collapse-time distribution and outcome frequencies of the same paths.

use serde::Serialize;

use pointer_collapse_core::dynamics::{collapse_time_estimate, Integrator};
use pointer_collapse_core::path::RunOptions;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::Experiment;
use crate::mc::map_paths;
use crate::output::{Emitter, LinePlot, Manifest, Series};
use crate::stats::{median, Estimate, Frequency};

/// Collapse times counted as inside the expected band.
pub const BAND: [f64; 2] = [1e-4, 1e-3];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub x0: f64,
    #[serde(rename = "meanVar")]
    pub mean_var: f64,
    pub stderr: f64,
    #[serde(rename = "examplePathVar")]
    pub example_path_var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRow {
    pub path: usize,
    pub outcome: Option<usize>,
    pub collapse_time: Option<f64>,
    pub leading: usize,
    pub leading_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseSummary {
    pub collapsed: usize,
    pub band: [f64; 2],
    /// Fraction of all paths whose collapse time lies in `band`.
    pub in_band_fraction: f64,
    /// Median collapse time, counting uncollapsed paths as infinite.
    pub median: f64,
    /// Variance-based estimate on the initial state.
    pub tau_formula: f64,
    /// `1 / (lambda^2 V J^4)` when it applies.
    pub tau_closed_form: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure2Report {
    pub manifest: Manifest,
    pub paths: usize,
    pub initial_var: f64,
    pub final_var: Estimate,
    /// Final mean over initial value.
    pub final_ratio: f64,
    /// No level exceeds its predecessor by more than one standard error.
    pub monotone: bool,
    pub collapse: CollapseSummary,
    pub born: Vec<Frequency>,
    pub curve: Vec<CurveRow>,
    pub path_table: Vec<PathRow>,
}

impl Figure2Report {
    pub fn passed(&self) -> bool {
        self.monotone && self.final_ratio < 0.01 && self.collapse.in_band_fraction >= 0.9
    }
}

pub fn run(config: &RunConfig, workers: usize) -> Result<Figure2Report> {
    let exp = Experiment::build(config)?;
    if exp.profiles.len() != 2 {
        return Err(HarnessError::Usage("figure2 needs exactly two branches".into()));
    }
    let exp = exp.with_integrator(Integrator::Nonlinear);
    let n = config.experiment()?.paths;
    if n == 0 {
        return Err(HarnessError::Usage("need at least one path".into()));
    }
    let opts = RunOptions { record_levels: true, ..Default::default() };
    let records = map_paths(workers, n, |p| exp.run(p, &opts))?;

    let levels = records[0].levels.len();
    if records.iter().any(|r| r.levels.len() != levels) || levels == 0 {
        return Err(HarnessError::Usage("figure2 needs a foliation through every constant-time surface".into()));
    }
    let mut curve = Vec::with_capacity(levels);
    for k in 0..levels {
        let v: Vec<f64> = records.iter().map(|r| r.levels[k].var_integral).collect();
        let e = Estimate::of(&v);
        curve.push(CurveRow {
            x0: exp.time_of(records[0].levels[k].t),
            mean_var: e.mean,
            stderr: if n > 1 { e.se } else { 0.0 },
            example_path_var: v[0],
        });
    }
    let initial_var = curve[0].mean_var;
    let last: Vec<f64> = records.iter().map(|r| r.levels[levels - 1].var_integral).collect();
    let final_var = Estimate::of(&last);
    let monotone = curve.windows(2).all(|w| w[1].mean_var <= w[0].mean_var + w[1].stderr);

    let times: Vec<f64> = records.iter().map(|r| r.collapse_time.unwrap_or(f64::INFINITY)).collect();
    let in_band = times.iter().filter(|t| **t >= BAND[0] && **t <= BAND[1]).count();
    let st0 = exp.initial_state()?;
    let tau = collapse_time_estimate(&st0, &exp.spec, 0, exp.params.lambda)?;
    let collapse = CollapseSummary {
        collapsed: records.iter().filter(|r| r.outcome.is_some()).count(),
        band: BAND,
        in_band_fraction: in_band as f64 / n as f64,
        median: median(&times),
        tau_formula: tau.tau,
        tau_closed_form: tau.closed_form,
    };
    let born = (0..2)
        .map(|i| {
            let k = records.iter().filter(|r| r.outcome.unwrap_or(r.leading) == i).count();
            Frequency::new(k, n, exp.amplitudes[i].norm_sqr())
        })
        .collect();
    let path_table = records
        .iter()
        .enumerate()
        .map(|(p, r)| PathRow {
            path: p,
            outcome: r.outcome,
            collapse_time: r.collapse_time,
            leading: r.leading,
            leading_weight: r.final_weights[r.leading],
        })
        .collect();
    Ok(Figure2Report {
        manifest: Manifest::new("figure2", config),
        paths: n,
        initial_var,
        final_ratio: final_var.mean / initial_var,
        final_var,
        monotone,
        collapse,
        born,
        curve,
        path_table,
    })
}

pub fn emit(report: &Figure2Report, out: &mut Emitter) -> Result<()> {
    out.csv("figure2", &report.curve)?;
    out.csv("figure2_paths", &report.path_table)?;
    out.json("figure2", report)?;
    let plot = LinePlot {
        title: format!("Integrated number variance, {} paths", report.paths),
        x_label: "x0".into(),
        y_label: "sum Var[N] dx".into(),
        series: vec![
            Series {
                label: "path 0".into(),
                points: report.curve.iter().map(|r| (r.x0, r.example_path_var)).collect(),
                colour: "#1f77b4",
                width: 1.0,
            },
            Series {
                label: "mean".into(),
                points: report.curve.iter().map(|r| (r.x0, r.mean_var)).collect(),
                colour: "black",
                width: 2.0,
            },
        ],
    };
    out.svg("figure2", &plot)
}
