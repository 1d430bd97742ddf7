//! Noise region integrals and past-light-cone energy density.

use serde::Serialize;

use pointer_collapse_core::beable::{beable_t00, run_plc_mode};
use pointer_collapse_core::dynamics::Integrator;
use pointer_collapse_core::path::{Region, RunOptions};
use pointer_collapse_core::{Cell, LatticeSpec};

use crate::config::{KernelModeConfig, RunConfig};
use crate::error::{HarnessError, Result};
use crate::experiment::Experiment;
use crate::mc::map_paths;
use crate::output::{Emitter, Manifest};
use crate::stats::Estimate;

/// Rectangle in coordinates: `x1` in `[x_lo, x_hi)`, `x0` in `[t_lo, t_hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoordRegion {
    pub x_lo: f64,
    pub x_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl std::str::FromStr for CoordRegion {
    type Err = HarnessError;

    /// `"x_lo,x_hi,t_lo,t_hi"`.
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| HarnessError::Usage(format!("region {s:?}: {e}")))?;
        match v[..] {
            [x_lo, x_hi, t_lo, t_hi] => Ok(Self { x_lo, x_hi, t_lo, t_hi }),
            _ => Err(HarnessError::Usage(format!("region {s:?} needs four numbers x_lo,x_hi,t_lo,t_hi"))),
        }
    }
}

impl CoordRegion {
    /// Cells whose centres (sites) and start times (rows) fall inside.
    pub fn cells(&self, spec: &LatticeSpec) -> Result<Region> {
        let lo = spec.x1(0) - 0.5 * spec.dx();
        let hi = spec.x1(spec.sites() - 1) + 0.5 * spec.dx();
        let top = spec.x0(spec.steps());
        if !(self.x_lo < self.x_hi && self.t_lo < self.t_hi) {
            return Err(HarnessError::Usage("region bounds must be increasing".into()));
        }
        if self.x_lo < lo || self.x_hi > hi || self.t_lo < 0.0 || self.t_hi > top {
            return Err(HarnessError::Usage(format!(
                "region [{}, {}) x [{}, {}) leaves the lattice [{lo}, {hi}) x [0, {top})",
                self.x_lo, self.x_hi, self.t_lo, self.t_hi
            )));
        }
        let sites: Vec<usize> =
            (0..spec.sites()).filter(|&i| spec.x1(i) >= self.x_lo && spec.x1(i) < self.x_hi).collect();
        let rows: Vec<usize> =
            (0..spec.steps()).filter(|&t| spec.x0(t) >= self.t_lo && spec.x0(t) < self.t_hi).collect();
        match (sites.first(), sites.last(), rows.first(), rows.last()) {
            (Some(&i0), Some(&i1), Some(&t0), Some(&t1)) => Ok(Region { i0, i1: i1 + 1, t0, t1: t1 + 1 }),
            _ => Err(HarnessError::Usage("region contains no cells".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeablePathRow {
    pub path: usize,
    pub outcome: Option<usize>,
    /// `sum dW` over the region.
    pub w: f64,
    /// `sum dB`.
    pub b: f64,
    /// `sum 2 lambda <N> dw`.
    pub signal: f64,
    /// `W / (2 lambda vol)`: the recovered `N` image.
    pub recovered_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchImage {
    pub branch: usize,
    /// Mean of `N_i` over the region.
    pub mean_n: f64,
    /// Paths whose outcome is this branch.
    pub paths: usize,
    /// Mean recovered `N` over those paths, with its standard error.
    pub recovered: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct T00Row {
    pub x1: f64,
    pub x0: f64,
    pub t00: f64,
}

/// Path 0 in the self-consistent kernel mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlcSummary {
    /// Mean of the realized `N_i` over the region, per branch.
    pub region_mean_n: Vec<f64>,
    pub t00_min: f64,
    pub t00_max: f64,
    pub final_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeableReport {
    pub manifest: Manifest,
    pub region: CoordRegion,
    pub cells: [usize; 4],
    pub volume: f64,
    pub paths: usize,
    pub w: Estimate,
    pub signal: Estimate,
    /// `Var(B) / vol`, one for Brownian noise.
    pub noise_variance_ratio: Estimate,
    pub branches: Vec<BranchImage>,
    pub t00: Vec<T00Row>,
    pub plc: Option<PlcSummary>,
    pub path_table: Vec<BeablePathRow>,
}

pub fn run(config: &RunConfig, region: CoordRegion, workers: usize) -> Result<BeableReport> {
    let mut base = config.clone();
    base.kernel.mode = KernelModeConfig::Static;
    let exp = Experiment::build(&base)?.with_integrator(Integrator::Nonlinear);
    let r = region.cells(&exp.spec)?;
    let n = config.experiment()?.paths;
    if n < 2 {
        return Err(HarnessError::Usage("need at least two paths".into()));
    }
    let vol = r.cells() as f64 * exp.spec.cell_volume();
    let lambda = exp.params.lambda;
    let opts = RunOptions { regions: vec![r], ..Default::default() };
    let rows = map_paths(workers, n, |p| {
        let rec = exp.run(p, &opts)?;
        let s = rec.regions[0];
        Ok(BeablePathRow {
            path: p,
            outcome: rec.outcome,
            w: s.w,
            b: s.b,
            signal: s.signal,
            recovered_n: if lambda > 0.0 { s.w / (2.0 * lambda * vol) } else { f64::NAN },
        })
    })?;
    let col = |f: fn(&BeablePathRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let b2: Vec<f64> = rows.iter().map(|r| r.b * r.b / vol).collect();

    let branches = exp
        .profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mean_n = (r.t0..r.t1)
                .flat_map(|t| (r.i0..r.i1).map(move |s| Cell::new(s, t)))
                .map(|c| p.n[c])
                .sum::<f64>()
                / r.cells() as f64;
            let hits: Vec<f64> =
                rows.iter().filter(|row| row.outcome == Some(i)).map(|row| row.recovered_n).collect();
            BranchImage {
                branch: i,
                mean_n,
                paths: hits.len(),
                recovered: (lambda > 0.0 && hits.len() > 1).then(|| Estimate::of(&hits)),
            }
        })
        .collect();

    let st = exp.initial_state()?;
    let noise = exp.noise(0);
    let mid = (r.t0 + r.t1) / 2;
    let t00 = (0..exp.spec.sites())
        .map(|i| {
            let x = Cell::new(i, mid);
            Ok(T00Row {
                x1: exp.spec.x1(i),
                x0: exp.spec.x0(mid),
                t00: beable_t00(&exp.spec, &st, &noise, &exp.params, x)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let plc = if config.kernel.mode == KernelModeConfig::Plc {
        let run = run_plc_mode(&exp.spec, &exp.amplitudes, &exp.profiles, config.kernel.k, lambda, &noise)?;
        let region_mean_n = run
            .n
            .iter()
            .map(|f| f.iter().filter(|(c, _)| r.contains(*c)).map(|(_, v)| v).sum::<f64>() / r.cells() as f64)
            .collect();
        let t = run.t00.as_slice();
        Some(PlcSummary {
            region_mean_n,
            t00_min: t.iter().copied().fold(f64::INFINITY, f64::min),
            t00_max: t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            final_weights: run.state.weights(),
        })
    } else {
        None
    };

    Ok(BeableReport {
        manifest: Manifest::new("beable", config),
        region,
        cells: [r.i0, r.i1, r.t0, r.t1],
        volume: vol,
        paths: n,
        w: Estimate::of(&col(|r| r.w)),
        signal: Estimate::of(&col(|r| r.signal)),
        noise_variance_ratio: Estimate::of(&b2),
        branches,
        t00,
        plc,
        path_table: rows,
    })
}

pub fn emit(report: &BeableReport, out: &mut Emitter) -> Result<()> {
    out.csv("beable_paths", &report.path_table)?;
    out.csv("beable_t00", &report.t00)?;
    out.json("beable", report)
}
