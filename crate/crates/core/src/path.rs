//! Single Monte Carlo paths along a foliation.

use alloc::vec::Vec;

use crate::dynamics::{BranchState, CollapseParams, Integrator};
use crate::lattice::{Cell, Foliation, FoliationKind};
use crate::noise::NoiseSource;
use crate::{Error, Result};

/// Rectangle of cells `[i0, i1) x [t0, t1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub i0: usize,
    pub i1: usize,
    pub t0: usize,
    pub t1: usize,
}

impl Region {
    pub fn contains(&self, c: Cell) -> bool {
        c.i >= self.i0 && c.i < self.i1 && c.t >= self.t0 && c.t < self.t1
    }

    pub fn cells(&self) -> usize {
        self.i1.saturating_sub(self.i0) * self.t1.saturating_sub(self.t0)
    }
}

/// Integrals of the noise over a region: `w = b + signal`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionSums {
    /// `sum dW`.
    pub w: f64,
    /// `sum dB`.
    pub b: f64,
    /// `sum 2 lambda <N> dw`.
    pub signal: f64,
    /// `sum dw` over the region.
    pub volume: f64,
}

/// One recorded advance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub cell: Cell,
    pub dw: f64,
    pub db: f64,
    pub log_norm2: f64,
    /// `<N(cell)>` before the step.
    pub mean_n: f64,
    /// `sum_{x1} Var[N(x1, t)] dx` on the row of `cell`, after the step.
    pub var_integral: f64,
}

/// State summary on a constant-time surface.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    /// Height of the flat surface.
    pub t: usize,
    /// `sum_{x1} Var[N(x1, t)] dx`, using row `min(t, T - 1)`.
    pub var_integral: f64,
    pub log_norm2: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Keep every step.
    pub record_steps: bool,
    /// Keep a [`LevelRecord`] whenever the surface is flat.
    pub record_levels: bool,
    /// Stop as soon as the path collapses.
    pub stop_at_collapse: bool,
    /// Rows before this one are swept without collapse dynamics.
    pub collapse_from_row: usize,
    pub regions: Vec<Region>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub foliation: FoliationKind,
    pub steps: Vec<StepRecord>,
    pub levels: Vec<LevelRecord>,
    pub regions: Vec<RegionSums>,
    /// Branch that first exceeded `1 - epsilon`, if any.
    pub outcome: Option<usize>,
    /// `(t + 1) dt` of the cell at which the path collapsed.
    pub collapse_time: Option<f64>,
    /// Branch with the largest final weight.
    pub leading: usize,
    pub final_weights: Vec<f64>,
    pub final_log_norm2: f64,
    /// Number of advances performed.
    pub advances: usize,
}

/// Evolves `state0` along `foliation` with the given noise.
///
/// For the linear integrator the noise is read as `dW`; for the nonlinear one
/// as `dB`. Either way the other increment is reconstructed from
/// `dW = dB + 2 lambda <N> dw`.
pub fn run_path<N: NoiseSource>(
    state0: &BranchState,
    foliation: &Foliation,
    noise: &N,
    params: &CollapseParams,
    opts: &RunOptions,
) -> Result<PathRecord> {
    let spec = foliation.spec();
    if state0.surface() != foliation.initial() {
        return Err(Error::Config("state and foliation start on different surfaces"));
    }
    if params.integrator == Integrator::Nonlinear && !state0.is_normalized()
        || params.integrator == Integrator::Linear && state0.is_normalized()
    {
        return Err(Error::Config("state normalization does not match the integrator"));
    }
    let mut st = state0.clone();
    let vol = spec.cell_volume();
    let lambda = params.lambda;
    let mut rec = PathRecord {
        foliation: foliation.kind(),
        steps: Vec::new(),
        levels: Vec::new(),
        regions: alloc::vec![RegionSums::default(); opts.regions.len()],
        outcome: None,
        collapse_time: None,
        leading: 0,
        final_weights: Vec::new(),
        final_log_norm2: 0.0,
        advances: 0,
    };
    let sites = spec.sites();
    let level_of = |st: &BranchState, rec: &mut PathRecord| {
        if let Some(t) = st.surface().flat_height() {
            rec.levels.push(LevelRecord {
                t,
                var_integral: st.variance_integral(spec, t.min(spec.steps() - 1)),
                log_norm2: st.log_norm2(),
                weights: st.weights(),
            });
        }
    };
    if opts.record_levels {
        level_of(&st, &mut rec);
    }
    let check_collapse = |st: &BranchState, rec: &mut PathRecord, cell: Cell| {
        if rec.outcome.is_none() {
            let (i, w) = st.leading();
            if w > 1.0 - params.epsilon {
                rec.outcome = Some(i);
                rec.collapse_time = Some((cell.t + 1) as f64 * spec.dt());
            }
        }
    };
    let (first, w0) = st.leading();
    if w0 > 1.0 - params.epsilon {
        rec.outcome = Some(first);
        rec.collapse_time = Some(0.0);
    }

    for (k, &cell) in foliation.cells().iter().enumerate() {
        let in_regions = opts.regions.iter().any(|r| r.contains(cell));
        let active = cell.t >= opts.collapse_from_row;
        let skip_noise = !active
            || (params.integrator == Integrator::Nonlinear
                && st.degenerate_at(cell)
                && !opts.record_steps
                && !in_regions);
        if skip_noise {
            st.skip(spec, cell)?;
        } else {
            let mean_n = st.quantum_expectation_n(cell);
            let shift = 2.0 * lambda * mean_n * vol;
            let sample = noise.dw(cell);
            let (dw, db) = match params.integrator {
                Integrator::Linear => (sample, sample - shift),
                Integrator::Nonlinear => (sample + shift, sample),
            };
            st.step(spec, cell, sample, params)?;
            for (r, sums) in opts.regions.iter().zip(rec.regions.iter_mut()) {
                if r.contains(cell) {
                    sums.w += dw;
                    sums.b += db;
                    sums.signal += shift;
                    sums.volume += vol;
                }
            }
            if opts.record_steps {
                rec.steps.push(StepRecord {
                    cell,
                    dw,
                    db,
                    log_norm2: st.log_norm2(),
                    mean_n,
                    var_integral: st.variance_integral(spec, cell.t),
                });
            }
        }
        rec.advances = k + 1;
        if active {
            check_collapse(&st, &mut rec, cell);
        }
        if opts.record_levels && (k + 1) % sites == 0 {
            level_of(&st, &mut rec);
        }
        if opts.stop_at_collapse && rec.outcome.is_some() {
            break;
        }
    }
    rec.final_weights = st.weights();
    rec.final_log_norm2 = st.log_norm2();
    rec.leading = st.leading().0;
    Ok(rec)
}

/// Steps `state0` through every cell of `foliation` and returns the final
/// state, without records or collapse detection.
pub fn evolve<N: NoiseSource>(
    state0: &BranchState,
    foliation: &Foliation,
    noise: &N,
    params: &CollapseParams,
) -> Result<BranchState> {
    let spec = foliation.spec();
    let mut st = state0.clone();
    for &cell in foliation.cells() {
        st.step(spec, cell, noise.dw(cell), params)?;
    }
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Scheme;
    use crate::field::CellField;
    use crate::lattice::LatticeSpec;
    use crate::noise::NoiseField;
    use crate::pointer::BranchProfile;
    use alloc::sync::Arc;
    use num_complex::Complex64;

    fn setup(normalized: bool) -> (LatticeSpec, BranchState) {
        let s = LatticeSpec::new(5, 40, 1.0, 0.5, 0.0).unwrap();
        let n1 = CellField::from_fn(&s, |c| if c.i < 2 { 2.0 } else { 0.0 });
        let n2 = CellField::from_fn(&s, |c| if c.i >= 3 { 2.0 } else { 0.0 });
        let p: Arc<[BranchProfile]> = Arc::from(alloc::vec![
            BranchProfile::from_density(n1.clone()).with_number(n1),
            BranchProfile::from_density(n2.clone()).with_number(n2),
        ]);
        let st = BranchState::new(&s, &[Complex64::new(1.0, 0.0); 2], p, normalized).unwrap();
        (s, st)
    }

    #[test]
    fn zero_coupling_never_collapses() {
        let (s, st) = setup(true);
        let params = CollapseParams::new(0.0, 0.01, Integrator::Nonlinear, Scheme::Exponential).unwrap();
        let opts = RunOptions { record_levels: true, ..Default::default() };
        let rec = run_path(&st, &Foliation::standard(&s), &NoiseField::new(&s, 3), &params, &opts).unwrap();
        assert!(rec.outcome.is_none());
        assert_eq!(rec.levels.len(), 41);
        assert!(rec.levels.iter().all(|l| (l.weights[0] - 0.5).abs() < 1e-15));
    }

    #[test]
    fn db_dw_identity_on_every_step() {
        let (s, st) = setup(false);
        let params = CollapseParams::new(0.6, 0.01, Integrator::Linear, Scheme::Exponential).unwrap();
        let opts = RunOptions { record_steps: true, ..Default::default() };
        let rec = run_path(&st, &Foliation::random(&s, 4), &NoiseField::new(&s, 9), &params, &opts).unwrap();
        assert_eq!(rec.steps.len(), s.num_cells());
        for r in &rec.steps {
            assert_eq!(r.db, r.dw - 2.0 * 0.6 * r.mean_n * s.cell_volume());
        }
    }

    #[test]
    fn foliations_agree_on_the_final_surface() {
        let (s, st) = setup(false);
        let params = CollapseParams::new(0.6, 0.01, Integrator::Linear, Scheme::Exponential).unwrap();
        let noise = NoiseField::new(&s, 11);
        let a = run_path(&st, &Foliation::standard(&s), &noise, &params, &RunOptions::default()).unwrap();
        for seed in 0..3 {
            let b = run_path(&st, &Foliation::random(&s, seed), &noise, &params, &RunOptions::default()).unwrap();
            assert!((a.final_weights[0] - b.final_weights[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn regions_add_up() {
        let (s, st) = setup(true);
        let params = CollapseParams::new(0.6, 0.01, Integrator::Nonlinear, Scheme::Exponential).unwrap();
        let r1 = Region { i0: 0, i1: 2, t0: 5, t1: 20 };
        let r2 = Region { i0: 3, i1: 5, t0: 5, t1: 20 };
        let both = Region { i0: 0, i1: 5, t0: 5, t1: 20 };
        let opts = RunOptions { regions: alloc::vec![r1, r2, both], ..Default::default() };
        let rec = run_path(&st, &Foliation::standard(&s), &NoiseField::new(&s, 1), &params, &opts).unwrap();
        let mid = Region { i0: 2, i1: 3, t0: 5, t1: 20 };
        let opts_mid = RunOptions { regions: alloc::vec![mid], ..Default::default() };
        let m = run_path(&st, &Foliation::standard(&s), &NoiseField::new(&s, 1), &params, &opts_mid).unwrap();
        let sum = rec.regions[0].w + rec.regions[1].w + m.regions[0].w;
        assert!((sum - rec.regions[2].w).abs() < 1e-12);
        let r = &rec.regions[0];
        assert!((r.w - r.b - r.signal).abs() < 1e-12);
        assert!((r.volume - 30.0 * s.cell_volume()).abs() < 1e-12);
    }
}
