//! Checks on the branch dynamics and Monte Carlo estimators.

use pointer_collapse_core::dynamics::{DynamicsTerms, Integrator, Scheme};
use pointer_collapse_core::kernel::{kernel_row, KernelTable, Side, StressTensor};
use pointer_collapse_core::lattice::Foliation;
use pointer_collapse_core::path::{evolve, Region, RunOptions};
use pointer_collapse_core::{Cell, LatticeSpec, NoiseSource};
use serde::Serialize;

use super::Check;
use crate::commands::born::LINEAR_STREAM_OFFSET;
use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::Experiment;
use crate::mc::map_paths;
use crate::stats::{compare_probability_vectors, Estimate};

/// Number of flat checkpoint surfaces for the martingale checks.
pub const CHECKPOINTS: usize = 10;
/// Standard errors allowed in the Monte Carlo checks.
pub const SIGMAS: f64 = 3.0;
/// Independent blocks for the estimator comparison.
pub const ESTIMATOR_BLOCKS: usize = 3;
pub const ESTIMATOR_P: f64 = 0.01;
/// Agreement of final weights across foliations.
pub const FOLIATION_TOL: f64 = 1e-12;

/// Short, asymmetric variant of `config` for the estimator checks: one tenth
/// of the rows and weights 0.3 and 0.7 on the first two branches. On the full
/// horizon the linear path weights are too heavy-tailed for sample means to
/// be informative.
pub fn mild_config(config: &RunConfig) -> RunConfig {
    let mut c = config.clone();
    c.lattice.steps = (c.lattice.steps / 10).max(CHECKPOINTS);
    if let Some(e) = c.experiment.as_mut() {
        if e.branches.len() == 2 {
            e.branches[0].amplitude = [0.3f64.sqrt(), 0.0];
            e.branches[1].amplitude = [0.7f64.sqrt(), 0.0];
        }
        e.sigma_f = None;
    }
    c
}

/// Per-path state at the checkpoint surfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    /// Log of the path weight; zero when the measure change is switched off.
    pub log_weight: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub var_integral: Vec<f64>,
}

/// Paths sampled under one integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    /// Checkpoint rows, starting with the initial surface.
    pub rows: Vec<usize>,
    pub initial: Vec<f64>,
    pub paths: Vec<PathSample>,
}

impl Sampled {
    /// `[0, T/10, 2T/10, ..., T]`.
    pub fn checkpoints(steps: usize) -> Vec<usize> {
        (0..=CHECKPOINTS).map(|k| k * steps / CHECKPOINTS).collect()
    }
}

/// Runs `n` paths of `exp` under `integrator`, keeping the checkpoints.
/// Linear paths draw from noise streams disjoint from nonlinear ones.
pub fn sample(exp: &Experiment, integrator: Integrator, n: usize, workers: usize) -> Result<Sampled> {
    let e = exp.with_integrator(integrator);
    let rows = Sampled::checkpoints(e.spec.steps());
    let opts = RunOptions { record_levels: true, ..Default::default() };
    let offset = if integrator == Integrator::Linear { LINEAR_STREAM_OFFSET } else { 0 };
    let reweight = integrator == Integrator::Nonlinear || e.params.terms.measure_change;
    let paths = map_paths(workers, n, |p| {
        let rec = e.run(p + offset, &opts)?;
        let mut s = PathSample { log_weight: Vec::new(), weights: Vec::new(), var_integral: Vec::new() };
        for &t in &rows {
            let l = rec
                .levels
                .iter()
                .find(|l| l.t == t)
                .ok_or_else(|| HarnessError::Usage(format!("path never reaches the flat surface at row {t}")))?;
            s.log_weight.push(if reweight { l.log_norm2 } else { 0.0 });
            s.weights.push(l.weights.clone());
            s.var_integral.push(l.var_integral);
        }
        Ok(s)
    })?;
    let initial = e.amplitudes.iter().map(|c| c.norm_sqr()).collect();
    Ok(Sampled { rows, initial, paths })
}

fn worst<'a>(it: impl Iterator<Item = (&'a str, Estimate, f64)>) -> (bool, f64, String) {
    let mut ok = true;
    let (mut z, mut at) = (0.0f64, String::new());
    for (label, e, target) in it {
        ok &= e.within(target, SIGMAS);
        let zi = e.z(target).abs();
        if !(zi <= z) {
            z = zi;
            at = format!("{label}: mean {:.5} vs {:.5}, s.e. {:.2e}", e.mean, target, e.se);
        }
    }
    (ok, z, at)
}

/// `E_Q[|Phi|^2] = 1` at every checkpoint.
pub fn q_martingale(q: &Sampled) -> Check {
    let ests: Vec<(String, Estimate)> = (1..q.rows.len())
        .map(|k| {
            let xs: Vec<f64> = q.paths.iter().map(|p| p.log_weight[k].exp()).collect();
            (format!("row {}", q.rows[k]), Estimate::of(&xs))
        })
        .collect();
    let (ok, z, at) = worst(ests.iter().map(|(l, e)| (l.as_str(), *e, 1.0)));
    Check::with(
        "Q martingale: mean squared norm stays 1",
        ok,
        z,
        0.0,
        SIGMAS,
        format!("largest |z| over {} checkpoints and {} paths at {at}", q.rows.len() - 1, q.paths.len()),
    )
}

/// `E_P[<P_j>]` equals its initial value at every checkpoint.
pub fn p_martingale(p: &Sampled) -> Check {
    let mut ests = Vec::new();
    for k in 1..p.rows.len() {
        for j in 0..p.initial.len() {
            let xs: Vec<f64> = p.paths.iter().map(|s| s.weights[k][j]).collect();
            ests.push((format!("row {} branch {j}", p.rows[k]), Estimate::of(&xs), p.initial[j]));
        }
    }
    let (ok, z, at) = worst(ests.iter().map(|(l, e, t)| (l.as_str(), *e, *t)));
    Check::with(
        "P martingale: mean branch projector constant",
        ok,
        z,
        0.0,
        SIGMAS,
        format!("largest |z| over {} checkpoints and {} paths at {at}", p.rows.len() - 1, p.paths.len()),
    )
}

/// `E_P[sum Var dx]` does not increase between checkpoints by more than one
/// standard error.
pub fn variance_supermartingale(p: &Sampled) -> Check {
    let ests: Vec<Estimate> = (0..p.rows.len())
        .map(|k| Estimate::of(&p.paths.iter().map(|s| s.var_integral[k]).collect::<Vec<_>>()))
        .collect();
    let mut ok = true;
    let mut rise = f64::NEG_INFINITY;
    for w in ests.windows(2) {
        let r = (w[1].mean - w[0].mean) / w[1].se.max(f64::MIN_POSITIVE);
        ok &= w[1].mean <= w[0].mean + w[1].se;
        rise = rise.max(r);
    }
    Check::with(
        "variance integral is a P supermartingale",
        ok,
        rise,
        0.0,
        1.0,
        format!(
            "largest rise in units of s.e.; mean from {:.2} to {:.2}",
            ests[0].mean,
            ests[ests.len() - 1].mean
        ),
    )
}

/// P expectations of `<P_0>` computed with the final surface at the middle
/// and at the top checkpoint agree, path by path paired.
pub fn sigma_f_insensitivity(q: &Sampled) -> Check {
    let (mid, top) = (q.rows.len() / 2, q.rows.len() - 1);
    let diff: Vec<f64> = q
        .paths
        .iter()
        .map(|s| s.log_weight[top].exp() * s.weights[top][0] - s.log_weight[mid].exp() * s.weights[mid][0])
        .collect();
    let e = Estimate::of(&diff);
    Check::with(
        "P statistics independent of the final surface",
        e.within(0.0, SIGMAS),
        e.mean,
        0.0,
        SIGMAS * e.se,
        format!("paired difference of reweighted <P_0> between rows {} and {}", q.rows[mid], q.rows[top]),
    )
}

fn argmax(w: &[f64]) -> usize {
    w.iter().enumerate().fold(0, |b, (i, v)| if *v > w[b] { i } else { b })
}

/// Leading branch on the top surface: unweighted nonlinear paths against
/// weighted linear paths, in independent blocks.
pub fn estimator_equivalence(q: &Sampled, p: &Sampled) -> Check {
    let top = q.rows.len() - 1;
    let k = q.initial.len();
    let indicator = |s: &PathSample, w: f64| {
        let o = argmax(&s.weights[top]);
        (0..k).map(|i| if i == o { w } else { 0.0 }).collect::<Vec<f64>>()
    };
    let a: Vec<Vec<f64>> = p.paths.iter().map(|s| indicator(s, 1.0)).collect();
    let b: Vec<Vec<f64>> = q.paths.iter().map(|s| indicator(s, s.log_weight[top].exp())).collect();
    let n = a.len().min(b.len()) / ESTIMATOR_BLOCKS;
    let ps: Vec<f64> = (0..ESTIMATOR_BLOCKS)
        .map(|r| compare_probability_vectors(&a[r * n..(r + 1) * n], &b[r * n..(r + 1) * n]).1)
        .collect();
    let min = ps.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = |rows: &[Vec<f64>]| rows.iter().map(|r| r[0]).sum::<f64>() / rows.len() as f64;
    Check::with(
        "linear reweighted and nonlinear estimators agree",
        min > ESTIMATOR_P,
        min,
        1.0,
        ESTIMATOR_P,
        format!(
            "smallest p over {ESTIMATOR_BLOCKS} blocks of {n} paths ({}); P(lead 0) nonlinear {:.4}, reweighted {:.4}",
            ps.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>().join(", "),
            mean(&a),
            mean(&b)
        ),
    )
}

/// Doubling the noise variance must break the Q martingale.
pub fn tampered_noise(exp: &Experiment, n: usize, workers: usize) -> Result<Check> {
    let mut e = exp.clone();
    e.noise_scale = 2.0;
    let q = q_martingale(&sample(&e, Integrator::Linear, n, workers)?);
    Ok(Check::with(
        "doubled noise variance breaks the Q martingale",
        !q.passed,
        q.observed,
        SIGMAS,
        0.0,
        format!("the Q check must fail; {}", q.detail),
    ))
}

/// Removing one term of the step must be caught by the Q, P or estimator
/// checks.
pub fn mutations(exp: &Experiment, n: usize, workers: usize) -> Result<Vec<Check>> {
    let all = DynamicsTerms::default();
    let cases = [
        ("drift", DynamicsTerms { drift: false, ..all }),
        ("diffusion", DynamicsTerms { diffusion: false, ..all }),
        ("measure change", DynamicsTerms { measure_change: false, ..all }),
    ];
    let mut out = Vec::new();
    for (name, terms) in cases {
        let mut e = exp.clone();
        e.params = e.params.with_terms(terms);
        let q = sample(&e, Integrator::Linear, n, workers)?;
        let p = sample(&e, Integrator::Nonlinear, n, workers)?;
        let checks = [q_martingale(&q), p_martingale(&p), estimator_equivalence(&q, &p)];
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        out.push(Check::with(
            &format!("removing the {name} term is detected"),
            !failed.is_empty(),
            failed.len() as f64,
            1.0,
            0.0,
            if failed.is_empty() { format!("no check failed over {n} paths") } else { format!("failed: {}", failed.join("; ")) },
        ));
    }
    Ok(out)
}

/// Final normalized weights of a linear path along the standard foliation
/// and along `random` random ones sharing its end surface.
pub fn foliation_independence(exp: &Experiment, random: usize) -> Result<Check> {
    let e = exp.with_integrator(Integrator::Linear);
    let st = e.initial_state()?;
    let noise = e.noise(0);
    let reference = evolve(&st, &Foliation::standard(&e.spec), &noise, &e.params)?.weights();
    let mut worst = 0.0f64;
    for r in 0..random {
        let f = Foliation::random(&e.spec, e.seed.wrapping_add(r as u64 + 1));
        let w = evolve(&st, &f, &noise, &e.params)?.weights();
        worst = reference.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    Ok(Check::with(
        "final weights independent of the foliation",
        worst <= FOLIATION_TOL,
        worst,
        0.0,
        FOLIATION_TOL,
        format!("standard against {random} random foliations, same noise, final weights {reference:.6?}"),
    ))
}

/// `dB = dW - 2 lambda <N> dw` on every recorded step of one path per
/// integrator.
pub fn noise_identity(exp: &Experiment) -> Result<Check> {
    let vol = exp.spec.cell_volume();
    let lambda = exp.params.lambda;
    let opts = RunOptions { record_steps: true, ..Default::default() };
    let mut worst = 0.0f64;
    let mut steps = 0;
    for integrator in [Integrator::Linear, Integrator::Nonlinear] {
        let rec = exp.with_integrator(integrator).run(0, &opts)?;
        for s in &rec.steps {
            worst = worst.max((s.db - (s.dw - 2.0 * lambda * s.mean_n * vol)).abs());
        }
        steps += rec.steps.len();
    }
    Ok(Check::with(
        "dB = dW - 2 lambda <N> dw at every step",
        steps > 0 && worst <= 1e-12,
        worst,
        0.0,
        1e-12,
        format!("{steps} recorded steps under both integrators"),
    ))
}

/// Linear evolution then normalization against nonlinear evolution driven by
/// the `dB` recomputed from its own state, on the same `dW`.
pub fn integrator_pairing(exp: &Experiment) -> Result<Vec<Check>> {
    let spec = exp.spec;
    let noise = exp.noise(0);
    let vol = spec.cell_volume();
    let nmax = exp.profiles.iter().flat_map(|p| p.n.as_slice().iter().copied()).fold(0.0, f64::max);
    let mut out = Vec::new();
    for scheme in [Scheme::Exponential, Scheme::Euler] {
        let mut lin = exp.with_integrator(Integrator::Linear);
        lin.params.scheme = scheme;
        let mut nl = exp.with_integrator(Integrator::Nonlinear);
        nl.params.scheme = scheme;
        let (mut a, mut b) = (lin.initial_state()?, nl.initial_state()?);
        let lambda = exp.params.lambda;
        let mut worst = 0.0f64;
        let cells = Foliation::standard(&spec);
        for &c in cells.cells() {
            let dw = noise.dw(c);
            let db = b.db_from_dw(&spec, c, dw, lambda);
            a.step(&spec, c, dw, &lin.params)?;
            b.step(&spec, c, db, &nl.params)?;
            worst = a.weights().iter().zip(b.weights()).map(|(x, y)| (x - y).abs()).fold(worst, f64::max);
        }
        let n = cells.len() as f64;
        let (tol, what) = match scheme {
            Scheme::Exponential => (1e-9, "agree up to rounding"),
            Scheme::Euler => (n * lambda * lambda * nmax * nmax * vol, "differ by O(dw) per step"),
        };
        out.push(Check::with(
            &format!("normalized linear and nonlinear paths pair ({scheme:?})"),
            worst <= tol,
            worst,
            0.0,
            tol,
            format!("largest weight difference over {} steps; the two {what}", cells.len()),
        ));
    }
    Ok(out)
}

/// One exponential linear step: amplitude ratios follow
/// `exp(-lambda^2 (N_i - dW / (2 lambda dw))^2 dw)`.
pub fn gaussian_step(exp: &Experiment) -> Result<Check> {
    let e = exp.with_integrator(Integrator::Linear);
    let mut p = e.params;
    p.scheme = Scheme::Exponential;
    let spec = e.spec;
    let vol = spec.cell_volume();
    let l = p.lambda;
    let x = (0..spec.sites())
        .map(|i| Cell::new(i, 0))
        .find(|&c| {
            let n0 = e.profiles[0].n[c];
            e.profiles.iter().any(|q| q.n[c] != n0)
        })
        .ok_or_else(|| HarnessError::Config("branches have identical N on the first row".into()))?;
    let mut worst = 0.0f64;
    for k in 0..16 {
        let dw = (k as f64 - 7.5) / 4.0 * vol.sqrt();
        let st = e.initial_state()?;
        let mut st1 = st.clone();
        // earlier cells of row 0 are passed over without a step
        for i in 0..x.i {
            st1.skip(&spec, Cell::new(i, 0))?;
        }
        st1.step(&spec, x, dw, &p)?;
        let g = |n: f64| {
            let s = n - dw / (2.0 * l * vol);
            -l * l * s * s * vol
        };
        for i in 1..st.len() {
            let observed = (st1.log_magnitudes()[i] - st1.log_magnitudes()[0])
                - (st.log_magnitudes()[i] - st.log_magnitudes()[0]);
            let expected = g(e.profiles[i].n[x]) - g(e.profiles[0].n[x]);
            worst = worst.max((observed - expected).abs() / expected.abs().max(1.0));
        }
    }
    Ok(Check::with(
        "one linear step is the Gaussian weighting",
        worst <= 1e-12,
        worst,
        0.0,
        1e-12,
        format!("relative error of log amplitude ratios, 16 values of dW at cell ({}, {})", x.i, x.t),
    ))
}

/// Kernel rows integrate to one and the offset table reproduces direct
/// evaluation, on the configured lattice and on a small lattice with a wide
/// kernel.
pub fn kernel_checks(exp: &Experiment) -> Result<Vec<Check>> {
    let wide = LatticeSpec::new(24, 24, 0.1, 0.1, 0.0)?;
    let cases = [(exp.spec, exp.kernel.k, exp.kernel.stress), (wide, 2.0, StressTensor::rest(1.0))];
    let (mut norm, mut direct, mut rows) = (0.0f64, 0.0f64, 0usize);
    for (spec, k, stress) in cases {
        let ts: Vec<usize> = if spec.steps() <= 24 {
            (0..spec.steps()).collect()
        } else {
            vec![0, 1, spec.steps() / 2, spec.steps() - 2, spec.steps() - 1]
        };
        for side in [Side::Future, Side::Past] {
            let table = KernelTable::new(&spec, side, k, &stress)?;
            for &t in &ts {
                for i in 0..spec.sites() {
                    let x = Cell::new(i, t);
                    let row = kernel_row(&spec, x, side, k, &stress);
                    if !row.boundary {
                        let s: f64 = table.row(x).map(|(_, v)| v * spec.cell_volume()).sum();
                        norm = norm.max((s - 1.0).abs());
                        rows += 1;
                    }
                    let mut from_table: Vec<(Cell, f64)> = table.row(x).collect();
                    let mut from_row = row.entries.clone();
                    from_table.sort_by_key(|c| (c.0.t, c.0.i));
                    from_row.sort_by_key(|c| (c.0.t, c.0.i));
                    if from_table.len() != from_row.len() {
                        direct = f64::INFINITY;
                        continue;
                    }
                    for (a, b) in from_table.iter().zip(&from_row) {
                        let d = if a.0 == b.0 { (a.1 - b.1).abs() / b.1.abs().max(1e-300) } else { f64::INFINITY };
                        direct = direct.max(d);
                    }
                }
            }
        }
    }
    Ok(vec![
        Check::with(
            "kernel rows are normalized",
            norm <= 1e-12,
            norm,
            0.0,
            1e-12,
            format!("largest |sum dw k(x, y) - 1| over {rows} interior rows"),
        ),
        Check::with(
            "kernel table matches direct evaluation",
            direct <= 1e-12,
            direct,
            0.0,
            1e-12,
            "largest relative difference of row entries".into(),
        ),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeableRow {
    pub path: usize,
    pub outcome: Option<usize>,
    pub collapse_time: Option<f64>,
    /// `W_R / vol(R)` on each branch's lump.
    pub w_per_volume: Vec<f64>,
    pub signal_per_volume: Vec<f64>,
}

/// Cells where branch `b` has nonzero density on row 0, as one rectangle
/// from row `t0` to `t1`.
pub fn lump_region(exp: &Experiment, b: usize, t0: usize, t1: usize) -> Result<Region> {
    let row = exp.profiles[b].j.row(0);
    let on: Vec<usize> = (0..row.len()).filter(|&i| row[i] != 0.0).collect();
    match (on.first(), on.last()) {
        (Some(&i0), Some(&i1)) if i1 + 1 - i0 == on.len() => Ok(Region { i0, i1: i1 + 1, t0, t1 }),
        _ => Err(HarnessError::Config(format!("branch {b} density is not a single interval"))),
    }
}

/// Noise integrals over both lumps for paths that had collapsed before the
/// window `[t0, t1)` opened.
pub fn beable_paths(exp: &Experiment, n: usize, t0: usize, t1: usize, workers: usize) -> Result<Vec<BeableRow>> {
    let e = exp.with_integrator(Integrator::Nonlinear);
    let regions: Vec<Region> = (0..e.profiles.len()).map(|b| lump_region(&e, b, t0, t1)).collect::<Result<_>>()?;
    let opts = RunOptions { regions, ..Default::default() };
    map_paths(workers, n, |p| {
        let rec = e.run(p, &opts)?;
        Ok(BeableRow {
            path: p,
            outcome: rec.outcome,
            collapse_time: rec.collapse_time,
            w_per_volume: rec.regions.iter().map(|r| r.w / r.volume).collect(),
            signal_per_volume: rec.regions.iter().map(|r| r.signal / r.volume).collect(),
        })
    })
}

/// `W_R / vol` averaged over collapsed paths recovers `2 lambda N` on the
/// surviving lump and zero on the other.
pub fn beable_recovery(exp: &Experiment, rows: &[BeableRow], t0: usize, t1: usize) -> Result<Vec<Check>> {
    let start = exp.time_of(t0);
    let (mut kept, mut gone) = (Vec::new(), Vec::new());
    let mut target = Vec::new();
    for r in rows {
        let (Some(o), Some(tc)) = (r.outcome, r.collapse_time) else { continue };
        if tc > start || r.w_per_volume.len() != 2 {
            continue;
        }
        let region = lump_region(exp, o, t0, t1)?;
        let n = exp.profiles[o].n[Cell::new(region.i0, t0)];
        target.push(2.0 * exp.params.lambda * n);
        kept.push(r.w_per_volume[o]);
        gone.push(r.w_per_volume[1 - o]);
    }
    if kept.len() < 2 {
        return Err(HarnessError::Config("fewer than two paths collapsed before the beable window".into()));
    }
    let expected = target.iter().sum::<f64>() / target.len() as f64;
    let (a, b) = (Estimate::of(&kept), Estimate::of(&gone));
    let detail = |e: &Estimate| format!("{} paths collapsed before x0 = {start:.2e}; s.e. {:.3}", e.n, e.se);
    Ok(vec![
        Check::with(
            "W_R/vol recovers 2 lambda N on the surviving lump",
            a.within(expected, SIGMAS),
            a.mean,
            expected,
            SIGMAS * a.se,
            detail(&a),
        ),
        Check::with(
            "W_R/vol vanishes on the extinguished lump",
            b.within(0.0, SIGMAS),
            b.mean,
            0.0,
            SIGMAS * b.se,
            detail(&b),
        ),
    ])
}

/// With `lambda = 0` the region integral is pure noise of variance
/// `vol(R)`.
pub fn beable_noise_only(exp: &Experiment, n: usize, t0: usize, t1: usize, workers: usize) -> Result<Check> {
    let mut e = exp.clone();
    e.params.lambda = 0.0;
    let rows = beable_paths(&e, n, t0, t1, workers)?;
    let vol = lump_region(&e, 0, t0, t1)?.cells() as f64 * e.spec.cell_volume();
    // W / sqrt(vol) is standard normal
    let z2: Vec<f64> = rows.iter().map(|r| r.w_per_volume[0] * r.w_per_volume[0] * vol).collect();
    let v = Estimate::of(&z2);
    let signal = rows.iter().map(|r| r.signal_per_volume[0].abs()).fold(0.0, f64::max);
    Ok(Check::with(
        "lambda = 0: W_R has zero signal and variance vol(R)",
        signal == 0.0 && v.within(1.0, SIGMAS),
        v.mean,
        1.0,
        SIGMAS * v.se,
        format!("Var(W_R)/vol(R) over {n} paths; largest |signal| {signal:.1e}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mild() -> Experiment {
        Experiment::build(&mild_config(&RunConfig::default())).unwrap()
    }

    #[test]
    fn mild_config_shortens_and_skews() {
        let c = mild_config(&RunConfig::default());
        assert_eq!(c.lattice.steps, 120);
        let w: Vec<f64> = c.experiment.unwrap().branches.iter().map(|b| b.amplitude[0].powi(2)).collect();
        assert!((w[0] - 0.3).abs() < 1e-15 && (w[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn checkpoints_span_the_lattice() {
        let c = Sampled::checkpoints(120);
        assert_eq!(c.len(), CHECKPOINTS + 1);
        assert_eq!((c[0], c[CHECKPOINTS]), (0, 120));
    }

    #[test]
    fn path_level_identities_hold() {
        let exp = mild();
        assert!(noise_identity(&exp).unwrap().passed);
        assert!(gaussian_step(&exp).unwrap().passed);
        for c in integrator_pairing(&exp).unwrap() {
            assert!(c.passed, "{}", c.line());
        }
    }

    #[test]
    fn small_sample_is_a_martingale() {
        let exp = mild();
        let q = sample(&exp, Integrator::Linear, 300, 1).unwrap();
        assert_eq!(q.paths.len(), 300);
        assert_eq!(q.rows, Sampled::checkpoints(exp.spec.steps()));
        assert!(q_martingale(&q).passed);
    }
}
