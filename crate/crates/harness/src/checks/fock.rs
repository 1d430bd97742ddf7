//! Checks on the truncated Fock realization.

use pointer_collapse_core::dynamics::{BranchState, CollapseParams, Integrator, Scheme};
use pointer_collapse_core::field::CellField;
use pointer_collapse_core::fock::{
    apply_advance, apply_collapse, coherent_state, evolve_exact, expectation_drift, FockSpec, JointState,
    OracleKernels, SparseOp,
};
use pointer_collapse_core::kernel::{KernelTable, Side, StressTensor};
use pointer_collapse_core::lattice::{Cell, Foliation};
use pointer_collapse_core::noise::NoiseSource;
use pointer_collapse_core::path::evolve;
use pointer_collapse_core::pointer::{accumulate_alpha, exact_image, n_expectation, AlphaField, BranchProfile};
use pointer_collapse_core::{Complex64, LatticeSpec, NoiseField};
use serde::Serialize;

use super::Check;
use crate::error::Result;
use crate::stats::Estimate;

/// Exact matrix identities.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Relative agreement of branch weights with the exact evolution.
pub const ORACLE_TOL: f64 = 0.02;
/// Allowed relative deviation of the delta-kernel doubling ratio from 2.
pub const DELTA_SCALING_TOL: f64 = 0.05;

/// The 2-site, 3-step oracle lattice and its kernels.
#[derive(Debug, Clone)]
pub struct OracleSetup {
    pub lattice: LatticeSpec,
    pub kernels: OracleKernels,
    pub cutoff: usize,
}

impl OracleSetup {
    pub fn new(cutoff: usize) -> Result<Self> {
        let lattice = LatticeSpec::new(2, 3, 1.0, 0.5, 0.0)?;
        let stress = StressTensor::rest(1.0);
        let kernels = OracleKernels {
            g: KernelTable::new(&lattice, Side::Future, 0.5, &stress)?,
            f: KernelTable::new(&lattice, Side::Past, 0.5, &stress)?,
        };
        Ok(Self { lattice, kernels, cutoff })
    }

    pub fn fock(&self) -> Result<FockSpec> {
        self.fock_with(self.cutoff)
    }

    pub fn fock_with(&self, cutoff: usize) -> Result<FockSpec> {
        Ok(FockSpec::full(&self.lattice, cutoff)?)
    }

    /// Branch 0 sits on site 0, branch 1 on site 1, both with density `j`.
    pub fn densities(&self, j: f64) -> Vec<CellField<f64>> {
        (0..2).map(|s| CellField::from_fn(&self.lattice, |c| if c.i == s { j } else { 0.0 })).collect()
    }
}

fn amps() -> [Complex64; 2] {
    [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]
}

/// Commutators of smeared operators: same-type pairs vanish, mixed pairs
/// match their kernel sum, which is zero unless `x` lies in the future of
/// `x'`.
pub fn algebra(setup: &OracleSetup) -> Result<Vec<Check>> {
    let s = setup.fock()?;
    let l = setup.lattice;
    let (f, g) = (&setup.kernels.f, &setup.kernels.g);
    let cells: Vec<Cell> = l.cells().collect();
    let ns: Vec<SparseOp> = cells.iter().map(|&x| s.build_n(x, f)).collect();
    let as_: Vec<SparseOp> = cells.iter().map(|&x| s.build_a(x, g)).collect();
    let (mut same, mut spacelike, mut kernel_sum, mut support) = (0.0f64, 0.0f64, 0.0f64, true);
    let mut herm = 0.0f64;
    let mut psd = true;
    let vol = l.cell_volume();
    for (a, &x) in cells.iter().enumerate() {
        herm = herm.max(ns[a].hermiticity_defect()).max(as_[a].hermiticity_defect());
        psd &= ns[a].real_diagonal().is_some_and(|d| d.iter().all(|v| *v >= 0.0));
        for (b, &xp) in cells.iter().enumerate() {
            same = same.max(ns[a].commutator(&ns[b]).max_abs()).max(as_[a].commutator(&as_[b]).max_abs());
            let na = ns[a].commutator(&as_[b]);
            if l.spacelike(x, xp) {
                spacelike = spacelike.max(na.max_abs());
            }
            let mut expect = SparseOp::zeros(s.dim());
            for &y in s.cells() {
                let c = vol * f.value(x, y) * g.value(xp, y);
                if c != 0.0 {
                    let (ay, ady) = s.ladder(y)?;
                    expect = expect.axpy(Complex64::new(c, 0.0), &ady.sub(&ay));
                }
            }
            kernel_sum = kernel_sum.max(na.sub(&expect).max_abs());
            if expect.nnz() > 0 && !l.in_future_cone(xp, x) {
                support = false;
            }
        }
    }
    Ok(vec![
        Check::with(
            "commuting families [N,N'] and [A,A']",
            same <= ALGEBRA_TOL,
            same,
            0.0,
            ALGEBRA_TOL,
            format!("max entry over all {} cell pairs, cutoff {}", cells.len() * cells.len(), s.cutoff()),
        ),
        Check::with(
            "[N(x),A(x')] vanishes at spacelike separation",
            spacelike <= ALGEBRA_TOL,
            spacelike,
            0.0,
            ALGEBRA_TOL,
            "max entry over spacelike pairs".into(),
        ),
        Check::with(
            "[N(x),A(x')] equals its kernel sum",
            kernel_sum <= ALGEBRA_TOL && support,
            kernel_sum,
            0.0,
            ALGEBRA_TOL,
            format!("max entry of the difference; kernel sum supported only on x future of x': {support}"),
        ),
        Check::with(
            "N and A hermitian, N positive",
            herm <= ALGEBRA_TOL && psd,
            herm,
            0.0,
            ALGEBRA_TOL,
            format!("N diagonal and non-negative: {psd}"),
        ),
    ])
}

/// Joint state after the interaction alone has swept rows `0..rows`.
fn recorded_state(setup: &OracleSetup, s: &FockSpec, j: f64, rows: usize) -> Result<JointState> {
    let mut st = JointState::new(s, &amps(), setup.densities(j))?;
    let free = CollapseParams::new(0.0, 0.01, Integrator::Linear, Scheme::Exponential)?;
    for x in setup.lattice.cells().filter(|c| c.t < rows) {
        apply_advance(s, &mut st, x, 0.0, &free, &setup.kernels);
    }
    Ok(st)
}

/// Advances through spacelike pairs commute as maps on the joint state.
pub fn microcausality(setup: &OracleSetup) -> Result<Check> {
    let s = setup.fock()?;
    let l = setup.lattice;
    let params = CollapseParams::new(0.5, 0.01, Integrator::Linear, Scheme::Exponential)?;
    let base = recorded_state(setup, &s, 1.0, 1)?;
    let noise = NoiseField::new(&l, 5);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for x in l.cells() {
        for y in l.cells() {
            if x < y && l.spacelike(x, y) {
                pairs += 1;
                let run = |order: [Cell; 2]| {
                    let mut st = base.clone();
                    for c in order {
                        apply_advance(&s, &mut st, c, noise.dw(c), &params, &setup.kernels);
                    }
                    st
                };
                let (a, b) = (run([x, y]), run([y, x]));
                let d = a
                    .branches
                    .iter()
                    .flatten()
                    .zip(b.branches.iter().flatten())
                    .map(|(u, v)| (u - v).norm())
                    .fold(0.0, f64::max);
                worst = worst.max(d);
            }
        }
    }
    Ok(Check::with(
        "spacelike advances commute",
        pairs > 0 && worst <= ALGEBRA_TOL,
        worst,
        0.0,
        ALGEBRA_TOL,
        format!("{pairs} spacelike pairs, max amplitude difference"),
    ))
}

/// `[N(x), [N(x), H_pointer]]` for the smeared kernel, as an operator, and
/// its expectation in recorded states.
pub fn smeared_double_commutator(setup: &OracleSetup) -> Result<Check> {
    let s = setup.fock()?;
    let h = s.build_h_pointer()?;
    let st = recorded_state(setup, &s, 1.0, 2)?;
    let (mut op, mut expectation) = (0.0f64, 0.0f64);
    let mut at = Cell::new(0, 0);
    for x in setup.lattice.cells().filter(|c| c.t >= 1) {
        let n = s.build_n(x, &setup.kernels.f);
        let dc = n.commutator(&n.commutator(&h));
        let v = dc.max_abs();
        if v > op {
            op = v;
            at = x;
        }
        expectation = expectation.max(st.expectation(&dc).norm());
    }
    Ok(Check::with(
        "[N,[N,H_pointer]] = 0 for the smeared kernel",
        op == 0.0,
        op,
        0.0,
        0.0,
        format!(
            "largest matrix entry at cell ({}, {}); largest |expectation| in recorded states {:.3e}",
            at.i, at.t, expectation
        ),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub dt: f64,
    pub cell_volume: f64,
    /// `<[n(y),[n(y),H]]>` in a fixed continuum coherent profile.
    pub expectation: f64,
    /// Largest matrix entry of the same operator.
    pub max_entry: f64,
}

/// Single-cell kernel `f = delta / dw`: the double commutator grows as
/// `1 / dw`. One site, three rows, `dt` halved twice at fixed `dx`; the state
/// is the coherent profile `alpha(t) = exp(-i t)`.
pub fn delta_scaling() -> Result<(Check, Vec<DeltaRow>)> {
    let mut rows = Vec::new();
    for dt in [0.2, 0.1, 0.05] {
        let l = LatticeSpec::new(1, 3, 1.0, dt, 0.0)?;
        let s = FockSpec::full(&l, 4)?;
        let h = s.build_h_pointer()?;
        let y = Cell::new(0, 1);
        let n = s.number_density(y)?;
        let dc = n.commutator(&n.commutator(&h));
        let values = CellField::from_fn(&l, |c| Complex64::from_polar(1.0, -(c.t as f64) * dt));
        let psi = coherent_state(&s, &AlphaField::from_values(&l, values)?)?;
        rows.push(DeltaRow {
            dt,
            cell_volume: l.cell_volume(),
            expectation: psi.expectation(&dc).re,
            max_entry: dc.max_abs(),
        });
    }
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[1].expectation / w[0].expectation).collect();
    let worst = ratios.iter().map(|r| (r / 2.0 - 1.0).abs()).fold(0.0, f64::max);
    let check = Check::with(
        "delta-kernel double commutator grows as 1/dw",
        worst <= DELTA_SCALING_TOL,
        worst,
        0.0,
        DELTA_SCALING_TOL,
        format!(
            "ratios on halving dw: {:.4}, {:.4}; operator max-entry ratios {:.3}, {:.3}",
            ratios[0],
            ratios[1],
            rows[1].max_entry / rows[0].max_entry,
            rows[2].max_entry / rows[1].max_entry
        ),
    );
    Ok((check, rows))
}

/// Joint state whose branch records carry a phase rotating in time, so that
/// `<H_pointer>` is not zero.
fn rotating_state(setup: &OracleSetup, s: &FockSpec) -> Result<JointState> {
    let l = setup.lattice;
    let mut st = JointState::new(s, &amps(), setup.densities(1.0))?;
    for (b, c) in amps().into_iter().enumerate() {
        let values = CellField::from_fn(&l, |y| {
            let a = if y.i == b { 0.8 } else { 0.3 };
            Complex64::from_polar(a, -(y.t as f64) * l.dt())
        });
        let psi = coherent_state(s, &AlphaField::from_values(&l, values)?)?;
        st.branches[b] = psi.amps.iter().map(|v| v * c).collect();
    }
    Ok(st)
}

struct EnergySamples {
    pointer: Estimate,
    matter: Estimate,
    /// `-lambda^2 <[N,[N,H]]> dw / 2`, the predicted mean pointer change.
    predicted: f64,
}

fn energy_samples(setup: &OracleSetup, s: &FockSpec, st: &JointState, samples: usize, seed: u64) -> Result<EnergySamples> {
    let l = setup.lattice;
    let lambda = 0.5;
    let params = CollapseParams::new(lambda, 0.01, Integrator::Nonlinear, Scheme::Exponential)?;
    let h = s.build_h_pointer()?;
    let x = Cell::new(0, 2);
    let nu = s.smeared_number_diagonal(&s.mode_weights(x, &setup.kernels.f));
    let energies = [1.0, 2.0];
    let matter = |st: &JointState| st.weights().iter().zip(energies).map(|(w, e)| w * e).sum::<f64>();
    let (h0, m0) = (st.expectation(&h).re, matter(st));
    let mut dh = Vec::with_capacity(samples);
    let mut dm = Vec::with_capacity(samples);
    for k in 0..samples {
        let db = NoiseField::for_path(&l, seed, k as u64).dw(x);
        let mut next = st.clone();
        apply_collapse(s, &mut next, &nu, db, &params);
        dh.push(next.expectation(&h).re - h0);
        dm.push(matter(&next) - m0);
    }
    let n = s.build_n(x, &setup.kernels.f);
    let a = s.build_a(x, &setup.kernels.g);
    let d = expectation_drift(st, |_| &h, &n, &a, x, lambda);
    Ok(EnergySamples {
        pointer: Estimate::of(&dh),
        matter: Estimate::of(&dm),
        predicted: (d.drift - d.exchange) * l.cell_volume(),
    })
}

/// Mean change of pointer and matter energy over one collapse step, in the
/// state left by the interaction on rows 0 and 1. The same statistics in a
/// state with rotating record phases are reported alongside.
pub fn energy_drift(setup: &OracleSetup, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let s = setup.fock()?;
    let rec = energy_samples(setup, &s, &recorded_state(setup, &s, 1.0, 2)?, samples, seed)?;
    let rot = energy_samples(setup, &s, &rotating_state(setup, &s)?, samples, seed)?;
    let (eh, em) = (rec.pointer, rec.matter);
    Ok(vec![
        Check::with(
            "collapse term leaves mean pointer energy unchanged",
            eh.within(0.0, 3.0),
            eh.mean,
            0.0,
            3.0 * eh.se,
            format!(
                "{samples} one-step samples, s.e. {:.3e}; rotating-phase state: mean {:.3e}, s.e. {:.3e}, predicted {:.3e}",
                eh.se, rot.pointer.mean, rot.pointer.se, rot.predicted
            ),
        ),
        Check::with(
            "collapse term leaves mean matter energy unchanged",
            em.within(0.0, 3.0),
            em.mean,
            0.0,
            3.0 * em.se,
            format!(
                "{samples} one-step samples, s.e. {:.3e}; rotating-phase state: mean {:.3e}, s.e. {:.3e}",
                em.se, rot.matter.mean, rot.matter.se
            ),
        ),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub seed: u64,
    pub branch_weight: f64,
    pub exact_weight: f64,
    pub relative_deviation: f64,
}

/// Branch integrator with exact-record `N` profiles against the fully
/// coupled evolution, path by path.
pub fn oracle_equivalence(setup: &OracleSetup, seeds: u64) -> Result<(Check, Vec<OracleRow>)> {
    let s = setup.fock()?;
    let l = setup.lattice;
    let (lambda, j) = (0.1, 2.0);
    let dens = setup.densities(j);
    let profiles: Vec<BranchProfile> = dens
        .iter()
        .map(|d| {
            let n = exact_image(&l, d, &setup.kernels.g, &setup.kernels.f, None);
            BranchProfile::from_density(d.clone()).with_number(n)
        })
        .collect();
    let params = CollapseParams::new(lambda, 0.01, Integrator::Linear, Scheme::Exponential)?;
    let fol = Foliation::standard(&l);
    let b0 = BranchState::new(&l, &amps(), profiles.into(), false)?;
    let j0 = JointState::new(&s, &amps(), dens)?;
    let mut rows = Vec::new();
    let mut spread = 0.0f64;
    for seed in 0..seeds {
        let noise = NoiseField::new(&l, seed);
        let wb = evolve(&b0, &fol, &noise, &params)?.weights();
        let we = evolve_exact(&s, &j0, &fol, &noise, &params, &setup.kernels)?.weights();
        let dev = (0..2).map(|i| ((wb[i] - we[i]) / we[i]).abs()).fold(0.0, f64::max);
        spread = spread.max((we[0] - amps()[0].norm_sqr()).abs());
        rows.push(OracleRow { seed, branch_weight: wb[0], exact_weight: we[0], relative_deviation: dev });
    }
    let worst = rows.iter().map(|r| r.relative_deviation).fold(0.0, f64::max);
    Ok((
        Check::with(
            "branch integrator matches exact Fock evolution",
            worst <= ORACLE_TOL,
            worst,
            0.0,
            ORACLE_TOL,
            format!(
                "{seeds} noise seeds, 2x3 cells, cutoff {}, lambda {lambda}, J {j}; largest weight movement {:.3}",
                s.cutoff(),
                spread
            ),
        ),
        rows,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub cutoff: usize,
    pub expectations: Vec<f64>,
}

/// Expectations after a full coupled run at cutoffs `d - 2`, `d`, `d + 2`:
/// the second change must be at least four times smaller than the first.
pub fn truncation_convergence(setup: &OracleSetup) -> Result<(Check, Vec<ConvergenceRow>)> {
    let l = setup.lattice;
    let params = CollapseParams::new(0.3, 0.01, Integrator::Linear, Scheme::Exponential)?;
    let noise = NoiseField::new(&l, 3);
    let fol = Foliation::standard(&l);
    let d = setup.cutoff;
    let mut rows = Vec::new();
    for cutoff in [d - 2, d, d + 2] {
        let s = setup.fock_with(cutoff)?;
        let j0 = JointState::new(&s, &amps(), setup.densities(1.0))?;
        let st = evolve_exact(&s, &j0, &fol, &noise, &params, &setup.kernels)?;
        let mut e = st.weights();
        for i in 0..l.sites() {
            e.push(st.expectation(&s.build_n(Cell::new(i, l.steps() - 1), &setup.kernels.f)).re);
        }
        rows.push(ConvergenceRow { cutoff, expectations: e });
    }
    let mut worst = 0.0f64;
    let mut ok = true;
    for k in 0..rows[0].expectations.len() {
        let d1 = (rows[1].expectations[k] - rows[0].expectations[k]).abs();
        let d2 = (rows[2].expectations[k] - rows[1].expectations[k]).abs();
        ok &= 4.0 * d2 <= d1 || d2 <= 1e-14;
        if d1 > 0.0 {
            worst = worst.max(d2 / d1);
        }
    }
    Ok((
        Check::with(
            "truncation converges geometrically in the cutoff",
            ok,
            worst,
            0.0,
            0.25,
            format!("largest ratio of successive changes over cutoffs {}, {}, {}", d - 2, d, d + 2),
        ),
        rows,
    ))
}

/// `<alpha| N(x) |alpha>` in the Fock space against the record formula.
pub fn coherent_cross_check(setup: &OracleSetup) -> Result<Check> {
    let l = setup.lattice;
    let s = setup.fock_with(5)?;
    let dens = setup.densities(1.0);
    let alpha = accumulate_alpha(&dens[0], &Foliation::standard(&l), &setup.kernels.g);
    let psi = coherent_state(&s, &alpha)?;
    let mut worst = 0.0f64;
    for x in l.cells() {
        let exact = psi.expectation(&s.build_n(x, &setup.kernels.f)).re;
        let record = n_expectation(&alpha, x, &setup.kernels.f);
        worst = worst.max((exact - record).abs() / record.abs().max(1e-12));
    }
    Ok(Check::with(
        "coherent record reproduces the smeared number expectation",
        worst <= 1e-3,
        worst,
        0.0,
        1e-3,
        "largest relative difference over cells, cutoff 5".into(),
    ))
}

/// Largest entry of `[H, A(x)] + i D_t A(x)` relative to that of `D_t A(x)`
/// on interior rows: how well the pointer Hamiltonian generates time
/// translations of the smeared quadrature on this lattice.
pub fn time_translation_residual(setup: &OracleSetup) -> Result<f64> {
    let s = setup.fock()?;
    let h = s.build_h_pointer()?;
    let l = setup.lattice;
    let g = &setup.kernels.g;
    let mut worst = 0.0f64;
    for i in 0..l.sites() {
        for t in 1..l.steps() - 1 {
            let a_up = s.build_a(Cell::new(i, t + 1), g);
            let a_dn = s.build_a(Cell::new(i, t - 1), g);
            let d = a_up.sub(&a_dn).scale(Complex64::new(0.5 / l.dt(), 0.0));
            let r = h.commutator(&s.build_a(Cell::new(i, t), g)).axpy(Complex64::new(0.0, 1.0), &d);
            let scale = d.max_abs();
            if scale > 0.0 {
                worst = worst.max(r.max_abs() / scale);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_holds_at_small_cutoff() {
        let setup = OracleSetup::new(2).unwrap();
        for c in algebra(&setup).unwrap() {
            assert!(c.passed, "{}", c.line());
        }
        assert!(microcausality(&setup).unwrap().passed);
    }

    #[test]
    fn densities_sit_on_one_site_each() {
        let setup = OracleSetup::new(2).unwrap();
        let d = setup.densities(3.0);
        for (c, v) in d[1].iter() {
            assert_eq!(*v, if c.i == 1 { 3.0 } else { 0.0 });
        }
    }
}
