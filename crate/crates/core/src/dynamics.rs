//! Branch-diagonal collapse dynamics.
//!
//! The state is `sum_i c_i |J_i>|alpha_i>` with every branch an exact joint
//! eigenstate of the smeared number operators, so an advance through cell `x`
//! only rescales each `c_i` by a function of `N_i(x)`. Amplitudes are kept as
//! log-magnitude plus phase so that long linear-measure paths cannot
//! underflow.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::lattice::{Cell, LatticeSpec, Surface};
use crate::pointer::BranchProfile;
use crate::{Error, Result};

/// Which measure the state evolves under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Unnormalized evolution driven by `dW` under the defining measure;
    /// the squared norm is the path weight.
    Linear,
    /// Normalized evolution driven by `dB` under the physical measure.
    #[default]
    Nonlinear,
}

/// Discretization of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Geometric step; keeps weights positive and makes the one-step Gaussian
    /// form exact.
    #[default]
    Exponential,
    /// First-order Itô step `1 - lambda^2 N^2 dw / 2 + lambda N dW`.
    Euler,
}

/// Switches for the individual terms of the step, used to check that each of
/// them is observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DynamicsTerms {
    /// The `lambda^2` drift.
    pub drift: bool,
    /// The `lambda dW` diffusion.
    pub diffusion: bool,
    /// The shift by `<N>` that turns `dW` into `dB`: centring in the nonlinear
    /// step and the norm weight of linear paths.
    pub measure_change: bool,
}

impl Default for DynamicsTerms {
    fn default() -> Self {
        Self { drift: true, diffusion: true, measure_change: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseParams {
    pub lambda: f64,
    /// A path counts as collapsed once some normalized weight exceeds
    /// `1 - epsilon`.
    pub epsilon: f64,
    pub integrator: Integrator,
    pub scheme: Scheme,
    pub terms: DynamicsTerms,
}

impl CollapseParams {
    pub fn new(lambda: f64, epsilon: f64, integrator: Integrator, scheme: Scheme) -> Result<Self> {
        let p = Self { lambda, epsilon, integrator, scheme, terms: DynamicsTerms::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config("lambda must be non-negative and finite"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::Config("epsilon must lie in (0, 1/2)"));
        }
        Ok(())
    }

    pub fn with_terms(mut self, terms: DynamicsTerms) -> Self {
        self.terms = terms;
        self
    }
}

/// Superposition of branches with per-branch `N` profiles.
#[derive(Debug, Clone)]
pub struct BranchState {
    log_mag: Vec<f64>,
    phase: Vec<f64>,
    profiles: Arc<[BranchProfile]>,
    surface: Surface,
    normalized: bool,
}

fn log_sum_exp(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = v.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + libm::log(v.map(|x| libm::exp(x - m)).sum::<f64>())
}

impl BranchState {
    /// Builds a state on the initial surface of `spec`. `normalized` selects
    /// the physical-measure representation, in which the amplitudes are
    /// rescaled to unit norm.
    pub fn new(
        spec: &LatticeSpec,
        amplitudes: &[Complex64],
        profiles: Arc<[BranchProfile]>,
        normalized: bool,
    ) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.len() != profiles.len() {
            return Err(Error::Config("need one profile per amplitude and at least one branch"));
        }
        for p in profiles.iter() {
            p.validate(spec)?;
        }
        for a in 0..profiles.len() {
            for b in a + 1..profiles.len() {
                if profiles[a] == profiles[b] {
                    return Err(Error::Config("branch profiles must be distinct"));
                }
            }
        }
        if amplitudes.iter().any(|c| !c.is_finite()) || amplitudes.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::Config("amplitudes must be finite and not all zero"));
        }
        let mut s = Self {
            log_mag: amplitudes.iter().map(|c| libm::log(c.norm())).collect(),
            phase: amplitudes.iter().map(|c| c.arg()).collect(),
            profiles,
            surface: Surface::initial(spec),
            normalized,
        };
        if normalized {
            s.renormalize();
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.log_mag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_mag.is_empty()
    }

    pub fn profiles(&self) -> &Arc<[BranchProfile]> {
        &self.profiles
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn amplitude(&self, i: usize) -> Complex64 {
        Complex64::from_polar(libm::exp(self.log_mag[i]), self.phase[i])
    }

    pub fn log_magnitudes(&self) -> &[f64] {
        &self.log_mag
    }

    /// `ln <Phi|Phi>`.
    pub fn log_norm2(&self) -> f64 {
        log_sum_exp(self.log_mag.iter().map(|l| 2.0 * l))
    }

    /// `<Phi|Phi>`; may be infinite for very long linear paths, see
    /// [`Self::log_norm2`].
    pub fn norm2(&self) -> f64 {
        libm::exp(self.log_norm2())
    }

    /// Normalized weights `|c_i|^2 / sum |c_j|^2`.
    pub fn weights(&self) -> Vec<f64> {
        let z = self.log_norm2();
        self.log_mag.iter().map(|l| libm::exp(2.0 * l - z)).collect()
    }

    fn renormalize(&mut self) {
        let half = 0.5 * self.log_norm2();
        for l in &mut self.log_mag {
            *l -= half;
        }
    }

    /// `sum_i w_i N_i(x)`.
    pub fn quantum_expectation_n(&self, x: Cell) -> f64 {
        // normalized states are renormalized after every step
        let z = if self.normalized { 0.0 } else { self.log_norm2() };
        self.log_mag.iter().zip(self.profiles.iter()).map(|(l, p)| libm::exp(2.0 * l - z) * p.n[x]).sum()
    }

    pub fn variance_n(&self, x: Cell) -> f64 {
        self.covariance_n(x, x)
    }

    /// `sum_i w_i N_i(x) N_i(y) - <N(x)><N(y)>`.
    pub fn covariance_n(&self, x: Cell, y: Cell) -> f64 {
        let w = self.weights();
        let (mut exy, mut ex, mut ey) = (0.0, 0.0, 0.0);
        for (wi, p) in w.iter().zip(self.profiles.iter()) {
            exy += wi * p.n[x] * p.n[y];
            ex += wi * p.n[x];
            ey += wi * p.n[y];
        }
        exy - ex * ey
    }

    /// `sum_{x1} Var(N(x1, t)) dx` on time row `t`.
    pub fn variance_integral(&self, spec: &LatticeSpec, t: usize) -> f64 {
        let w = self.weights();
        let mut total = 0.0;
        for i in 0..spec.sites() {
            let c = Cell::new(i, t);
            let (mut m2, mut m1) = (0.0, 0.0);
            for (wi, p) in w.iter().zip(self.profiles.iter()) {
                let n = p.n[c];
                m1 += wi * n;
                m2 += wi * n * n;
            }
            total += (m2 - m1 * m1).max(0.0);
        }
        total * spec.dx()
    }

    /// Whether every branch has the same `N` at `x`, so a step there cannot
    /// change the normalized weights.
    pub fn degenerate_at(&self, x: Cell) -> bool {
        let n0 = self.profiles[0].n[x];
        self.profiles.iter().all(|p| p.n[x] == n0)
    }

    fn take_cell(&mut self, spec: &LatticeSpec, cell: Cell) -> Result<()> {
        if cell.i >= spec.sites() || cell.t >= spec.steps() {
            return Err(Error::OutOfLattice { i: cell.i, t: cell.t });
        }
        if !self.surface.lies_on(cell) {
            return Err(Error::Sequencing { i: cell.i, t: cell.t });
        }
        self.surface.advance_in_place(spec, cell.i).map(|_| ())
    }

    fn apply_factor(&mut self, i: usize, exponent: f64, factor: Option<f64>) {
        match factor {
            None => self.log_mag[i] += exponent,
            Some(f) => {
                self.log_mag[i] += libm::log(libm::fabs(f));
                if f < 0.0 {
                    self.phase[i] += PI;
                }
            }
        }
    }

    /// One linear-measure advance through `cell` driven by `dw`.
    pub fn step_linear(&mut self, spec: &LatticeSpec, cell: Cell, dw: f64, params: &CollapseParams) -> Result<()> {
        if self.normalized {
            return Err(Error::Config("linear step needs an unnormalized state"));
        }
        self.take_cell(spec, cell)?;
        let (l, vol) = (params.lambda, spec.cell_volume());
        let drift = if params.terms.drift { 1.0 } else { 0.0 };
        let diff = if params.terms.diffusion { 1.0 } else { 0.0 };
        for i in 0..self.len() {
            let n = self.profiles[i].n[cell];
            match params.scheme {
                Scheme::Exponential => {
                    self.apply_factor(i, -drift * l * l * n * n * vol + diff * l * n * dw, None)
                }
                Scheme::Euler => self.apply_factor(
                    i,
                    0.0,
                    Some(1.0 - drift * 0.5 * l * l * n * n * vol + diff * l * n * dw),
                ),
            }
        }
        if self.log_mag.iter().any(|v| !v.is_finite() && *v > 0.0) || !self.log_norm2().is_finite() {
            return Err(Error::Overflow { i: cell.i, t: cell.t });
        }
        Ok(())
    }

    /// One physical-measure advance through `cell` driven by `db`, followed by
    /// renormalization.
    pub fn step_nonlinear(&mut self, spec: &LatticeSpec, cell: Cell, db: f64, params: &CollapseParams) -> Result<()> {
        if !self.normalized {
            return Err(Error::Config("nonlinear step needs a normalized state"));
        }
        self.take_cell(spec, cell)?;
        let mean = if params.terms.measure_change { self.quantum_expectation_n(cell) } else { 0.0 };
        let (l, vol) = (params.lambda, spec.cell_volume());
        let drift = if params.terms.drift { 1.0 } else { 0.0 };
        let diff = if params.terms.diffusion { 1.0 } else { 0.0 };
        for i in 0..self.len() {
            let d = self.profiles[i].n[cell] - mean;
            match params.scheme {
                Scheme::Exponential => self.apply_factor(i, -drift * l * l * d * d * vol + diff * l * d * db, None),
                Scheme::Euler => {
                    self.apply_factor(i, 0.0, Some(1.0 - drift * 0.5 * l * l * d * d * vol + diff * l * d * db))
                }
            }
        }
        self.renormalize();
        if !self.log_norm2().is_finite() {
            return Err(Error::Overflow { i: cell.i, t: cell.t });
        }
        Ok(())
    }

    /// Dispatches on `params.integrator`; `noise` is `dW` for linear and `dB`
    /// for nonlinear evolution.
    pub fn step(&mut self, spec: &LatticeSpec, cell: Cell, noise: f64, params: &CollapseParams) -> Result<()> {
        match params.integrator {
            Integrator::Linear => self.step_linear(spec, cell, noise, params),
            Integrator::Nonlinear => self.step_nonlinear(spec, cell, noise, params),
        }
    }

    /// Moves the surface through `cell` without touching the amplitudes.
    pub fn skip(&mut self, spec: &LatticeSpec, cell: Cell) -> Result<()> {
        self.take_cell(spec, cell)
    }

    /// `dB = dW - 2 lambda <N(x)> dw` at the current state.
    pub fn db_from_dw(&self, spec: &LatticeSpec, cell: Cell, dw: f64, lambda: f64) -> f64 {
        dw - 2.0 * lambda * self.quantum_expectation_n(cell) * spec.cell_volume()
    }

    /// Index and value of the largest normalized weight.
    pub fn leading(&self) -> (usize, f64) {
        let (i, l) = self
            .log_mag
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, (i, v)| if v > a.1 { (i, v) } else { a });
        (i, libm::exp(2.0 * l - self.log_norm2()))
    }
}

/// Radon-Nikodym weight of a linear-measure path: its final squared norm.
pub fn path_weight(state: &BranchState) -> f64 {
    state.norm2()
}

/// Normalized `|c_j|^2`.
pub fn projector_expectation(state: &BranchState, j: usize) -> Result<f64> {
    if j >= state.len() {
        return Err(Error::NoBranch(j));
    }
    Ok(state.weights()[j])
}

/// Collapse-time estimate and where it was evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseTime {
    /// `Var[N(x)] / (lambda^2 sum_y dx Cov[N(x), N(y)]^2)` on row `t`.
    pub tau: f64,
    /// Reference cell: the maximizer of `Var[N]` on the row.
    pub reference: Cell,
    /// `1 / (lambda^2 V J^4)` when the state is two branches of a single
    /// plateau height `J` differing on a length `V`.
    pub closed_form: Option<f64>,
}

pub fn collapse_time_estimate(state: &BranchState, spec: &LatticeSpec, t: usize, lambda: f64) -> Result<CollapseTime> {
    if state.len() < 2 {
        return Err(Error::NoVariance);
    }
    let (mut reference, mut var) = (Cell::new(0, t), 0.0);
    for i in 0..spec.sites() {
        let c = Cell::new(i, t);
        let v = state.variance_n(c);
        if v > var {
            var = v;
            reference = c;
        }
    }
    if var <= 0.0 {
        return Err(Error::NoVariance);
    }
    let cov2: f64 = (0..spec.sites())
        .map(|i| {
            let c = state.covariance_n(reference, Cell::new(i, t));
            c * c * spec.dx()
        })
        .sum();
    let tau = var / (lambda * lambda * cov2);
    Ok(CollapseTime { tau, reference, closed_form: two_plateau_tau(state, spec, t, lambda) })
}

/// `1 / (lambda^2 V J^4)` for two branches whose nonzero `|J|` on row `t` all
/// share one value.
pub fn two_plateau_tau(state: &BranchState, spec: &LatticeSpec, t: usize, lambda: f64) -> Option<f64> {
    if state.len() != 2 {
        return None;
    }
    let (a, b) = (&state.profiles[0].j, &state.profiles[1].j);
    let mut level: Option<f64> = None;
    let mut differ = 0usize;
    for i in 0..spec.sites() {
        let c = Cell::new(i, t);
        for v in [a[c], b[c]] {
            if v != 0.0 {
                match level {
                    None => level = Some(libm::fabs(v)),
                    Some(l) if l != libm::fabs(v) => return None,
                    _ => {}
                }
            }
        }
        if a[c] != b[c] {
            differ += 1;
        }
    }
    let j = level?;
    let v = differ as f64 * spec.dx();
    (v > 0.0).then(|| 1.0 / (lambda * lambda * v * j * j * j * j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CellField;
    use crate::pointer::plateau_density;

    fn two_lumps(spec: &LatticeSpec, amps: [f64; 2]) -> BranchState {
        let p: Arc<[BranchProfile]> = Arc::from(alloc::vec![
            lump(spec, (-1.0, 0.0)),
            lump(spec, (0.0, 1.0)),
        ]);
        let c = [Complex64::new(amps[0], 0.0), Complex64::new(amps[1], 0.0)];
        BranchState::new(spec, &c, p, true).unwrap()
    }

    fn lump(spec: &LatticeSpec, region: (f64, f64)) -> BranchProfile {
        let j = plateau_density(spec, &[region], 10.0);
        let n = j.map(|v| v * v);
        BranchProfile::from_density(j).with_number(n)
    }

    fn small_spec() -> LatticeSpec {
        LatticeSpec::new(60, 10, 0.05, 1e-6, -1.475).unwrap()
    }

    #[test]
    fn expectation_and_variance_of_equal_superposition() {
        let s = small_spec();
        let st = two_lumps(&s, [1.0, 1.0]);
        let x = Cell::new(15, 0);
        assert!((st.quantum_expectation_n(x) - 50.0).abs() < 1e-12);
        assert!((st.variance_n(x) - 2500.0).abs() < 1e-9);
        assert_eq!(st.covariance_n(x, x), st.variance_n(x));
        assert!((st.variance_integral(&s, 0) - 5000.0).abs() < 1e-6);
    }

    #[test]
    fn single_branch_has_no_variance() {
        let s = small_spec();
        let p: Arc<[BranchProfile]> = Arc::from(alloc::vec![lump(&s, (-1.0, 0.0))]);
        let st = BranchState::new(&s, &[Complex64::new(3.0, 0.0)], p, true).unwrap();
        assert_eq!(st.variance_n(Cell::new(15, 0)), 0.0);
        assert!((st.quantum_expectation_n(Cell::new(15, 0)) - 100.0).abs() < 1e-12);
        assert!(matches!(collapse_time_estimate(&st, &s, 0, 0.5), Err(Error::NoVariance)));
    }

    #[test]
    fn weights_ignore_global_scale() {
        let s = small_spec();
        let p: Arc<[BranchProfile]> = Arc::from(alloc::vec![lump(&s, (-1.0, 0.0)), lump(&s, (0.0, 1.0))]);
        let a = BranchState::new(&s, &[Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.4)], p.clone(), false).unwrap();
        let b = BranchState::new(&s, &[Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)], p, false).unwrap();
        let (wa, wb) = (a.weights(), b.weights());
        assert!((wa[0] - wb[0]).abs() < 1e-15 && (wa[0] - 0.36).abs() < 1e-12);
        assert!((path_weight(&a) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_changes_nothing() {
        let s = small_spec();
        let params = CollapseParams::new(0.0, 0.01, Integrator::Linear, Scheme::Exponential).unwrap();
        let p = two_lumps(&s, [1.0, 1.0]).profiles().clone();
        let mut st = BranchState::new(&s, &[Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)], p, false).unwrap();
        for i in 0..60 {
            st.step_linear(&s, Cell::new(i, 0), 0.3, &params).unwrap();
        }
        assert!((st.amplitude(0).re - 0.6).abs() < 1e-15);
        assert!((st.amplitude(1).re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn one_step_gaussian_form() {
        // c_i ratio equals exp(-lambda^2 [N_i - dW/(2 lambda dw)]^2 dw) ratio
        let s = LatticeSpec::new(1, 2, 1.0, 0.5, 0.0).unwrap();
        let n1 = CellField::filled(&s, 3.0);
        let n2 = CellField::filled(&s, 1.0);
        let p: Arc<[BranchProfile]> = Arc::from(alloc::vec![
            BranchProfile::from_density(n1.clone()).with_number(n1),
            BranchProfile::from_density(n2.clone()).with_number(n2),
        ]);
        let params = CollapseParams::new(0.7, 0.01, Integrator::Linear, Scheme::Exponential).unwrap();
        let mut st = BranchState::new(&s, &[Complex64::new(1.0, 0.0); 2], p, false).unwrap();
        let (dw, vol, l) = (0.37, 0.5, 0.7);
        st.step_linear(&s, Cell::new(0, 0), dw, &params).unwrap();
        let gauss = |n: f64| -l * l * (n - dw / (2.0 * l * vol)).powi(2) * vol;
        let got = st.log_magnitudes()[0] - st.log_magnitudes()[1];
        assert!((got - (gauss(3.0) - gauss(1.0))).abs() < 1e-12);
    }

    #[test]
    fn sequencing_is_enforced() {
        let s = small_spec();
        let params = CollapseParams::new(0.5, 0.01, Integrator::Nonlinear, Scheme::Exponential).unwrap();
        let mut st = two_lumps(&s, [1.0, 1.0]);
        assert!(matches!(st.step_nonlinear(&s, Cell::new(0, 1), 0.0, &params), Err(Error::Sequencing { .. })));
        assert!(matches!(st.step_linear(&s, Cell::new(0, 0), 0.0, &params), Err(Error::Config(_))));
    }

    #[test]
    fn symmetric_drift_keeps_equal_weights() {
        let s = small_spec();
        let params = CollapseParams::new(0.5, 0.01, Integrator::Nonlinear, Scheme::Exponential).unwrap();
        let mut st = two_lumps(&s, [1.0, 1.0]);
        for t in 0..3 {
            for i in 0..60 {
                st.step_nonlinear(&s, Cell::new(i, t), 0.0, &params).unwrap();
            }
        }
        let w = st.weights();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_branch_nonlinear_is_inert() {
        let s = small_spec();
        let params = CollapseParams::new(0.5, 0.01, Integrator::Nonlinear, Scheme::Euler).unwrap();
        let p: Arc<[BranchProfile]> = Arc::from(alloc::vec![lump(&s, (-1.0, 0.0))]);
        let mut st = BranchState::new(&s, &[Complex64::new(1.0, 0.0)], p, true).unwrap();
        for i in 0..60 {
            st.step_nonlinear(&s, Cell::new(i, 0), 1e-3 * i as f64, &params).unwrap();
        }
        assert!((st.amplitude(0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn nonlinear_equals_normalized_linear_pathwise() {
        let s = LatticeSpec::new(4, 6, 0.5, 0.25, 0.0).unwrap();
        let n1 = CellField::from_fn(&s, |c| (c.i + 1) as f64);
        let n2 = CellField::from_fn(&s, |c| (c.t % 3) as f64);
        let p: Arc<[BranchProfile]> = Arc::from(alloc::vec![
            BranchProfile::from_density(n1.clone()).with_number(n1),
            BranchProfile::from_density(n2.clone()).with_number(n2),
        ]);
        let amps = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let lin = CollapseParams::new(0.4, 0.01, Integrator::Linear, Scheme::Exponential).unwrap();
        let non = CollapseParams { integrator: Integrator::Nonlinear, ..lin };
        let mut a = BranchState::new(&s, &amps, p.clone(), false).unwrap();
        let mut b = BranchState::new(&s, &amps, p, true).unwrap();
        for (k, c) in s.cells().enumerate() {
            let dw = 0.2 * libm::sin(k as f64);
            let db = a.db_from_dw(&s, c, dw, 0.4);
            a.step_linear(&s, c, dw, &lin).unwrap();
            b.step_nonlinear(&s, c, db, &non).unwrap();
            let (wa, wb) = (a.weights(), b.weights());
            assert!((wa[0] - wb[0]).abs() < 1e-12);
        }
        assert!((b.amplitude(1).arg() - a.amplitude(1).arg()).abs() < 1e-15);
    }

    #[test]
    fn two_lump_collapse_times() {
        let s = LatticeSpec::new(60, 2, 0.05, 1e-6, -1.475).unwrap();
        let st = two_lumps(&s, [1.0, 1.0]);
        let ct = collapse_time_estimate(&st, &s, 0, 0.5).unwrap();
        assert!((ct.closed_form.unwrap() - 2e-4).abs() < 1e-12);
        assert!((ct.tau - 8e-4).abs() < 1e-12);
        assert!((projector_expectation(&st, 1).unwrap() - 0.5).abs() < 1e-12);
        assert!(projector_expectation(&st, 2).is_err());
    }
}
