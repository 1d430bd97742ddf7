use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::op::{expm_small, SparseOp};
use super::space::FockSpec;
use crate::dynamics::{CollapseParams, Integrator, Scheme};
use crate::field::CellField;
use crate::kernel::KernelTable;
use crate::lattice::{Cell, Foliation, Surface};
use crate::noise::NoiseSource;
use crate::pointer::AlphaField;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Fock-space vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub amps: Vec<Complex64>,
}

impl FockState {
    pub fn vacuum(spec: &FockSpec) -> Self {
        let mut amps = vec![ZERO; spec.dim()];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn norm2(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<psi| O |psi> / <psi|psi>`.
    pub fn expectation(&self, op: &SparseOp) -> Complex64 {
        op.sandwich(&self.amps) / self.norm2()
    }
}

/// Normalized product of truncated coherent states with `a(y)|alpha> =
/// alpha(y)|alpha>`. Every mode must have mean occupation
/// `|alpha|^2 dw < cutoff / 3`.
pub fn coherent_state(spec: &FockSpec, alpha: &AlphaField) -> Result<FockState> {
    let vol = spec.lattice().cell_volume();
    let d = spec.cutoff();
    let mut factors: Vec<Vec<Complex64>> = Vec::with_capacity(spec.modes());
    for &c in spec.cells() {
        let beta = alpha.get(c) * libm::sqrt(vol);
        let mean = beta.norm_sqr();
        if !(mean < d as f64 / 3.0) {
            return Err(Error::Occupancy { mean, cutoff: d });
        }
        let mut v = Vec::with_capacity(d + 1);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..=d {
            if n > 0 {
                term = term * beta / libm::sqrt(n as f64);
            }
            v.push(term);
        }
        let norm = libm::sqrt(v.iter().map(|x| x.norm_sqr()).sum::<f64>());
        factors.push(v.into_iter().map(|x| x / norm).collect());
    }
    let amps = (0..spec.dim())
        .map(|b| {
            factors
                .iter()
                .enumerate()
                .fold(Complex64::new(1.0, 0.0), |acc, (m, f)| acc * f[spec.occupation(b, m)])
        })
        .collect();
    Ok(FockState { amps })
}

/// `|| (a(z) - alpha(z)) |psi> ||` for a normalized `psi`.
pub fn eigen_residual(spec: &FockSpec, psi: &FockState, z: Cell, alpha: Complex64) -> Result<f64> {
    let (a, _) = spec.ladder(z)?;
    let av = a.apply(&psi.amps);
    Ok(libm::sqrt(av.iter().zip(&psi.amps).map(|(x, p)| (x - alpha * p).norm_sqr()).sum::<f64>()))
}

/// Matter branches tensored with the pointer Fock space:
/// `sum_i |J_i> (x) psi_i`, with the branch amplitude folded into `psi_i`.
#[derive(Debug, Clone)]
pub struct JointState {
    pub branches: Vec<Vec<Complex64>>,
    pub densities: Vec<CellField<f64>>,
    surface: Surface,
}

impl JointState {
    /// Pointer vacuum in every branch.
    pub fn new(spec: &FockSpec, amplitudes: &[Complex64], densities: Vec<CellField<f64>>) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.len() != densities.len() {
            return Err(Error::Config("need one density per amplitude and at least one branch"));
        }
        if densities.iter().any(|j| !j.matches(spec.lattice())) {
            return Err(Error::LatticeMismatch);
        }
        let vac = FockState::vacuum(spec).amps;
        let branches = amplitudes.iter().map(|&c| vac.iter().map(|v| v * c).collect()).collect();
        Ok(Self { branches, densities, surface: Surface::initial(spec.lattice()) })
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn norm2(&self) -> f64 {
        self.branches.iter().flatten().map(|a| a.norm_sqr()).sum()
    }

    /// `||psi_i||^2 / sum_j ||psi_j||^2`.
    pub fn weights(&self) -> Vec<f64> {
        let z = self.norm2();
        self.branches.iter().map(|b| b.iter().map(|a| a.norm_sqr()).sum::<f64>() / z).collect()
    }

    /// Normalized expectation of a branch-diagonal operator given block-wise.
    pub fn expectation_blocks<'a>(&self, op: impl Fn(usize) -> &'a SparseOp) -> Complex64 {
        let z = self.norm2();
        self.branches.iter().enumerate().map(|(i, b)| op(i).sandwich(b)).sum::<Complex64>() / z
    }

    /// Normalized expectation of an operator acting on the pointer only.
    pub fn expectation(&self, op: &SparseOp) -> Complex64 {
        self.expectation_blocks(|_| op)
    }

    fn renormalize(&mut self) {
        let s = 1.0 / libm::sqrt(self.norm2());
        for v in self.branches.iter_mut().flatten() {
            *v *= s;
        }
    }
}

/// Applies `exp(-i theta (a_m + a_m^dagger))` with unscaled ladders to mode `m`.
fn apply_mode_unitary(spec: &FockSpec, psi: &mut [Complex64], m: usize, theta: f64) {
    let d = spec.cutoff() + 1;
    let mut x = vec![ZERO; d * d];
    for n in 1..d {
        let s = Complex64::new(0.0, -theta * libm::sqrt(n as f64));
        x[(n - 1) * d + n] = s;
        x[n * d + n - 1] = s;
    }
    let u = expm_small(&x, d);
    let stride = (spec.cutoff() + 1).pow(m as u32);
    let mut fibre = vec![ZERO; d];
    for b in 0..spec.dim() {
        if spec.occupation(b, m) != 0 {
            continue;
        }
        for (n, f) in fibre.iter_mut().enumerate() {
            *f = psi[b + n * stride];
        }
        for r in 0..d {
            psi[b + r * stride] = (0..d).map(|c| u[r * d + c] * fibre[c]).sum();
        }
    }
}

/// `exp(-i J A(x) dw)` on one branch.
pub fn apply_interaction(spec: &FockSpec, psi: &mut [Complex64], x: Cell, j: f64, g: &KernelTable) {
    if j == 0.0 {
        return;
    }
    let vol = spec.lattice().cell_volume();
    for (m, w) in spec.mode_weights(x, g).into_iter().enumerate() {
        if w != 0.0 {
            apply_mode_unitary(spec, psi, m, j * vol * libm::sqrt(vol) * w);
        }
    }
}

/// Kernel tables used by the oracle evolution.
#[derive(Debug, Clone)]
pub struct OracleKernels {
    pub g: KernelTable,
    pub f: KernelTable,
}

/// Full advance through `x` (interaction then collapse), without surface
/// bookkeeping; `noise` is `dW` or `dB` depending on the integrator.
pub fn apply_advance(
    spec: &FockSpec,
    state: &mut JointState,
    x: Cell,
    noise: f64,
    params: &CollapseParams,
    kernels: &OracleKernels,
) {
    for (psi, j) in state.branches.iter_mut().zip(&state.densities) {
        apply_interaction(spec, psi, x, j[x], &kernels.g);
    }
    let nu = spec.smeared_number_diagonal(&spec.mode_weights(x, &kernels.f));
    apply_collapse(spec, state, &nu, noise, params);
}

/// Collapse factor with smeared number eigenvalues `nu` on the basis states.
pub fn apply_collapse(spec: &FockSpec, state: &mut JointState, nu: &[f64], noise: f64, params: &CollapseParams) {
    let vol = spec.lattice().cell_volume();
    let l = params.lambda;
    let centre = match params.integrator {
        Integrator::Linear => 0.0,
        Integrator::Nonlinear => {
            let z = state.norm2();
            state
                .branches
                .iter()
                .flatten()
                .enumerate()
                .map(|(k, a)| a.norm_sqr() * nu[k % spec.dim()])
                .sum::<f64>()
                / z
        }
    };
    for psi in &mut state.branches {
        for (a, &n) in psi.iter_mut().zip(nu) {
            let d = n - centre;
            let f = match params.scheme {
                Scheme::Exponential => libm::exp(-l * l * d * d * vol + l * d * noise),
                Scheme::Euler => 1.0 - 0.5 * l * l * d * d * vol + l * d * noise,
            };
            *a *= f;
        }
    }
    if params.integrator == Integrator::Nonlinear {
        state.renormalize();
    }
}

/// Fully coupled evolution along `foliation`.
pub fn evolve_exact<N: NoiseSource>(
    spec: &FockSpec,
    state0: &JointState,
    foliation: &Foliation,
    noise: &N,
    params: &CollapseParams,
    kernels: &OracleKernels,
) -> Result<JointState> {
    if state0.surface() != foliation.initial() {
        return Err(Error::Config("state and foliation start on different surfaces"));
    }
    let mut st = state0.clone();
    for &x in foliation.cells() {
        spec.mode(x)?;
        if !st.surface.lies_on(x) {
            return Err(Error::Sequencing { i: x.i, t: x.t });
        }
        st.surface.advance_in_place(spec.lattice(), x.i)?;
        apply_advance(spec, &mut st, x, noise.dw(x), params, kernels);
    }
    Ok(st)
}

/// Deterministic and stochastic coefficients of `d<O>` per unit `dw`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    /// `-i <[O, J A]> - lambda^2 <[N, [N, O]]> / 2`.
    pub drift: f64,
    /// `lambda (<{O, N}> - 2 <O><N>)`.
    pub diffusion: f64,
    /// The `J A` part of `drift` alone.
    pub exchange: f64,
}

/// Drift and diffusion of a branch-diagonal observable given block-wise.
pub fn expectation_drift<'a>(
    state: &JointState,
    o: impl Fn(usize) -> &'a SparseOp,
    n: &SparseOp,
    a: &SparseOp,
    x: Cell,
    lambda: f64,
) -> Drift {
    let i = Complex64::new(0.0, 1.0);
    let mut exchange = ZERO;
    let mut double = ZERO;
    let mut anti = ZERO;
    let mut mean_o = ZERO;
    let z = state.norm2();
    for (b, psi) in state.branches.iter().enumerate() {
        let ob = o(b);
        let j = state.densities[b][x];
        if j != 0.0 {
            exchange += -i * j * ob.commutator(a).sandwich(psi);
        }
        double += n.commutator(&n.commutator(ob)).sandwich(psi);
        anti += ob.anticommutator(n).sandwich(psi);
        mean_o += ob.sandwich(psi);
    }
    let mean_n = state.expectation(n).re;
    let (exchange, double, anti, mean_o) = (exchange / z, double / z, anti / z, mean_o / z);
    Drift {
        drift: exchange.re - 0.5 * lambda * lambda * double.re,
        diffusion: lambda * (anti.re - 2.0 * mean_o.re * mean_n),
        exchange: exchange.re,
    }
}
