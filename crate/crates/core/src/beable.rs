//! Local beables: past-light-cone energy density and noise region integrals,
//! plus the self-consistent kernel mode that feeds the former back into the
//! smearing kernels.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dynamics::{BranchState, CollapseParams, Integrator, Scheme};
use crate::field::CellField;
use crate::kernel::{kernel_row, KernelParams, Side, StressTensor};
use crate::lattice::{plc_surface, Cell, Foliation, LatticeSpec};
use crate::noise::NoiseSource;
use crate::path::{run_path, Region, RegionSums, RunOptions};
use crate::pointer::BranchProfile;
use crate::{Error, Result};

/// `W_R = sum_{x in R} dW_x` split into signal and `dB` noise.
pub fn w_region<N: NoiseSource>(
    state0: &BranchState,
    foliation: &Foliation,
    noise: &N,
    params: &CollapseParams,
    region: Region,
) -> Result<RegionSums> {
    let spec = foliation.spec();
    if region.i1 > spec.sites() || region.t1 > spec.steps() || region.i0 >= region.i1 || region.t0 >= region.t1 {
        return Err(Error::Config("region must be a non-empty rectangle inside the lattice"));
    }
    let opts = RunOptions { regions: alloc::vec![region], ..Default::default() };
    Ok(run_path(state0, foliation, noise, params, &opts)?.regions[0])
}

/// `<T00(x)>` on the past light cone surface of `x`: the state is replayed
/// from `state0` up to `plc(x)` and the branch energies at `x` are averaged
/// with the normalized weights found there.
pub fn beable_t00<N: NoiseSource>(
    spec: &LatticeSpec,
    state0: &BranchState,
    noise: &N,
    params: &CollapseParams,
    x: Cell,
) -> Result<f64> {
    spec.cell(x.i, x.t)?;
    if state0.surface().is_past(x) {
        return Err(Error::Domain { i: x.i, t: x.t });
    }
    let plc = plc_surface(spec, x);
    let mut to = plc.heights().to_vec();
    // never go below where the state already is
    for (h, s) in to.iter_mut().zip(state0.surface().heights()) {
        *h = (*h).max(*s);
    }
    let to = crate::lattice::Surface::from_heights(to);
    let seg = Foliation::between(spec, state0.surface(), &to)?;
    let mut st = state0.clone();
    for &c in seg.cells() {
        st.step(spec, c, noise.dw(c), params)?;
    }
    Ok(st.weights().iter().zip(st.profiles().iter()).map(|(w, p)| w * p.e[x]).sum())
}

/// Result of a self-consistent kernel run.
#[derive(Debug, Clone)]
pub struct PlcRun {
    /// Per-branch `N` as realized along this path.
    pub n: Vec<CellField<f64>>,
    /// `T00` used for the kernels at each cell.
    pub t00: CellField<f64>,
    /// Final branch state, with the realized `N` profiles.
    pub state: BranchState,
}

/// Linear-measure path in which the kernels at each cell `x` use the rest
/// frame stress `T00(x)` read off the state on `plc(x)`.
///
/// Branch records and `N` values then depend on the noise, so they are built
/// cell by cell in row-major order. The cost is quadratic in the number of
/// cells; meant for small lattices.
pub fn run_plc_mode<N: NoiseSource>(
    spec: &LatticeSpec,
    amplitudes: &[Complex64],
    profiles: &[BranchProfile],
    k: f64,
    lambda: f64,
    noise: &N,
) -> Result<PlcRun> {
    KernelParams::new(k, crate::kernel::KernelMode::Plc, StressTensor::default())?;
    let nb = profiles.len();
    if nb == 0 || amplitudes.len() != nb {
        return Err(Error::Config("need one profile per amplitude and at least one branch"));
    }
    let vol = spec.cell_volume();
    let log0: Vec<f64> = amplitudes.iter().map(|c| libm::log(c.norm())).collect();
    let mut alpha: Vec<CellField<f64>> = (0..nb).map(|_| CellField::filled(spec, 0.0)).collect();
    let mut n: Vec<CellField<f64>> = (0..nb).map(|_| CellField::filled(spec, 0.0)).collect();
    // prefix[b][(t, i)] = sum of branch b's log increments in column i below row t
    let mut prefix: Vec<Vec<f64>> = (0..nb).map(|_| alloc::vec![0.0; (spec.steps() + 1) * spec.sites()]).collect();
    let mut t00 = CellField::filled(spec, 0.0);
    let mut logs = alloc::vec![0.0; nb];
    for x in spec.cells() {
        let plc = plc_surface(spec, x);
        for b in 0..nb {
            logs[b] = 2.0 * (log0[b]
                + plc.heights().iter().enumerate().map(|(j, &h)| prefix[b][h * spec.sites() + j]).sum::<f64>());
        }
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logs.iter().map(|l| libm::exp(l - m)).sum();
        let e: f64 = (0..nb).map(|b| libm::exp(logs[b] - m) / z * profiles[b].e[x]).sum();
        t00[x] = e;
        let stress = StressTensor::rest(e.max(0.0));

        // records written by x land strictly in its future
        let g = kernel_row(spec, x, Side::Future, k, &stress);
        for b in 0..nb {
            let j = profiles[b].j[x];
            if j != 0.0 {
                for &(y, gv) in &g.entries {
                    alpha[b][y] -= j * gv * vol;
                }
            }
        }
        let f = kernel_row(spec, x, Side::Past, k, &stress);
        let dw = noise.dw(x);
        for b in 0..nb {
            let nx: f64 = f.entries.iter().map(|&(y, fv)| vol * fv * alpha[b][y] * alpha[b][y]).sum();
            n[b][x] = nx;
            let delta = -lambda * lambda * nx * nx * vol + lambda * nx * dw;
            let below = prefix[b][x.t * spec.sites() + x.i];
            prefix[b][(x.t + 1) * spec.sites() + x.i] = below + delta;
        }
    }
    let realized: Arc<[BranchProfile]> = profiles
        .iter()
        .zip(&n)
        .map(|(p, nf)| p.clone().with_number(nf.clone()))
        .collect::<Vec<_>>()
        .into();
    let params = CollapseParams::new(lambda, 0.01, Integrator::Linear, Scheme::Exponential)?;
    let mut state = BranchState::new(spec, amplitudes, realized, false)?;
    for x in spec.cells() {
        state.step_linear(spec, x, noise.dw(x), &params)?;
    }
    Ok(PlcRun { n, t00, state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{KernelTable, Side};
    use crate::noise::NoiseField;
    use crate::pointer::{exact_image, plateau_density};

    fn lumps(spec: &LatticeSpec) -> Vec<BranchProfile> {
        let a = plateau_density(spec, &[(0.0, 2.0)], 2.0);
        let b = plateau_density(spec, &[(3.0, 5.0)], 2.0);
        [a, b].into_iter().map(|j| BranchProfile::from_density(j.clone()).with_number(j.map(|v| v * v))).collect()
    }

    #[test]
    fn t00_before_and_after_collapse() {
        let s = LatticeSpec::new(5, 30, 1.0, 0.5, 0.0).unwrap();
        let profiles: Arc<[BranchProfile]> = lumps(&s).into();
        let amps = [Complex64::new(1.0, 0.0); 2];
        let zero = CollapseParams::new(0.0, 0.01, Integrator::Nonlinear, Scheme::Exponential).unwrap();
        let st = BranchState::new(&s, &amps, profiles.clone(), true).unwrap();
        let noise = NoiseField::new(&s, 5);
        // disjoint supports: half weight in each lump
        assert!((beable_t00(&s, &st, &noise, &zero, Cell::new(0, 20)).unwrap() - 1.0).abs() < 1e-12);
        assert!((beable_t00(&s, &st, &noise, &zero, Cell::new(4, 20)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(beable_t00(&s, &st, &noise, &zero, Cell::new(2, 20)).unwrap(), 0.0);

        let strong = CollapseParams::new(3.0, 0.01, Integrator::Nonlinear, Scheme::Exponential).unwrap();
        let late = Cell::new(0, 29);
        let v = beable_t00(&s, &st, &noise, &strong, late).unwrap();
        let rec = run_path(&st, &Foliation::standard(&s), &noise, &strong, &RunOptions::default()).unwrap();
        let winner = rec.outcome.expect("collapses");
        let expect = if winner == 0 { 2.0 } else { 0.0 };
        assert!((v - expect).abs() < 0.05, "{v} vs {expect}");
    }

    #[test]
    fn overlapping_supports_give_the_common_energy() {
        let s = LatticeSpec::new(4, 6, 1.0, 1.0, 0.0).unwrap();
        let e = CellField::filled(&s, 3.0);
        let p: Arc<[BranchProfile]> = Arc::from(alloc::vec![
            BranchProfile::from_density(CellField::filled(&s, 1.0)).with_energy(e.clone()),
            BranchProfile::from_density(CellField::filled(&s, 2.0)).with_energy(e),
        ]);
        let st = BranchState::new(&s, &[Complex64::new(1.0, 0.0); 2], p, true).unwrap();
        let params = CollapseParams::new(0.0, 0.01, Integrator::Nonlinear, Scheme::Exponential).unwrap();
        let v = beable_t00(&s, &st, &NoiseField::new(&s, 1), &params, Cell::new(1, 4)).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn domain_error_below_the_state() {
        let s = LatticeSpec::new(3, 4, 1.0, 1.0, 0.0).unwrap();
        let p: Arc<[BranchProfile]> = lumps(&s).into();
        let mut st = BranchState::new(&s, &[Complex64::new(1.0, 0.0); 2], p, true).unwrap();
        st.skip(&s, Cell::new(0, 0)).unwrap();
        let params = CollapseParams::new(0.0, 0.01, Integrator::Nonlinear, Scheme::Exponential).unwrap();
        let r = beable_t00(&s, &st, &NoiseField::new(&s, 1), &params, Cell::new(0, 0));
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn plc_mode_with_uniform_energy_reduces_to_static() {
        let s = LatticeSpec::new(5, 8, 1.0, 1.0, 0.0).unwrap();
        let e = CellField::filled(&s, 1.5);
        let profiles: Vec<BranchProfile> = lumps(&s).into_iter().map(|p| p.with_energy(e.clone())).collect();
        let amps = [Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
        let run = run_plc_mode(&s, &amps, &profiles, 0.4, 0.7, &NoiseField::new(&s, 2)).unwrap();
        let stress = StressTensor::rest(1.5);
        let g = KernelTable::new(&s, Side::Future, 0.4, &stress).unwrap();
        let f = KernelTable::new(&s, Side::Past, 0.4, &stress).unwrap();
        for (b, p) in profiles.iter().enumerate() {
            let n = exact_image(&s, &p.j, &g, &f, None);
            for c in s.cells() {
                assert!((n[c] - run.n[b][c]).abs() < 1e-10);
            }
        }
        assert!(run.t00.as_slice().iter().all(|&v| (v - 1.5).abs() < 1e-12));
    }

    #[test]
    fn plc_mode_t00_matches_replay() {
        let s = LatticeSpec::new(5, 8, 1.0, 1.0, 0.0).unwrap();
        let profiles = lumps(&s);
        let amps = [Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
        let noise = NoiseField::new(&s, 8);
        let run = run_plc_mode(&s, &amps, &profiles, 0.4, 0.9, &noise).unwrap();
        let params = CollapseParams::new(0.9, 0.01, Integrator::Linear, Scheme::Exponential).unwrap();
        let st0 = BranchState::new(&s, &amps, run.state.profiles().clone(), false).unwrap();
        for x in s.cells() {
            let v = beable_t00(&s, &st0, &noise, &params, x).unwrap();
            assert!((v - run.t00[x]).abs() < 1e-12, "{x:?}");
        }
    }
}
