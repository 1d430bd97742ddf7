//! Model objects built from a [`RunConfig`].

use std::sync::Arc;

use pointer_collapse_core::dynamics::{BranchState, CollapseParams, Integrator, Scheme};
use pointer_collapse_core::kernel::{KernelMode, KernelParams, StressTensor};
use pointer_collapse_core::lattice::Foliation;
use pointer_collapse_core::path::{run_path, PathRecord, RunOptions};
use pointer_collapse_core::pointer::{branch_image, plateau_density, BranchProfile, Idealization, ImageOptions};
use pointer_collapse_core::{Complex64, LatticeSpec, NoiseField};

use crate::config::{
    FoliationConfig, IdealizationConfig, IntegratorConfig, KernelModeConfig, RunConfig, SchemeConfig,
};
use crate::error::{HarnessError, Result};

/// Everything needed to run paths of one configured experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: LatticeSpec,
    pub kernel: KernelParams,
    pub params: CollapseParams,
    pub amplitudes: Vec<Complex64>,
    pub profiles: Arc<[BranchProfile]>,
    pub foliation: FoliationConfig,
    pub seed: u64,
    /// Row of the flat surface used as the final surface for path weights.
    pub sigma_f: usize,
    /// Multiplies the noise variance; 1 except in negative controls.
    pub noise_scale: f64,
}

pub fn integrator(c: IntegratorConfig) -> Integrator {
    match c {
        IntegratorConfig::Linear => Integrator::Linear,
        IntegratorConfig::Nonlinear => Integrator::Nonlinear,
    }
}

impl Experiment {
    pub fn build(config: &RunConfig) -> Result<Self> {
        let l = &config.lattice;
        let spec = LatticeSpec::new(l.sites, l.steps, l.dx, l.dt, l.x1_origin)?;
        let exp = config.experiment()?;
        if exp.branches.is_empty() {
            return Err(HarnessError::Config("experiment needs at least one branch".into()));
        }
        if config.kernel.mode == KernelModeConfig::Plc {
            return Err(HarnessError::Usage("the plc kernel mode is only available to the beable command".into()));
        }
        let raw: Vec<Complex64> = exp.branches.iter().map(|b| Complex64::new(b.amplitude[0], b.amplitude[1])).collect();
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(HarnessError::Config("branch amplitudes must be finite and not all zero".into()));
        }
        let amplitudes: Vec<Complex64> = raw.iter().map(|c| c / norm).collect();

        let mut base = Vec::with_capacity(exp.branches.len());
        for b in &exp.branches {
            let regions: Vec<(f64, f64)> = b.regions.iter().map(|r| (r[0], r[1])).collect();
            let j = plateau_density(&spec, &regions, b.j);
            let e = plateau_density(&spec, &regions, b.energy.unwrap_or(b.j));
            base.push(BranchProfile::from_density(j).with_energy(e));
        }
        let t00 = match config.kernel.t00 {
            Some(v) => v,
            None => base.iter().zip(&amplitudes).map(|(p, c)| c.norm_sqr() * p.lump_energy()).sum(),
        };
        let stress = StressTensor { t00, t01: config.kernel.t01, t11: config.kernel.t11 };
        let kernel = KernelParams::new(config.kernel.k, KernelMode::Static, stress)?;
        let opts = ImageOptions {
            idealization: match config.kernel.idealization {
                IdealizationConfig::Plateau => Idealization::Plateau,
                IdealizationConfig::Exact => Idealization::Exact,
            },
            plateau_guard: config.kernel.plateau_guard,
            interaction_rows: config.kernel.interaction_rows,
        };
        let profiles = base
            .into_iter()
            .map(|p| branch_image(&spec, p, &kernel, &opts))
            .collect::<Result<Vec<_>, _>>()?;

        let c = &config.collapse;
        let scheme = match c.scheme {
            SchemeConfig::Exponential => Scheme::Exponential,
            SchemeConfig::Euler => Scheme::Euler,
        };
        let params = CollapseParams::new(c.lambda, c.epsilon, integrator(c.integrator), scheme)?;
        let sigma_f = exp.sigma_f.unwrap_or(spec.steps());
        if sigma_f > spec.steps() {
            return Err(HarnessError::Config(format!("sigma_f row {sigma_f} is above the lattice")));
        }
        Ok(Self {
            spec,
            kernel,
            params,
            amplitudes,
            profiles: Arc::from(profiles),
            foliation: exp.foliation,
            seed: config.seed,
            sigma_f,
            noise_scale: 1.0,
        })
    }

    pub fn with_integrator(&self, integrator: Integrator) -> Self {
        let mut e = self.clone();
        e.params.integrator = integrator;
        e
    }

    pub fn initial_state(&self) -> Result<BranchState> {
        let normalized = self.params.integrator == Integrator::Nonlinear;
        Ok(BranchState::new(&self.spec, &self.amplitudes, self.profiles.clone(), normalized)?)
    }

    pub fn noise(&self, path: usize) -> NoiseField {
        let n = NoiseField::for_path(&self.spec, self.seed, path as u64);
        if self.noise_scale == 1.0 {
            n
        } else {
            n.with_variance_scale(self.noise_scale)
        }
    }

    pub fn foliation(&self, path: usize) -> Foliation {
        match self.foliation {
            FoliationConfig::Time => Foliation::standard(&self.spec),
            FoliationConfig::Random => Foliation::random(&self.spec, self.seed ^ (path as u64).rotate_left(32)),
        }
    }

    /// Runs path `path` with its own noise and foliation.
    pub fn run(&self, path: usize, opts: &RunOptions) -> Result<PathRecord> {
        let st = self.initial_state()?;
        Ok(run_path(&st, &self.foliation(path), &self.noise(path), &self.params, opts)?)
    }

    /// `1 / (lambda^2 V J^4)` for two plateau branches.
    pub fn closed_form_tau(&self) -> Option<f64> {
        let st = self.initial_state().ok()?;
        pointer_collapse_core::dynamics::two_plateau_tau(&st, &self.spec, 0, self.params.lambda)
    }

    /// Coordinate time of flat surface `t`.
    pub fn time_of(&self, t: usize) -> f64 {
        t as f64 * self.spec.dt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_experiment_has_two_plateaus_of_twenty_cells() {
        let e = Experiment::build(&RunConfig::default()).unwrap();
        assert_eq!(e.profiles.len(), 2);
        for p in e.profiles.iter() {
            let cells = p.n.row(0).iter().filter(|v| **v == 100.0).count();
            assert_eq!(cells, 20);
        }
        assert!((e.closed_form_tau().unwrap() - 2e-4).abs() < 1e-12);
        assert!((e.amplitudes[0].norm_sqr() - 0.5).abs() < 1e-15);
        assert!((e.kernel.stress.t00 - 10.0).abs() < 1e-12);
    }

    #[test]
    fn plc_mode_is_refused() {
        let mut c = RunConfig::default();
        c.kernel.mode = KernelModeConfig::Plc;
        assert!(matches!(Experiment::build(&c), Err(HarnessError::Usage(_))));
    }
}
