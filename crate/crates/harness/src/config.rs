//! Strict JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub collapse: CollapseConfig,
    /// Branch definitions and sampling; absent means the file configures no
    /// experiment, which the experiment commands reject.
    #[serde(default)]
    pub experiment: Option<ExperimentConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub sites: usize,
    pub steps: usize,
    pub dx: f64,
    pub dt: f64,
    /// Centre of site 0.
    pub x1_origin: f64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self { sites: 60, steps: 1200, dx: 0.05, dt: 1e-6, x1_origin: -1.475 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelModeConfig {
    #[default]
    Static,
    Plc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IdealizationConfig {
    #[default]
    Plateau,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub k: f64,
    pub mode: KernelModeConfig,
    /// Static energy density; `null` takes the weight-averaged lump energy of
    /// the branches.
    pub t00: Option<f64>,
    pub t01: f64,
    pub t11: f64,
    pub idealization: IdealizationConfig,
    pub plateau_guard: f64,
    /// Exact idealization only: rows over which the record is written.
    /// `null` keeps it growing over the whole run.
    pub interaction_rows: Option<usize>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            k: 4e9,
            mode: KernelModeConfig::Static,
            t00: None,
            t01: 0.0,
            t11: 0.0,
            idealization: IdealizationConfig::Plateau,
            plateau_guard: 0.5,
            interaction_rows: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorConfig {
    Linear,
    #[default]
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeConfig {
    #[default]
    Exponential,
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseConfig {
    pub lambda: f64,
    pub epsilon: f64,
    pub integrator: IntegratorConfig,
    pub scheme: SchemeConfig,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        Self { lambda: 0.5, epsilon: 0.01, integrator: IntegratorConfig::Nonlinear, scheme: SchemeConfig::Exponential }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FoliationConfig {
    #[default]
    Time,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    /// `[re, im]`; amplitudes are normalized together.
    pub amplitude: [f64; 2],
    /// Spatial intervals `[lo, hi)` carrying the matter density.
    pub regions: Vec<[f64; 2]>,
    /// Density `J` on the regions.
    pub j: f64,
    /// Energy density on the regions; defaults to `j`.
    #[serde(default)]
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub branches: Vec<BranchConfig>,
    pub paths: usize,
    pub foliation: FoliationConfig,
    /// Flat surface used as the final surface for path weights; `null` is the
    /// top of the lattice.
    #[serde(default)]
    pub sigma_f: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            branches: vec![
                BranchConfig { amplitude: [c, 0.0], regions: vec![[-1.0, 0.0]], j: 10.0, energy: None },
                BranchConfig { amplitude: [c, 0.0], regions: vec![[0.0, 1.0]], j: 10.0, energy: None },
            ],
            paths: 200,
            foliation: FoliationConfig::Time,
            sigma_f: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json, Format::Svg] }
    }
}

impl Default for RunConfig {
    /// Two equal-weight branches on neighbouring unit intervals with
    /// `lambda = 0.5` and `J^2 = 100`.
    fn default() -> Self {
        Self {
            seed: 1,
            lattice: LatticeConfig::default(),
            kernel: KernelConfig::default(),
            collapse: CollapseConfig::default(),
            experiment: Some(ExperimentConfig::default()),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Reads a config file, a run manifest, or a JSON report carrying a
    /// manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| HarnessError::Input { path: path.into(), source })?;
        let parse_err = |source| HarnessError::ConfigParse { path: path.into(), source };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(parse_err)?;
        let manifest = value.get("manifest").unwrap_or(&value);
        match manifest.get("config_hash").and(manifest.get("config")) {
            Some(inner) => serde_json::from_value(inner.clone()).map_err(parse_err),
            None => serde_json::from_value(value).map_err(parse_err),
        }
    }

    pub fn experiment(&self) -> Result<&ExperimentConfig> {
        self.experiment.as_ref().ok_or_else(|| HarnessError::Usage("config has no experiment block".into()))
    }

    /// The config with output settings reset: where and in which formats
    /// results are written is not part of a run's identity.
    pub fn identity(&self) -> Self {
        Self { output: OutputConfig::default(), ..self.clone() }
    }

    /// Hex SHA-256 of the canonical JSON form of [`Self::identity`].
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.identity()).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// First 12 hex digits of [`Self::hash`], used in file names.
    pub fn short_hash(&self) -> String {
        self.hash()[..12].to_string()
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}
