use std::path::Path;

use pointer_collapse::config::{LatticeConfig, RunConfig};

/// The two-lump experiment on a coarse lattice: 20 sites, 300 rows of 4e-6.
pub fn small_config(dir: &Path) -> RunConfig {
    let mut c = RunConfig {
        lattice: LatticeConfig { sites: 20, steps: 300, dx: 0.15, dt: 4e-6, x1_origin: -1.425 },
        ..RunConfig::default()
    };
    c.experiment.as_mut().unwrap().paths = 12;
    c.output.dir = dir.to_path_buf();
    c
}

pub fn write_config(c: &RunConfig, path: &Path) {
    std::fs::write(path, serde_json::to_string_pretty(c).unwrap()).unwrap();
}
