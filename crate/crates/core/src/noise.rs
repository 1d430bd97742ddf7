//! Seed-keyed Gaussian increments on lattice cells.
//!
//! Each cell's increment is drawn from its own ChaCha stream selected by the
//! cell index, so the value depends only on `(seed, path, cell)` and never on
//! the order in which cells are visited.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::field::CellField;
use crate::lattice::{Cell, LatticeSpec};

/// Anything that can hand out a noise increment for a cell.
pub trait NoiseSource {
    fn dw(&self, cell: Cell) -> f64;
}

/// Counter-based Brownian field with increments of variance
/// `variance_scale * dx * dt`.
#[derive(Debug, Clone)]
pub struct NoiseField {
    seed: u64,
    path: u64,
    spec: LatticeSpec,
    scale: f64,
    base: ChaCha8Rng,
}

impl NoiseField {
    pub fn new(spec: &LatticeSpec, seed: u64) -> Self {
        Self::for_path(spec, seed, 0)
    }

    /// Independent field for Monte Carlo path `path` under master `seed`.
    pub fn for_path(spec: &LatticeSpec, seed: u64, path: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&path.to_le_bytes());
        Self {
            seed,
            path,
            spec: *spec,
            scale: libm::sqrt(spec.cell_volume()),
            base: ChaCha8Rng::from_seed(key),
        }
    }

    /// Multiplies the increment variance by `factor` (test controls only).
    pub fn with_variance_scale(mut self, factor: f64) -> Self {
        self.scale = libm::sqrt(self.spec.cell_volume() * factor);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> u64 {
        self.path
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    /// Increment for `cell`; identical on every call.
    pub fn sample_dw(&self, cell: Cell) -> f64 {
        let mut rng = self.base.clone();
        rng.set_stream(self.spec.index(cell) as u64);
        let z: f64 = StandardNormal.sample(&mut rng);
        z * self.scale
    }

    /// Materializes the whole field.
    pub fn to_field(&self) -> CellField<f64> {
        CellField::from_fn(&self.spec, |c| self.sample_dw(c))
    }
}

impl NoiseSource for NoiseField {
    fn dw(&self, cell: Cell) -> f64 {
        self.sample_dw(cell)
    }
}

impl NoiseSource for CellField<f64> {
    fn dw(&self, cell: Cell) -> f64 {
        self[cell]
    }
}

impl<N: NoiseSource + ?Sized> NoiseSource for &N {
    fn dw(&self, cell: Cell) -> f64 {
        (**self).dw(cell)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> LatticeSpec {
        LatticeSpec::new(1000, 1000, 0.02, 0.01, 0.0).unwrap()
    }

    #[test]
    fn repeatable_per_cell() {
        let n = NoiseField::new(&spec(), 7);
        let c = Cell::new(3, 9);
        assert_eq!(n.sample_dw(c).to_bits(), n.sample_dw(c).to_bits());
        let again = NoiseField::new(&spec(), 7);
        assert_eq!(n.sample_dw(c).to_bits(), again.sample_dw(c).to_bits());
        assert_ne!(n.sample_dw(c), n.sample_dw(Cell::new(4, 9)));
    }

    #[test]
    fn moments_over_a_million_cells() {
        let s = spec();
        let n = NoiseField::new(&s, 2024);
        let dw = s.cell_volume();
        let (mut sum, mut sq) = (0.0, 0.0);
        for c in s.cells() {
            let v = n.sample_dw(c);
            sum += v;
            sq += v * v;
        }
        let m = s.num_cells() as f64;
        let mean = sum / m;
        let var = sq / m - mean * mean;
        assert!(mean.abs() < 4.0 * libm::sqrt(dw) / 1e3, "mean {mean}");
        assert!((var / dw - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn seeds_and_paths_decorrelate() {
        let s = LatticeSpec::new(1000, 100, 1.0, 1.0, 0.0).unwrap();
        let a = NoiseField::new(&s, 1);
        let b = NoiseField::new(&s, 2);
        let p = NoiseField::for_path(&s, 1, 1);
        let corr = |x: &NoiseField, y: &NoiseField| {
            let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
            for c in s.cells() {
                let (u, v) = (x.sample_dw(c), y.sample_dw(c));
                xy += u * v;
                xx += u * u;
                yy += v * v;
            }
            xy / libm::sqrt(xx * yy)
        };
        assert!(corr(&a, &b).abs() < 0.01);
        assert!(corr(&a, &p).abs() < 0.01);
    }

    #[test]
    fn variance_scale_control() {
        let s = LatticeSpec::new(100, 100, 1.0, 1.0, 0.0).unwrap();
        let base = NoiseField::new(&s, 5);
        let doubled = base.clone().with_variance_scale(2.0);
        let c = Cell::new(1, 1);
        assert!((doubled.sample_dw(c) / base.sample_dw(c) - libm::sqrt(2.0)).abs() < 1e-12);
    }
}
