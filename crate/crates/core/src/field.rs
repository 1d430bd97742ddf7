use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::lattice::{Cell, LatticeSpec};

/// One value per lattice cell, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField<T> {
    sites: usize,
    steps: usize,
    data: Vec<T>,
}

impl<T: Clone> CellField<T> {
    pub fn filled(spec: &LatticeSpec, value: T) -> Self {
        Self { sites: spec.sites(), steps: spec.steps(), data: alloc::vec![value; spec.num_cells()] }
    }
}

impl<T> CellField<T> {
    pub fn from_fn(spec: &LatticeSpec, mut f: impl FnMut(Cell) -> T) -> Self {
        let data = spec.cells().map(&mut f).collect();
        Self { sites: spec.sites(), steps: spec.steps(), data }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn matches(&self, spec: &LatticeSpec) -> bool {
        self.sites == spec.sites() && self.steps == spec.steps()
    }

    pub fn get(&self, cell: Cell) -> Option<&T> {
        (cell.i < self.sites && cell.t < self.steps).then(|| &self.data[cell.t * self.sites + cell.i])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Values of one time row.
    pub fn row(&self, t: usize) -> &[T] {
        &self.data[t * self.sites..(t + 1) * self.sites]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> CellField<U> {
        CellField { sites: self.sites, steps: self.steps, data: self.data.iter().map(f).collect() }
    }

    /// `(cell, value)` pairs in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Cell, &T)> + '_ {
        let l = self.sites;
        self.data.iter().enumerate().map(move |(k, v)| (Cell::new(k % l, k / l), v))
    }
}

impl<T> Index<Cell> for CellField<T> {
    type Output = T;

    fn index(&self, cell: Cell) -> &T {
        assert!(cell.i < self.sites && cell.t < self.steps, "cell outside field");
        &self.data[cell.t * self.sites + cell.i]
    }
}

impl<T> IndexMut<Cell> for CellField<T> {
    fn index_mut(&mut self, cell: Cell) -> &mut T {
        assert!(cell.i < self.sites && cell.t < self.steps, "cell outside field");
        &mut self.data[cell.t * self.sites + cell.i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_layout() {
        let spec = LatticeSpec::new(3, 2, 1.0, 1.0, 0.0).unwrap();
        let f = CellField::from_fn(&spec, |c| c.i + 10 * c.t);
        assert_eq!(f.as_slice(), &[0, 1, 2, 10, 11, 12]);
        assert_eq!(f[Cell::new(2, 1)], 12);
        assert_eq!(f.row(1), &[10, 11, 12]);
        assert!(f.get(Cell::new(3, 0)).is_none());
    }
}
