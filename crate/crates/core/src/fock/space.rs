use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::op::SparseOp;
use crate::field::CellField;
use crate::kernel::KernelTable;
use crate::lattice::{Cell, LatticeSpec};
use crate::{Error, Result};

/// Largest Fock dimension the oracle will build.
pub const MAX_DIM: u128 = 1_000_000;

/// Pointer modes on a set of cells, each truncated at `cutoff` quanta.
///
/// Basis index `b = sum_m n_m (cutoff + 1)^m` where `m` runs over the modes in
/// the order given. Ladder operators are scaled so that
/// `[a(x), a(x)^dagger] = 1 / dw` below the truncation.
#[derive(Debug, Clone)]
pub struct FockSpec {
    lattice: LatticeSpec,
    cells: Vec<Cell>,
    cutoff: usize,
    dim: usize,
    mode_of: CellField<Option<usize>>,
}

impl FockSpec {
    pub fn new(lattice: &LatticeSpec, cells: Vec<Cell>, cutoff: usize) -> Result<Self> {
        if cutoff == 0 || cells.is_empty() {
            return Err(Error::Config("need at least one mode and a cutoff of at least one"));
        }
        let mut mode_of = CellField::filled(lattice, None);
        for (m, &c) in cells.iter().enumerate() {
            lattice.cell(c.i, c.t)?;
            if mode_of[c].replace(m).is_some() {
                return Err(Error::Config("mode cells must be distinct"));
            }
        }
        let mut dim: u128 = 1;
        for _ in &cells {
            dim = dim.saturating_mul(cutoff as u128 + 1);
        }
        if dim > MAX_DIM {
            return Err(Error::FockTooLarge { dim, limit: MAX_DIM as usize });
        }
        Ok(Self { lattice: *lattice, cells, cutoff, dim: dim as usize, mode_of })
    }

    /// One mode on every lattice cell, in row-major order.
    pub fn full(lattice: &LatticeSpec, cutoff: usize) -> Result<Self> {
        Self::new(lattice, lattice.cells().collect(), cutoff)
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn modes(&self) -> usize {
        self.cells.len()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self, cell: Cell) -> Result<usize> {
        self.mode_of.get(cell).copied().flatten().ok_or(Error::NoMode { i: cell.i, t: cell.t })
    }

    fn stride(&self, m: usize) -> usize {
        (self.cutoff + 1).pow(m as u32)
    }

    /// Occupation of mode `m` in basis state `b`.
    pub fn occupation(&self, b: usize, m: usize) -> usize {
        (b / self.stride(m)) % (self.cutoff + 1)
    }

    /// Unscaled truncated `(a, a^dagger)` of mode `m`.
    pub fn ladder_std(&self, m: usize) -> (SparseOp, SparseOp) {
        let s = self.stride(m);
        let a = SparseOp::from_triplets(
            self.dim,
            (0..self.dim).filter_map(|b| {
                let n = self.occupation(b, m);
                (n > 0).then(|| (b - s, b, Complex64::new(libm::sqrt(n as f64), 0.0)))
            }),
        );
        let ad = a.adjoint();
        (a, ad)
    }

    /// `(a(x), a(x)^dagger)` with the lattice delta normalization.
    pub fn ladder(&self, cell: Cell) -> Result<(SparseOp, SparseOp)> {
        let (a, ad) = self.ladder_std(self.mode(cell)?);
        let s = Complex64::new(1.0 / libm::sqrt(self.lattice.cell_volume()), 0.0);
        Ok((a.scale(s), ad.scale(s)))
    }

    /// `n(x) = a(x)^dagger a(x)`.
    pub fn number_density(&self, cell: Cell) -> Result<SparseOp> {
        let m = self.mode(cell)?;
        let vol = self.lattice.cell_volume();
        Ok(SparseOp::diagonal(&(0..self.dim).map(|b| self.occupation(b, m) as f64 / vol).collect::<Vec<_>>()))
    }

    /// Kernel row `y -> kernel(x, y)` restricted to the mode cells.
    pub fn mode_weights(&self, x: Cell, kernel: &KernelTable) -> Vec<f64> {
        self.cells.iter().map(|&y| kernel.value(x, y)).collect()
    }

    /// Eigenvalues of `sum_y dw w_y n(y)` on the basis states.
    pub fn smeared_number_diagonal(&self, weights: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|b| weights.iter().enumerate().map(|(m, w)| w * self.occupation(b, m) as f64).sum())
            .collect()
    }

    /// `N(x) = sum_y dw f(x, y) n(y)`.
    pub fn build_n(&self, x: Cell, f: &KernelTable) -> SparseOp {
        SparseOp::diagonal(&self.smeared_number_diagonal(&self.mode_weights(x, f)))
    }

    /// `A(x) = sum_y dw g(x, y) (a(y) + a(y)^dagger)`.
    pub fn build_a(&self, x: Cell, g: &KernelTable) -> SparseOp {
        self.quadrature_sum(&self.mode_weights(x, g))
    }

    /// `sum_y dw w_y (a(y) + a(y)^dagger)`.
    pub fn quadrature_sum(&self, weights: &[f64]) -> SparseOp {
        let sq = libm::sqrt(self.lattice.cell_volume());
        let mut out = SparseOp::zeros(self.dim);
        for (m, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                let (a, ad) = self.ladder_std(m);
                out = out.axpy(Complex64::new(sq * w, 0.0), &a.add(&ad));
            }
        }
        out
    }

    /// Rows `t0..=t1` and sites of a full space-time block, if the mode cells
    /// form one.
    fn block(&self) -> Option<(Vec<usize>, usize, usize)> {
        let mut sites: Vec<usize> = self.cells.iter().map(|c| c.i).collect();
        sites.sort_unstable();
        sites.dedup();
        let t0 = self.cells.iter().map(|c| c.t).min()?;
        let t1 = self.cells.iter().map(|c| c.t).max()?;
        let full = sites.iter().all(|&i| (t0..=t1).all(|t| self.mode_of[Cell::new(i, t)].is_some()));
        (full && sites.len() * (t1 - t0 + 1) == self.cells.len()).then_some((sites, t0, t1))
    }

    /// Single-particle matrix `h` with `H = sum_pq h_pq a_p^dagger a_q` in
    /// unscaled ladder operators: `h = i D_t`, hermitized, with `D_t` the
    /// central time difference inside the block and one-sided differences on
    /// its first and last rows.
    pub fn pointer_hamiltonian_matrix(&self) -> Result<Vec<Complex64>> {
        let (sites, t0, t1) = self.block().ok_or(Error::NoTimeDerivative)?;
        if t1 == t0 {
            return Err(Error::NoTimeDerivative);
        }
        let n = self.modes();
        let dt = self.lattice.dt();
        let mut d = vec![Complex64::new(0.0, 0.0); n * n];
        for &i in &sites {
            for t in t0..=t1 {
                let p = self.mode_of[Cell::new(i, t)].expect("block");
                let at = |tt: usize| self.mode_of[Cell::new(i, tt)].expect("block");
                let (lo, hi, w) = if t == t0 {
                    (t, t + 1, 1.0 / dt)
                } else if t == t1 {
                    (t - 1, t, 1.0 / dt)
                } else {
                    (t - 1, t + 1, 0.5 / dt)
                };
                d[p * n + at(hi)] += Complex64::new(w, 0.0);
                d[p * n + at(lo)] -= Complex64::new(w, 0.0);
            }
        }
        let i = Complex64::new(0.0, 1.0);
        let mut h = vec![Complex64::new(0.0, 0.0); n * n];
        for p in 0..n {
            for q in 0..n {
                h[p * n + q] = 0.5 * (i * d[p * n + q] + (i * d[q * n + p]).conj());
            }
        }
        Ok(h)
    }

    /// `H_pointer = sum_cells dw a^dagger i D_t a`, hermitized.
    pub fn build_h_pointer(&self) -> Result<SparseOp> {
        let h = self.pointer_hamiltonian_matrix()?;
        Ok(self.one_body(&h))
    }

    /// `sum_pq h_pq a_p^dagger a_q` in unscaled ladder operators.
    pub fn one_body(&self, h: &[Complex64]) -> SparseOp {
        let n = self.modes();
        let ladders: Vec<(SparseOp, SparseOp)> = (0..n).map(|m| self.ladder_std(m)).collect();
        let mut out = SparseOp::zeros(self.dim);
        for p in 0..n {
            for q in 0..n {
                let v = h[p * n + q];
                if v.norm() != 0.0 {
                    out = out.axpy(v, &ladders[p].1.mul(&ladders[q].0));
                }
            }
        }
        out
    }
}
