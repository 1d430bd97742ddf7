//! Discrete 1+1D spacetime: cells, spacelike surfaces, foliations and cones.
//!
//! A surface is stored as one integer height per spatial site. Height `h[i]`
//! counts the cells of column `i` that lie to its past, so the cell `(i, h[i])`
//! sits *on* the surface and is the one an advance at site `i` would sweep.
//! The speed of light is 1 in lattice units of `dx / dt` cells per step.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{Error, Result};

const SLOPE_EPS: f64 = 1e-9;

/// Size and spacing of the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    sites: usize,
    steps: usize,
    dx: f64,
    dt: f64,
    x1_origin: f64,
}

impl LatticeSpec {
    pub fn new(sites: usize, steps: usize, dx: f64, dt: f64, x1_origin: f64) -> Result<Self> {
        if sites == 0 || steps == 0 {
            return Err(Error::Config("lattice needs at least one site and one step"));
        }
        if !(dx > 0.0 && dt > 0.0) || !dx.is_finite() || !dt.is_finite() {
            return Err(Error::Config("dx and dt must be positive and finite"));
        }
        if dt > dx * (1.0 + SLOPE_EPS) {
            return Err(Error::Config("dt must not exceed dx (lattice light cone)"));
        }
        if !x1_origin.is_finite() {
            return Err(Error::Config("x1_origin must be finite"));
        }
        Ok(Self { sites, steps, dx, dt, x1_origin })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn x1_origin(&self) -> f64 {
        self.x1_origin
    }

    /// Cell 2-volume `dx * dt`.
    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dt
    }

    pub fn num_cells(&self) -> usize {
        self.sites * self.steps
    }

    /// Largest height difference allowed between neighbouring sites of a
    /// spacelike surface.
    pub fn max_jump(&self) -> usize {
        libm_floor(self.dx / self.dt * (1.0 + SLOPE_EPS))
    }

    /// Number of sites either side of a column reachable by light within
    /// `steps` time steps.
    pub fn cone_halfwidth(&self, steps: usize) -> usize {
        libm_floor(steps as f64 * self.dt / self.dx * (1.0 + SLOPE_EPS) + SLOPE_EPS)
    }

    pub fn contains(&self, i: usize, t: usize) -> bool {
        i < self.sites && t < self.steps
    }

    pub fn cell(&self, i: usize, t: usize) -> Result<Cell> {
        if self.contains(i, t) {
            Ok(Cell { i, t })
        } else {
            Err(Error::OutOfLattice { i, t })
        }
    }

    /// Row-major index, `t * sites + i`.
    pub fn index(&self, cell: Cell) -> usize {
        cell.t * self.sites + cell.i
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell { i: index % self.sites, t: index / self.sites }
    }

    /// All cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.num_cells()).map(|k| self.cell_at(k))
    }

    /// Spatial coordinate of a site centre.
    pub fn x1(&self, i: usize) -> f64 {
        self.x1_origin + i as f64 * self.dx
    }

    /// Time coordinate of a row.
    pub fn x0(&self, t: usize) -> f64 {
        t as f64 * self.dt
    }

    /// `(x1, x0)` coordinates of a cell.
    pub fn position(&self, cell: Cell) -> (f64, f64) {
        (self.x1(cell.i), self.x0(cell.t))
    }

    /// True when `y` lies strictly inside or on the past light cone of `x`.
    pub fn in_past_cone(&self, x: Cell, y: Cell) -> bool {
        y.t < x.t && x.i.abs_diff(y.i) <= self.cone_halfwidth(x.t - y.t)
    }

    pub fn in_future_cone(&self, x: Cell, y: Cell) -> bool {
        self.in_past_cone(y, x)
    }

    /// Neither cell lies in the other's cone (distinct cells only).
    pub fn spacelike(&self, x: Cell, y: Cell) -> bool {
        x != y && !self.in_past_cone(x, y) && !self.in_past_cone(y, x)
    }
}

fn libm_floor(v: f64) -> usize {
    libm::floor(v).max(0.0) as usize
}

/// A spacetime cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub i: usize,
    pub t: usize,
}

impl Cell {
    pub const fn new(i: usize, t: usize) -> Self {
        Self { i, t }
    }
}

/// A lattice hypersurface given by per-site time heights.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Surface {
    heights: Vec<usize>,
}

impl Surface {
    pub fn from_heights(heights: Vec<usize>) -> Self {
        Self { heights }
    }

    pub fn initial(spec: &LatticeSpec) -> Self {
        Self { heights: alloc::vec![0; spec.sites()] }
    }

    pub fn terminal(spec: &LatticeSpec) -> Self {
        Self { heights: alloc::vec![spec.steps(); spec.sites()] }
    }

    pub fn flat(spec: &LatticeSpec, t: usize) -> Self {
        Self { heights: alloc::vec![t.min(spec.steps()); spec.sites()] }
    }

    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    /// Common height if the surface is a constant-time slice.
    pub fn flat_height(&self) -> Option<usize> {
        let first = *self.heights.first()?;
        self.heights.iter().all(|&h| h == first).then_some(first)
    }

    pub fn is_spacelike(&self, spec: &LatticeSpec) -> bool {
        let m = spec.max_jump();
        self.heights.len() == spec.sites()
            && self.heights.iter().all(|&h| h <= spec.steps())
            && self.heights.windows(2).all(|w| w[0].abs_diff(w[1]) <= m)
    }

    /// True if `cell` is to the past of the surface.
    pub fn is_past(&self, cell: Cell) -> bool {
        cell.t < self.heights[cell.i]
    }

    /// True if `cell` is the next cell an advance at its site would sweep.
    pub fn lies_on(&self, cell: Cell) -> bool {
        self.heights[cell.i] == cell.t
    }

    /// Number of cells to the past of the surface.
    pub fn swept(&self) -> usize {
        self.heights.iter().sum()
    }

    /// Checks whether an advance at `site` is allowed.
    pub fn check_advance(&self, spec: &LatticeSpec, site: usize) -> Result<()> {
        if site >= self.heights.len() {
            return Err(Error::OutOfLattice { i: site, t: 0 });
        }
        let h = self.heights[site];
        if h >= spec.steps() {
            return Err(Error::Boundary { site });
        }
        let m = spec.max_jump();
        let raised = h + 1;
        let left = site.checked_sub(1).map(|j| self.heights[j]);
        let right = self.heights.get(site + 1).copied();
        if left.into_iter().chain(right).any(|n| raised.abs_diff(n) > m) {
            return Err(Error::Causality { site });
        }
        Ok(())
    }

    /// Advances the surface by one cell at `site` in place; returns that cell.
    pub fn advance_in_place(&mut self, spec: &LatticeSpec, site: usize) -> Result<Cell> {
        self.check_advance(spec, site)?;
        let cell = Cell::new(site, self.heights[site]);
        self.heights[site] += 1;
        Ok(cell)
    }
}

/// Partial order on surfaces: no point of `a` lies to the causal future of `b`.
pub fn precedes(a: &Surface, b: &Surface) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LatticeMismatch);
    }
    Ok(a.heights.iter().zip(&b.heights).all(|(x, y)| x <= y))
}

/// Returns the surface obtained by sweeping one cell at `site`.
pub fn advance(spec: &LatticeSpec, surface: &Surface, site: usize) -> Result<Surface> {
    let mut next = surface.clone();
    next.advance_in_place(spec, site)?;
    Ok(next)
}

/// How a foliation was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoliationKind {
    /// Constant-time slices swept left to right.
    Standard,
    /// Uniform choice among allowed advances, keyed by a seed.
    Random { seed: u64 },
    /// Row-major sweep between two given surfaces.
    Segment,
}

/// A maximal chain of surfaces, stored as the initial surface plus the
/// sequence of advanced cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Foliation {
    spec: LatticeSpec,
    initial: Surface,
    cells: Vec<Cell>,
    kind: FoliationKind,
}

impl Foliation {
    /// Validates a sequence of advances starting at `initial`.
    pub fn from_cells(
        spec: LatticeSpec,
        initial: Surface,
        cells: Vec<Cell>,
        kind: FoliationKind,
    ) -> Result<Self> {
        let mut surface = initial.clone();
        for &c in &cells {
            if !surface.lies_on(c) {
                return Err(Error::Sequencing { i: c.i, t: c.t });
            }
            surface.advance_in_place(&spec, c.i)?;
        }
        Ok(Self { spec, initial, cells, kind })
    }

    /// Constant-time foliation sweeping sites left to right within each level.
    pub fn standard(spec: &LatticeSpec) -> Self {
        Self {
            spec: *spec,
            initial: Surface::initial(spec),
            cells: spec.cells().collect(),
            kind: FoliationKind::Standard,
        }
    }

    /// Random maximal chain: at each step one allowed advance is chosen
    /// uniformly.
    pub fn random(spec: &LatticeSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut surface = Surface::initial(spec);
        let mut cells = Vec::with_capacity(spec.num_cells());
        let mut allowed = Vec::with_capacity(spec.sites());
        for _ in 0..spec.num_cells() {
            allowed.clear();
            allowed.extend((0..spec.sites()).filter(|&s| surface.check_advance(spec, s).is_ok()));
            let pick = allowed[(rng.next_u64() % allowed.len() as u64) as usize];
            // allowed is never empty: a lowest column can always advance
            let cell = surface.advance_in_place(spec, pick).expect("allowed advance");
            cells.push(cell);
        }
        Self { spec: *spec, initial: Surface::initial(spec), cells, kind: FoliationKind::Random { seed } }
    }

    /// Row-major sweep of every cell between `from` and `to`.
    pub fn between(spec: &LatticeSpec, from: &Surface, to: &Surface) -> Result<Self> {
        if !precedes(from, to)? || !from.is_spacelike(spec) || !to.is_spacelike(spec) {
            return Err(Error::Config("segment endpoints must be ordered spacelike surfaces"));
        }
        let top = to.heights().iter().copied().max().unwrap_or(0);
        let mut cells = Vec::new();
        for t in 0..top {
            for i in 0..spec.sites() {
                if t >= from.heights()[i] && t < to.heights()[i] {
                    cells.push(Cell::new(i, t));
                }
            }
        }
        Self::from_cells(*spec, from.clone(), cells, FoliationKind::Segment)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn initial(&self) -> &Surface {
        &self.initial
    }

    pub fn kind(&self) -> FoliationKind {
        self.kind
    }

    /// Advanced cells in order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn final_surface(&self) -> Surface {
        let mut s = self.initial.clone();
        for c in &self.cells {
            s.heights[c.i] += 1;
        }
        s
    }

    /// The chain of surfaces after each advance, paired with the cell swept.
    pub fn surfaces(&self) -> impl Iterator<Item = (Surface, Cell)> + '_ {
        let mut s = self.initial.clone();
        self.cells.iter().map(move |&c| {
            s.heights[c.i] += 1;
            (s.clone(), c)
        })
    }
}

/// Cells strictly to the past of `x` within its light cone, clipped to the
/// lattice.
pub fn past_cone(spec: &LatticeSpec, x: Cell) -> Vec<Cell> {
    let mut out = Vec::new();
    for t in (0..x.t).rev() {
        let w = spec.cone_halfwidth(x.t - t);
        let lo = x.i.saturating_sub(w);
        let hi = (x.i + w).min(spec.sites() - 1);
        out.extend((lo..=hi).map(|i| Cell::new(i, t)));
    }
    out
}

/// Cells strictly to the future of `x` within its light cone, clipped to the
/// lattice.
pub fn future_cone(spec: &LatticeSpec, x: Cell) -> Vec<Cell> {
    let mut out = Vec::new();
    for t in x.t + 1..spec.steps() {
        let w = spec.cone_halfwidth(t - x.t);
        let lo = x.i.saturating_sub(w);
        let hi = (x.i + w).min(spec.sites() - 1);
        out.extend((lo..=hi).map(|i| Cell::new(i, t)));
    }
    out
}

/// The steepest spacelike surface through `x`, the lattice stand-in for the
/// past light cone of `x`. Heights fall by the maximal allowed jump per site
/// away from `x` and are clipped at zero.
pub fn plc_surface(spec: &LatticeSpec, x: Cell) -> Surface {
    let m = spec.max_jump();
    let heights = (0..spec.sites())
        .map(|j| x.t.saturating_sub(m.saturating_mul(j.abs_diff(x.i))))
        .collect();
    Surface::from_heights(heights)
}
