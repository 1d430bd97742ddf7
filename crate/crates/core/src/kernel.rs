//! Smearing kernels.
//!
//! `g(x, y)` spreads the matter density at `x` into the pointer modes on the
//! future cone of `x`; `f(x, y)` averages pointer occupation over the past cone
//! of `x`. Both have the form `C(x) exp(-k T^{mu nu}(x) v_mu v_nu)` with `v`
//! the separation, signature `(+, -)`, and are normalized so that
//! `sum_y kernel * dx * dt = 1` over the lattice-clipped cone. Values below
//! `1e-12` of the cone maximum are dropped before normalizing.

use alloc::vec::Vec;

use crate::field::CellField;
use crate::lattice::{self, Cell, LatticeSpec};
use crate::{Error, Result};

/// Relative cut below which kernel values are dropped.
pub const TRUNCATION: f64 = 1e-12;

/// Symmetric 2x2 contravariant stress tensor in `(x0, x1)` components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StressTensor {
    pub t00: f64,
    pub t01: f64,
    pub t11: f64,
}

impl StressTensor {
    /// Rest-frame dust with energy density `e`.
    pub const fn rest(e: f64) -> Self {
        Self { t00: e, t01: 0.0, t11: 0.0 }
    }

    /// `T^{mu nu} v_mu v_nu` for a separation with contravariant components
    /// `(v0, v1)`; lowering the spatial index flips its sign.
    pub fn contract(&self, v0: f64, v1: f64) -> f64 {
        self.t00 * v0 * v0 - 2.0 * self.t01 * v0 * v1 + self.t11 * v1 * v1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t00.is_finite() && self.t01.is_finite() && self.t11.is_finite()) {
            return Err(Error::Config("stress tensor must be finite"));
        }
        if self.t00 < 0.0 {
            return Err(Error::Config("T00 must be non-negative"));
        }
        // non-negative on every causal separation |v1| <= v0
        if cone_min(self) < 0.0 {
            return Err(Error::Config("kernel exponent must be non-positive inside the cone"));
        }
        Ok(())
    }
}

/// Where the stress tensor entering the kernels comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelMode {
    /// One fixed tensor for every cell.
    #[default]
    Static,
    /// Recomputed per cell from the state on the past light cone surface.
    Plc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub k: f64,
    pub mode: KernelMode,
    pub stress: StressTensor,
}

impl KernelParams {
    pub fn new(k: f64, mode: KernelMode, stress: StressTensor) -> Result<Self> {
        let p = Self { k, mode, stress };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Config("k must be positive and finite"));
        }
        self.stress.validate()
    }

    /// Time over which the kernel falls by `1/e` in the rest frame,
    /// `1 / sqrt(k T00)`; infinite when `T00 = 0`.
    pub fn correlation_length(&self) -> f64 {
        1.0 / libm::sqrt(self.k * self.stress.t00)
    }
}

/// Which cone a kernel lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `g`: strict future cone.
    Future,
    /// `f`: strict past cone.
    Past,
}

fn weight(spec: &LatticeSpec, k: f64, stress: &StressTensor, dt_steps: usize, di: i64) -> f64 {
    let v0 = dt_steps as f64 * spec.dt();
    let v1 = di as f64 * spec.dx();
    libm::exp(-k * stress.contract(v0, v1))
}

/// A normalized kernel row `y -> kernel(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub entries: Vec<(Cell, f64)>,
    /// Set when the clipped cone is empty and the row is identically zero.
    pub boundary: bool,
}

/// Kernel row evaluated by enumerating the clipped cone cell by cell.
pub fn kernel_row(
    spec: &LatticeSpec,
    x: Cell,
    side: Side,
    k: f64,
    stress: &StressTensor,
) -> KernelRow {
    let cone = match side {
        Side::Future => lattice::future_cone(spec, x),
        Side::Past => lattice::past_cone(spec, x),
    };
    let raw: Vec<(Cell, f64)> = cone
        .into_iter()
        .map(|y| {
            let (dt_steps, di) = separation(x, y);
            (y, weight(spec, k, stress, dt_steps, di))
        })
        .collect();
    let max = raw.iter().fold(0.0f64, |m, &(_, w)| m.max(w));
    if raw.is_empty() || max <= 0.0 {
        return KernelRow { entries: Vec::new(), boundary: true };
    }
    let kept: Vec<(Cell, f64)> = raw.into_iter().filter(|&(_, w)| w >= TRUNCATION * max).collect();
    let norm: f64 = kept.iter().map(|&(_, w)| w).sum::<f64>() * spec.cell_volume();
    KernelRow { entries: kept.into_iter().map(|(y, w)| (y, w / norm)).collect(), boundary: false }
}

fn separation(x: Cell, y: Cell) -> (usize, i64) {
    (x.t.abs_diff(y.t), y.i as i64 - x.i as i64)
}

fn params_stress(params: &KernelParams, stress: Option<&StressTensor>) -> StressTensor {
    stress.copied().unwrap_or(params.stress)
}

/// `g(x, y)`; `stress` overrides the static tensor of `params` when given.
pub fn eval_g(
    spec: &LatticeSpec,
    x: Cell,
    y: Cell,
    params: &KernelParams,
    stress: Option<&StressTensor>,
) -> f64 {
    if !spec.in_future_cone(x, y) {
        return 0.0;
    }
    let row = kernel_row(spec, x, Side::Future, params.k, &params_stress(params, stress));
    row.entries.iter().find(|(c, _)| *c == y).map_or(0.0, |&(_, v)| v)
}

/// `f(x, y)`; `stress` overrides the static tensor of `params` when given.
pub fn eval_f(
    spec: &LatticeSpec,
    x: Cell,
    y: Cell,
    params: &KernelParams,
    stress: Option<&StressTensor>,
) -> f64 {
    if !spec.in_past_cone(x, y) {
        return 0.0;
    }
    let row = kernel_row(spec, x, Side::Past, params.k, &params_stress(params, stress));
    row.entries.iter().find(|(c, _)| *c == y).map_or(0.0, |&(_, v)| v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Offset {
    dt: usize,
    di: i64,
    w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct CellNorm {
    /// `1 / (sum of kept weights * dw)`, zero on the boundary.
    inv_norm: f64,
    /// Absolute cut below which weights are dropped for this cell.
    cut: f64,
}

/// Precomputed kernel for one side and one fixed stress tensor.
///
/// Unnormalized weights depend only on the offset `y - x`, so a single offset
/// list is shared by all cells; each cell keeps its own clipped normalization.
/// The table is immutable after construction.
#[derive(Debug, Clone)]
pub struct KernelTable {
    spec: LatticeSpec,
    side: Side,
    offsets: Vec<Offset>,
    norms: CellField<CellNorm>,
}

impl KernelTable {
    pub fn new(spec: &LatticeSpec, side: Side, k: f64, stress: &StressTensor) -> Result<Self> {
        KernelParams::new(k, KernelMode::Static, *stress)?;
        let mut offsets = Vec::new();
        let mut global_max = 0.0f64;
        let max_dt = spec.steps() - 1;
        let qmin = cone_min(stress);
        // offsets are generated shell by shell in increasing dt
        for dt in 1..=max_dt {
            let w_half = spec.cone_halfwidth(dt).min(spec.sites() - 1) as i64;
            let mut shell_max = 0.0f64;
            for di in -w_half..=w_half {
                let w = weight(spec, k, stress, dt, di);
                shell_max = shell_max.max(w);
                offsets.push(Offset { dt, di, w });
            }
            global_max = global_max.max(shell_max);
            // every later shell is bounded by exp(-k qmin v0^2)
            let v0 = dt as f64 * spec.dt();
            if qmin > 0.0 && libm::exp(-k * qmin * v0 * v0) < TRUNCATION * global_max {
                break;
            }
        }
        offsets.retain(|o| o.w >= TRUNCATION * global_max);

        let norms = CellField::from_fn(spec, |x| {
            let mut max = 0.0f64;
            for o in &offsets {
                if target(spec, side, x, o).is_some() {
                    max = max.max(o.w);
                }
            }
            if max <= 0.0 {
                return CellNorm { inv_norm: 0.0, cut: f64::INFINITY };
            }
            let cut = TRUNCATION * max;
            let sum: f64 = offsets
                .iter()
                .filter(|o| o.w >= cut && target(spec, side, x, o).is_some())
                .map(|o| o.w)
                .sum();
            CellNorm { inv_norm: 1.0 / (sum * spec.cell_volume()), cut }
        });
        Ok(Self { spec: *spec, side, offsets, norms })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Number of stored offsets (the support size of an interior row).
    pub fn support(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_boundary(&self, x: Cell) -> bool {
        self.norms[x].inv_norm == 0.0
    }

    /// Normalized kernel entries of the row at `x`.
    pub fn row(&self, x: Cell) -> impl Iterator<Item = (Cell, f64)> + '_ {
        let n = self.norms[x];
        self.offsets.iter().filter_map(move |o| {
            if o.w < n.cut {
                return None;
            }
            target(&self.spec, self.side, x, o).map(|y| (y, o.w * n.inv_norm))
        })
    }

    pub fn value(&self, x: Cell, y: Cell) -> f64 {
        let in_cone = match self.side {
            Side::Future => self.spec.in_future_cone(x, y),
            Side::Past => self.spec.in_past_cone(x, y),
        };
        if !in_cone {
            return 0.0;
        }
        let (dt, di) = separation(x, y);
        let n = self.norms[x];
        self.offsets
            .iter()
            .find(|o| o.dt == dt && o.di == di)
            .filter(|o| o.w >= n.cut)
            .map_or(0.0, |o| o.w * n.inv_norm)
    }

    /// Largest entry of the row at `x`.
    pub fn row_max(&self, x: Cell) -> f64 {
        self.row(x).fold(0.0, |m, (_, v)| m.max(v))
    }
}

fn target(spec: &LatticeSpec, side: Side, x: Cell, o: &Offset) -> Option<Cell> {
    let t = match side {
        Side::Future => x.t.checked_add(o.dt).filter(|&t| t < spec.steps())?,
        Side::Past => x.t.checked_sub(o.dt)?,
    };
    let i = x.i as i64 + o.di;
    (i >= 0 && (i as usize) < spec.sites()).then(|| Cell::new(i as usize, t))
}

// Smallest value of the contraction over unit-time separations in the cone.
fn cone_min(stress: &StressTensor) -> f64 {
    let q = |u: f64| stress.contract(1.0, u);
    let mut m = q(-1.0).min(q(1.0));
    if stress.t11 > 0.0 {
        let u = stress.t01 / stress.t11;
        if u.abs() <= 1.0 {
            m = m.min(q(u));
        }
    }
    m
}
