//! Coherent-state records and their smeared number statistics.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::field::CellField;
use crate::kernel::{KernelParams, KernelTable, Side};
use crate::lattice::{Cell, Foliation, LatticeSpec, Surface};
use crate::{Error, Result};

/// Coherent amplitude `alpha(y)` of the pointer mode at each cell, after the
/// matter-pointer interaction has been accumulated up to `surface`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaField {
    values: CellField<Complex64>,
    surface: Surface,
}

impl AlphaField {
    pub fn zeros(spec: &LatticeSpec) -> Self {
        Self { values: CellField::filled(spec, Complex64::new(0.0, 0.0)), surface: Surface::initial(spec) }
    }

    /// Record with explicit amplitudes, written on the initial surface.
    pub fn from_values(spec: &LatticeSpec, values: CellField<Complex64>) -> Result<Self> {
        if !values.matches(spec) {
            return Err(Error::LatticeMismatch);
        }
        Ok(Self { values, surface: Surface::initial(spec) })
    }

    pub fn values(&self) -> &CellField<Complex64> {
        &self.values
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn get(&self, y: Cell) -> Complex64 {
        self.values[y]
    }

    /// Adds the record written by the matter density at `x`.
    pub fn add_source(&mut self, x: Cell, j: f64, g: &KernelTable) {
        if j == 0.0 {
            return;
        }
        let c = -j * g.spec().cell_volume();
        for (y, gv) in g.row(x) {
            self.values[y].im += c * gv;
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.map(|a| a * s), surface: self.surface.clone() }
    }
}

/// Matter density, smeared number eigenvalue and energy density of one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchProfile {
    pub j: CellField<f64>,
    pub n: CellField<f64>,
    pub e: CellField<f64>,
}

impl BranchProfile {
    /// A branch with energy density equal to its matter density and no
    /// record yet.
    pub fn from_density(j: CellField<f64>) -> Self {
        Self { n: j.map(|_| 0.0), e: j.clone(), j }
    }

    pub fn with_energy(mut self, e: CellField<f64>) -> Self {
        self.e = e;
        self
    }

    pub fn with_number(mut self, n: CellField<f64>) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self, spec: &LatticeSpec) -> Result<()> {
        if !(self.j.matches(spec) && self.n.matches(spec) && self.e.matches(spec)) {
            return Err(Error::LatticeMismatch);
        }
        for (c, &v) in self.n.iter() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain { i: c.i, t: c.t });
            }
        }
        Ok(())
    }

    /// Mean energy density over the cells where it is nonzero.
    pub fn lump_energy(&self) -> f64 {
        let (sum, count) = self
            .e
            .as_slice()
            .iter()
            .filter(|v| **v != 0.0)
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

/// `alpha(y) = -i sum_x dw J(x) g(x, y)` over the cells swept by `segment`.
pub fn accumulate_alpha(j: &CellField<f64>, segment: &Foliation, g: &KernelTable) -> AlphaField {
    let mut alpha = AlphaField {
        values: CellField::filled(g.spec(), Complex64::new(0.0, 0.0)),
        surface: segment.initial().clone(),
    };
    for &x in segment.cells() {
        alpha.add_source(x, j[x], g);
    }
    alpha.surface = segment.final_surface();
    alpha
}

/// `<alpha| N(x) |alpha> = sum_y dw f(x, y) |alpha(y)|^2`.
pub fn n_expectation(alpha: &AlphaField, x: Cell, f: &KernelTable) -> f64 {
    let dw = f.spec().cell_volume();
    f.row(x).map(|(y, fv)| dw * fv * alpha.values[y].norm_sqr()).sum()
}

/// Coherent-state variance of `N(x)`, `sum_y dw f(x, y)^2 |alpha(y)|^2`.
pub fn n_variance(alpha: &AlphaField, x: Cell, f: &KernelTable) -> f64 {
    let dw = f.spec().cell_volume();
    f.row(x).map(|(y, fv)| dw * fv * fv * alpha.values[y].norm_sqr()).sum()
}

/// How a branch's `N` profile is derived from its matter density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Idealization {
    /// `N(x) = <alpha|N(x)|alpha>` from the accumulated record.
    Exact,
    /// `N = J^2` wherever `J != 0`: the narrow-kernel limit.
    #[default]
    Plateau,
}

/// Options for [`branch_image`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageOptions {
    pub idealization: Idealization,
    /// Plateau mode requires the kernel correlation length to be at most
    /// `plateau_guard` times the narrowest feature of `J`.
    pub plateau_guard: f64,
    /// Exact mode: the record is written by cells with `t < interaction_rows`
    /// only; `None` lets it grow over the whole lattice.
    pub interaction_rows: Option<usize>,
}

impl Default for ImageOptions {
    fn default() -> Self {
        Self { idealization: Idealization::Plateau, plateau_guard: 0.5, interaction_rows: None }
    }
}

/// Fills `profile.n` from `profile.j`.
pub fn branch_image(
    spec: &LatticeSpec,
    profile: BranchProfile,
    kernel: &KernelParams,
    opts: &ImageOptions,
) -> Result<BranchProfile> {
    if !profile.j.matches(spec) {
        return Err(Error::LatticeMismatch);
    }
    match opts.idealization {
        Idealization::Plateau => {
            let width = min_feature_width(spec, &profile.j);
            let length = kernel.correlation_length();
            let limit = opts.plateau_guard * width;
            if width.is_finite() && !(length <= limit) {
                return Err(Error::PlateauInvalid { length, limit });
            }
            let n = profile.j.map(|&j| if j != 0.0 { j * j } else { 0.0 });
            Ok(profile.with_number(n))
        }
        Idealization::Exact => {
            let g = KernelTable::new(spec, Side::Future, kernel.k, &kernel.stress)?;
            let f = KernelTable::new(spec, Side::Past, kernel.k, &kernel.stress)?;
            let n = exact_image(spec, &profile.j, &g, &f, opts.interaction_rows);
            Ok(profile.with_number(n))
        }
    }
}

/// Exact-mode `N` profile from prebuilt kernel tables.
pub fn exact_image(
    spec: &LatticeSpec,
    j: &CellField<f64>,
    g: &KernelTable,
    f: &KernelTable,
    interaction_rows: Option<usize>,
) -> CellField<f64> {
    let rows = interaction_rows.unwrap_or(spec.steps()).min(spec.steps());
    let to = Surface::flat(spec, rows);
    let segment = Foliation::between(spec, &Surface::initial(spec), &to).expect("flat surfaces are ordered");
    let alpha = accumulate_alpha(j, &segment, g);
    CellField::from_fn(spec, |x| n_expectation(&alpha, x, f))
}

/// Narrowest contiguous nonzero run of `j`, measured along space in units of
/// length and along time in units of time. Time runs cut off by the first or
/// last row are not features. Infinite when `j` vanishes.
pub fn min_feature_width(spec: &LatticeSpec, j: &CellField<f64>) -> f64 {
    let mut best = f64::INFINITY;
    for t in 0..spec.steps() {
        let row = j.row(t);
        for (_, len) in runs(row.iter().copied()) {
            best = best.min(len as f64 * spec.dx());
        }
    }
    for i in 0..spec.sites() {
        let column = (0..spec.steps()).map(|t| j[Cell::new(i, t)]);
        for (start, len) in runs(column) {
            if start > 0 && start + len < spec.steps() {
                best = best.min(len as f64 * spec.dt());
            }
        }
    }
    best
}

fn runs(values: impl Iterator<Item = f64>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    let mut n = 0;
    for (k, v) in values.enumerate() {
        n = k + 1;
        match (v != 0.0, open) {
            (true, None) => open = Some(k),
            (false, Some(s)) => {
                out.push((s, k - s));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(s) = open {
        out.push((s, n - s));
    }
    out
}

/// Spatial intervals `[lo, hi)` in coordinates, turned into a density that is
/// `value` on every cell whose centre lies inside, for all times.
pub fn plateau_density(spec: &LatticeSpec, intervals: &[(f64, f64)], value: f64) -> CellField<f64> {
    let inside: Vec<bool> = (0..spec.sites())
        .map(|i| {
            let x = spec.x1(i);
            intervals.iter().any(|&(lo, hi)| x >= lo && x < hi)
        })
        .collect();
    CellField::from_fn(spec, |c| if inside[c.i] { value } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{KernelMode, StressTensor};

    fn spec() -> LatticeSpec {
        LatticeSpec::new(9, 8, 1.0, 1.0, 0.0).unwrap()
    }

    fn tables(s: &LatticeSpec) -> (KernelTable, KernelTable) {
        let st = StressTensor::rest(1.0);
        (
            KernelTable::new(s, Side::Future, 0.2, &st).unwrap(),
            KernelTable::new(s, Side::Past, 0.2, &st).unwrap(),
        )
    }

    #[test]
    fn zero_density_leaves_no_record() {
        let s = spec();
        let (g, f) = tables(&s);
        let alpha = accumulate_alpha(&CellField::filled(&s, 0.0), &Foliation::standard(&s), &g);
        assert!(alpha.values().as_slice().iter().all(|a| a.norm() == 0.0));
        assert_eq!(n_expectation(&alpha, Cell::new(4, 5), &f), 0.0);
        assert_eq!(n_variance(&alpha, Cell::new(4, 5), &f), 0.0);
    }

    #[test]
    fn single_source_record() {
        let s = spec();
        let (g, _) = tables(&s);
        let x0 = Cell::new(4, 1);
        let mut j = CellField::filled(&s, 0.0);
        j[x0] = 3.0;
        let alpha = accumulate_alpha(&j, &Foliation::standard(&s), &g);
        for y in s.cells() {
            let a = alpha.get(y);
            assert_eq!(a.re, 0.0);
            assert!((a.im + 3.0 * g.value(x0, y) * s.cell_volume()).abs() < 1e-15);
            assert_eq!(a.im != 0.0, s.in_future_cone(x0, y));
        }
    }

    #[test]
    fn uniform_record_gives_its_intensity() {
        let s = spec();
        let (_, f) = tables(&s);
        let mut alpha = AlphaField::zeros(&s);
        for v in alpha.values.as_mut_slice() {
            *v = Complex64::new(0.0, 2.0);
        }
        let x = Cell::new(4, 6);
        assert!((n_expectation(&alpha, x, &f) - 4.0).abs() < 1e-12);
        assert!(n_variance(&alpha, x, &f) <= f.row_max(x) * 4.0 + 1e-12);
    }

    #[test]
    fn plateau_image_of_the_lumps() {
        let s = LatticeSpec::new(60, 4, 0.05, 1e-6, -1.475).unwrap();
        let j = plateau_density(&s, &[(-1.0, 0.0)], 10.0);
        let k = KernelParams::new(4e9, KernelMode::Static, StressTensor::rest(10.0)).unwrap();
        let p = branch_image(&s, BranchProfile::from_density(j), &k, &ImageOptions::default()).unwrap();
        let cells_on: Vec<usize> = (0..60).filter(|&i| p.n[Cell::new(i, 0)] == 100.0).collect();
        assert_eq!(cells_on.len(), 20);
        assert_eq!(cells_on[0], 10);
        assert!((0..60).all(|i| [0.0, 100.0].contains(&p.n[Cell::new(i, 3)])));
    }

    #[test]
    fn plateau_guard_rejects_wide_kernels() {
        let s = spec();
        let j = plateau_density(&s, &[(2.0, 4.0)], 1.0);
        let k = KernelParams::new(0.01, KernelMode::Static, StressTensor::rest(1.0)).unwrap();
        let r = branch_image(&s, BranchProfile::from_density(j), &k, &ImageOptions::default());
        assert!(matches!(r, Err(Error::PlateauInvalid { .. })));
    }

    #[test]
    fn exact_image_matches_plateau_in_the_bulk() {
        // vertical cones: dt much smaller than dx, kernel a few rows long
        let s = LatticeSpec::new(30, 80, 0.1, 1e-3, 0.0).unwrap();
        let j = plateau_density(&s, &[(0.5, 2.5)], 4.0);
        let k = KernelParams::new(1e5, KernelMode::Static, StressTensor::rest(4.0)).unwrap();
        let exact = ImageOptions { idealization: Idealization::Exact, ..Default::default() };
        let a = branch_image(&s, BranchProfile::from_density(j.clone()), &k, &exact).unwrap();
        let b = branch_image(&s, BranchProfile::from_density(j), &k, &ImageOptions::default()).unwrap();
        for t in 20..80 {
            for i in 7..23 {
                let c = Cell::new(i, t);
                assert!((a.n[c] - b.n[c]).abs() < 0.05 * 16.0, "{c:?} {} {}", a.n[c], b.n[c]);
            }
        }
    }
}
