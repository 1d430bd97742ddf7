use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use pointer_collapse_core::kernel::{KernelTable, Side, StressTensor};
use pointer_collapse_core::lattice::{advance, plc_surface, precedes};
use pointer_collapse_core::{Cell, Foliation, LatticeSpec, Surface};

fn lattice() -> impl Strategy<Value = LatticeSpec> {
    (2usize..7, 2usize..7, prop_oneof![Just(1.0), Just(0.5), Just(0.7), Just(0.3)])
        .prop_map(|(n, t, dt)| LatticeSpec::new(n, t, 1.0, dt, 0.0).unwrap())
}

fn heights(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0usize..4, n)
}

proptest! {
    #[test]
    fn precedes_is_a_partial_order(a in heights(4), b in heights(4), c in heights(4)) {
        let (a, b, c) = (Surface::from_heights(a), Surface::from_heights(b), Surface::from_heights(c));
        prop_assert!(precedes(&a, &a).unwrap());
        if precedes(&a, &b).unwrap() && precedes(&b, &a).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        if precedes(&a, &b).unwrap() && precedes(&b, &c).unwrap() {
            prop_assert!(precedes(&a, &c).unwrap());
        }
    }

    #[test]
    fn random_foliations_are_maximal_spacelike_chains(spec in lattice(), seed in any::<u64>()) {
        let f = Foliation::random(&spec, seed);
        prop_assert_eq!(f.len(), spec.num_cells());
        let mut prev = Surface::initial(&spec);
        let mut seen = vec![false; spec.num_cells()];
        for (s, c) in f.surfaces() {
            prop_assert!(s.is_spacelike(&spec));
            prop_assert!(precedes(&prev, &s).unwrap());
            prop_assert_eq!(s.swept(), prev.swept() + 1);
            prop_assert!(!seen[spec.index(c)]);
            seen[spec.index(c)] = true;
            prev = s;
        }
        prop_assert_eq!(prev, Surface::terminal(&spec));
        // rebuilding from the cell list validates every advance again
        let again = Foliation::from_cells(spec, Surface::initial(&spec), f.cells().to_vec(), f.kind());
        prop_assert!(again.is_ok());
    }

    #[test]
    fn advances_keep_surfaces_spacelike(spec in lattice(), sites in proptest::collection::vec(0usize..7, 0..40)) {
        let mut s = Surface::initial(&spec);
        for site in sites {
            match advance(&spec, &s, site) {
                Ok(next) => {
                    prop_assert!(next.is_spacelike(&spec));
                    prop_assert!(precedes(&s, &next).unwrap());
                    s = next;
                }
                Err(_) => prop_assert!(site >= spec.sites() || s.check_advance(&spec, site).is_err()),
            }
        }
    }

    #[test]
    fn plc_surface_passes_through_x(spec in lattice(), i in 0usize..7, t in 0usize..7) {
        prop_assume!(spec.contains(i, t));
        let x = Cell::new(i, t);
        let s = plc_surface(&spec, x);
        prop_assert!(s.is_spacelike(&spec));
        prop_assert!(s.lies_on(x));
        // the cone edge falls dx/dt rows per site and a surface at most
        // floor(dx/dt), so containment needs an integer ratio
        let ratio = spec.dx() / spec.dt();
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Ok(());
        }
        for c in spec.cells().filter(|c| s.is_past(*c)) {
            prop_assert!(spec.in_past_cone(x, c));
        }
    }

    #[test]
    fn kernels_are_normalized_on_the_clipped_cone(
        k in 0.05f64..3.0,
        t00 in 0.5f64..2.0,
        t01 in -0.3f64..0.3,
        dt in prop_oneof![Just(0.5), Just(1.0)],
    ) {
        let spec = LatticeSpec::new(6, 6, 1.0, dt, 0.0).unwrap();
        let stress = StressTensor { t00, t01, t11: 0.5 };
        for side in [Side::Future, Side::Past] {
            let table = KernelTable::new(&spec, side, k, &stress).unwrap();
            for x in spec.cells() {
                let sum: f64 = table.row(x).map(|(_, v)| v).sum::<f64>() * spec.cell_volume();
                if table.is_boundary(x) {
                    prop_assert_eq!(sum, 0.0);
                    continue;
                }
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
                for (y, v) in table.row(x) {
                    prop_assert!(v > 0.0);
                    let inside = match side {
                        Side::Future => spec.in_future_cone(x, y),
                        Side::Past => spec.in_past_cone(x, y),
                    };
                    prop_assert!(inside);
                    prop_assert_eq!(table.value(x, y), v);
                }
            }
        }
    }
}

#[test]
fn boundary_rows_have_no_kernel() {
    let spec = LatticeSpec::new(5, 4, 1.0, 1.0, 0.0).unwrap();
    let g = KernelTable::new(&spec, Side::Future, 1.0, &StressTensor::rest(1.0)).unwrap();
    let f = KernelTable::new(&spec, Side::Past, 1.0, &StressTensor::rest(1.0)).unwrap();
    for i in 0..5 {
        assert!(g.is_boundary(Cell::new(i, 3)));
        assert!(f.is_boundary(Cell::new(i, 0)));
        assert!(!g.is_boundary(Cell::new(i, 0)));
    }
}
