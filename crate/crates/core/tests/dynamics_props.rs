use std::sync::Arc;

use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;

use pointer_collapse_core::dynamics::{BranchState, CollapseParams, Integrator, Scheme};
use pointer_collapse_core::path::{run_path, RunOptions};
use pointer_collapse_core::pointer::BranchProfile;
use pointer_collapse_core::{CellField, Complex64, Foliation, LatticeSpec, NoiseField};

fn spec() -> LatticeSpec {
    LatticeSpec::new(5, 6, 1.0, 0.5, 0.0).unwrap()
}

/// Branch `b` carries number `scale * (b + 1)` on sites `b % 5` and `(b + 2) % 5`.
fn profiles(spec: &LatticeSpec, k: usize, scale: f64) -> Arc<[BranchProfile]> {
    (0..k)
        .map(|b| {
            let n = CellField::from_fn(spec, |c| {
                if c.i == b % spec.sites() || c.i == (b + 2) % spec.sites() {
                    scale * (b + 1) as f64
                } else {
                    0.0
                }
            });
            BranchProfile::from_density(n.map(|v| v.sqrt())).with_number(n)
        })
        .collect()
}

fn amplitudes() -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((0.05f64..1.0, -3.0f64..3.0), 2..5)
        .prop_map(|v| v.into_iter().map(|(r, p)| Complex64::from_polar(r, p)).collect())
}

fn params(lambda: f64, integrator: Integrator) -> CollapseParams {
    CollapseParams::new(lambda, 0.01, integrator, Scheme::Exponential).unwrap()
}

proptest! {
    #[test]
    fn linear_evolution_is_linear(amps in amplitudes(), c in 0.1f64..10.0, seed in any::<u64>()) {
        let s = spec();
        let prof = profiles(&s, amps.len(), 1.0);
        let scaled: Vec<Complex64> = amps.iter().map(|a| a * c).collect();
        let p = params(0.7, Integrator::Linear);
        let f = Foliation::standard(&s);
        let noise = NoiseField::new(&s, seed);
        let opts = RunOptions::default();
        let a = run_path(&BranchState::new(&s, &amps, prof.clone(), false).unwrap(), &f, &noise, &p, &opts).unwrap();
        let b = run_path(&BranchState::new(&s, &scaled, prof, false).unwrap(), &f, &noise, &p, &opts).unwrap();
        assert_abs_diff_eq!(b.final_log_norm2 - a.final_log_norm2, 2.0 * c.ln(), epsilon = 1e-9);
        for (x, y) in a.final_weights.iter().zip(&b.final_weights) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn nonlinear_states_stay_normalized(amps in amplitudes(), lambda in 0.0f64..2.0, seed in any::<u64>()) {
        let s = spec();
        let st = BranchState::new(&s, &amps, profiles(&s, amps.len(), 1.0), true).unwrap();
        let rec = run_path(&st, &Foliation::standard(&s), &NoiseField::new(&s, seed), &params(lambda, Integrator::Nonlinear), &RunOptions::default()).unwrap();
        assert_abs_diff_eq!(rec.final_weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        prop_assert!(rec.final_weights.iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn variance_is_bounded_by_the_spread(amps in amplitudes(), scale in 0.1f64..20.0) {
        let s = spec();
        let prof = profiles(&s, amps.len(), scale);
        let st = BranchState::new(&s, &amps, prof.clone(), true).unwrap();
        for x in s.cells() {
            let (lo, hi) = prof.iter().map(|p| p.n[x]).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            let var = st.variance_n(x);
            prop_assert!(var >= -1e-12 * hi * hi);
            prop_assert!(var <= (hi - lo).powi(2) / 4.0 * (1.0 + 1e-12) + 1e-15);
            prop_assert!(st.quantum_expectation_n(x) >= lo - 1e-12 && st.quantum_expectation_n(x) <= hi + 1e-12);
        }
        for t in 0..s.steps() {
            prop_assert!(st.variance_integral(&s, t) >= 0.0);
        }
    }

    #[test]
    fn linear_weights_do_not_depend_on_the_foliation(amps in amplitudes(), seed in any::<u64>(), fseed in any::<u64>()) {
        let s = spec();
        let st = BranchState::new(&s, &amps, profiles(&s, amps.len(), 1.0), false).unwrap();
        let p = params(0.9, Integrator::Linear);
        let noise = NoiseField::new(&s, seed);
        let opts = RunOptions::default();
        let a = run_path(&st, &Foliation::standard(&s), &noise, &p, &opts).unwrap();
        let b = run_path(&st, &Foliation::random(&s, fseed), &noise, &p, &opts).unwrap();
        assert_abs_diff_eq!(a.final_log_norm2, b.final_log_norm2, epsilon = 1e-9);
        for (x, y) in a.final_weights.iter().zip(&b.final_weights) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn noise_is_a_pure_function_of_seed_path_and_cell(seed in any::<u64>(), path in any::<u64>()) {
        let s = spec();
        let a = NoiseField::for_path(&s, seed, path);
        let b = NoiseField::for_path(&s, seed, path);
        let mut cells: Vec<_> = s.cells().collect();
        cells.reverse();
        let fwd: Vec<u64> = s.cells().map(|c| a.sample_dw(c).to_bits()).collect();
        prop_assert_eq!(fwd.len(), cells.len());
        for c in cells {
            prop_assert_eq!(a.sample_dw(c).to_bits(), b.sample_dw(c).to_bits());
        }
    }
}

#[test]
fn zero_lambda_leaves_the_state_alone() {
    let s = spec();
    let amps = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
    let st = BranchState::new(&s, &amps, profiles(&s, 2, 1.0), true).unwrap();
    let rec = run_path(&st, &Foliation::standard(&s), &NoiseField::new(&s, 3), &params(0.0, Integrator::Nonlinear), &RunOptions::default()).unwrap();
    assert_relative_eq!(rec.final_weights[0], 0.36, max_relative = 1e-12);
    assert_relative_eq!(rec.final_weights[1], 0.64, max_relative = 1e-12);
    assert_eq!(rec.outcome, None);
}

#[test]
fn noise_increments_have_cell_variance() {
    let s = LatticeSpec::new(50, 40, 0.2, 0.05, 0.0).unwrap();
    let mut m2 = 0.0;
    let mut n = 0;
    for path in 0..10 {
        let noise = NoiseField::for_path(&s, 11, path);
        for c in s.cells() {
            m2 += noise.sample_dw(c).powi(2);
            n += 1;
        }
    }
    // 20000 draws: relative standard error of the variance is 1%
    assert_relative_eq!(m2 / n as f64, s.cell_volume(), max_relative = 0.04);
}
