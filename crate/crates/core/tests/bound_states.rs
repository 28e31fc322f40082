use std::f64::consts::PI;

use pointint::gamma::{build_gamma, find_bound_states, gamma_entries, PointConfig, SearchOptions};
use pointint::green::Wavenumber;
use pointint::C64;
use proptest::prelude::*;

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn single_centre_root(alpha in -1.0f64..-0.01) {
        let cfg = PointConfig::new(vec![[0.3, -0.2, 1.0]], vec![alpha]).unwrap();
        let b = find_bound_states(&cfg, 20.0, SearchOptions::default()).unwrap();
        prop_assert_eq!(b.states.len(), 1);
        prop_assert!((b.states[0].kappa + 4.0 * PI * alpha).abs() < 1e-9);
    }

    #[test]
    fn gamma_conjugation(alpha in -1.0f64..1.0, re in -5.0f64..5.0, im in 0.0f64..3.0) {
        let cfg = PointConfig::new(vec![[0.0; 3], [0.7, 0.1, 0.0], [0.0, 1.1, -0.4]], vec![alpha, 0.2, -0.1]).unwrap();
        let g = gamma_entries(&cfg, C64::new(re, im));
        let h = gamma_entries(&cfg, C64::new(-re, im));
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((g[(i, j)] - g[(j, i)]).norm() < 1e-15);
                prop_assert!((g[(i, j)].conj() - h[(i, j)]).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn positive_strength_has_no_bound_state() {
    let cfg = PointConfig::new(vec![[0.0; 3]], vec![0.2]).unwrap();
    assert!(find_bound_states(&cfg, 20.0, SearchOptions::default()).unwrap().states.is_empty());
}

#[test]
fn symmetric_pair_has_even_and_odd_states() {
    let (alpha, d) = (-0.1, 1.5);
    let even = bisect(1e-9, 10.0, |k| alpha + k / (4.0 * PI) - (-k * d).exp() / (4.0 * PI * d));
    let odd = bisect(1e-9, 10.0, |k| alpha + k / (4.0 * PI) + (-k * d).exp() / (4.0 * PI * d));
    let cfg = PointConfig::new(vec![[0.0; 3], [0.0, 0.0, d]], vec![alpha, alpha]).unwrap();
    let b = find_bound_states(&cfg, 20.0, SearchOptions::default()).unwrap();
    let mut got: Vec<f64> = b.states.iter().map(|s| s.kappa).collect();
    got.sort_by(|a, b| b.total_cmp(a));
    assert_eq!(got.len(), 2, "{got:?}");
    assert!((got[0] - even).abs() < 1e-9 && (got[1] - odd).abs() < 1e-9, "{got:?} vs {even}, {odd}");
}

#[test]
fn translation_does_not_move_roots() {
    let cfg = PointConfig::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![-0.05, 0.01, -0.02]).unwrap();
    let a = find_bound_states(&cfg, 20.0, SearchOptions::default()).unwrap();
    let b = find_bound_states(&cfg.translated([3.0, -2.0, 7.5]), 20.0, SearchOptions::default()).unwrap();
    assert_eq!(a.states.len(), b.states.len());
    for (x, y) in a.states.iter().zip(&b.states) {
        assert!((x.kappa - y.kappa).abs() < 1e-10);
    }
}

#[test]
fn triangle_degeneracy_is_counted() {
    // equilateral triangle: the two states orthogonal to the symmetric one are degenerate
    let h = 3f64.sqrt() / 2.0;
    let cfg = PointConfig::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [0.5, h, 0.0]], vec![-0.15; 3]).unwrap();
    let b = find_bound_states(&cfg, 20.0, SearchOptions::default()).unwrap();
    let alpha = -0.15;
    let pair = bisect(1e-9, 10.0, |k| alpha + k / (4.0 * PI) + (-k).exp() / (4.0 * PI));
    let s = b.states.iter().find(|s| (s.kappa - pair).abs() < 1e-7).expect("degenerate level");
    assert_eq!(s.multiplicity, 2);
    assert_eq!(b.states.iter().map(|s| s.multiplicity).sum::<usize>(), 3);
}

#[test]
fn gamma_is_singular_at_the_bound_state() {
    let cfg = PointConfig::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![0.0, 0.0]).unwrap();
    let k = bisect(0.0, 1.0, |k| k - (-k).exp());
    let g = build_gamma(&cfg, Wavenumber::imaginary(k));
    assert!(g.min_singular_value() < 1e-12);
    assert!(g.symmetry_defect() == 0.0);
}
