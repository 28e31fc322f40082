use std::f64::consts::PI;

use pointint::gamma::PointConfig;
use pointint::green::{QuadGrid, SingularityRule, Wavenumber};
use pointint::krein::{apply_point_resolvent, first_resolvent_residual, Source};
use pointint::packet::{BumpProfile, WavePacket};
use pointint::{C64, I};

fn green(z: C64, r: f64) -> C64 {
    (I * z * r).exp() / (4.0 * PI * r)
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[test]
fn single_centre_rank_one_formula() {
    let y = [0.2, 0.0, -0.3];
    let alpha = 0.07;
    let cfg = PointConfig::new(vec![y], vec![alpha]).unwrap();
    let z = Wavenumber::new(C64::new(0.8, 1.3)).unwrap();
    let u = WavePacket::radial(BumpProfile::new(1.0, 2.0).unwrap(), [0.0; 3]);
    let points = [[1.0, 0.5, 0.0], [-0.4, 2.0, 1.0]];
    let got = apply_point_resolvent(&cfg, z, Source::Packet(&u), &points).unwrap();
    let at_y = u.green_pairing(z, y);
    for (p, g) in points.iter().zip(&got) {
        let want = u.green_pairing(z, *p) + green(z.value(), dist(*p, y)) * at_y / (alpha - I * z.value() / (4.0 * PI));
        assert!((g - want).norm() < 1e-12 * want.norm(), "{g} vs {want}");
    }
}

#[test]
fn strong_coupling_limit_is_free() {
    let cfg = PointConfig::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![1e9, 1e9]).unwrap();
    let z = Wavenumber::imaginary(1.0);
    let u = WavePacket::radial(BumpProfile::new(1.0, 2.0).unwrap(), [0.1, 0.2, 0.0]);
    let p = [[0.5, 0.7, 0.0]];
    let got = apply_point_resolvent(&cfg, z, Source::Packet(&u), &p).unwrap()[0];
    let free = u.green_pairing(z, p[0]);
    assert!((got - free).norm() < 1e-8 * free.norm());
}

/// Midpoint grid with `n^3` cubic cells on `[-h, h]^3`.
fn cube(n: usize, h: f64) -> QuadGrid {
    let d = 2.0 * h / n as f64;
    let x: Vec<f64> = (0..n).map(|i| -h + (i as f64 + 0.5) * d).collect();
    let mut nodes = Vec::new();
    for a in &x {
        for b in &x {
            for c in &x {
                nodes.push([*a, *b, *c]);
            }
        }
    }
    let weights = vec![d * d * d; nodes.len()];
    QuadGrid::new(nodes, weights).unwrap()
}

fn gaussian_samples(g: &QuadGrid) -> Vec<C64> {
    g.nodes.iter().map(|x| C64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(), 0.0)).collect()
}

#[test]
fn first_resolvent_identity_improves_with_the_grid() {
    let cfg = PointConfig::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![0.1, -0.02]).unwrap();
    let (z1, z2) = (Wavenumber::imaginary(2.0), Wavenumber::imaginary(3.0));
    let res: Vec<f64> = [8, 12, 16]
        .iter()
        .map(|&n| {
            let g = cube(n, 3.0);
            first_resolvent_residual(&cfg, z1, z2, &g, &gaussian_samples(&g), SingularityRule::CellAverage).unwrap()
        })
        .collect();
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
}

#[test]
fn equal_arguments_give_zero_residual() {
    let cfg = PointConfig::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![0.1, -0.02]).unwrap();
    let z = Wavenumber::imaginary(2.0);
    let g = cube(6, 3.0);
    let r = first_resolvent_residual(&cfg, z, z, &g, &gaussian_samples(&g), SingularityRule::CellAverage).unwrap();
    assert_eq!(r, 0.0);
}

#[test]
fn real_input_gives_real_output_on_the_imaginary_axis() {
    let cfg = PointConfig::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![0.1, -0.02]).unwrap();
    let g = cube(6, 3.0);
    let r = pointint::krein::PointResolvent::new(&cfg, Wavenumber::imaginary(1.5)).unwrap();
    let out = r.apply_on_grid(&g, &gaussian_samples(&g), SingularityRule::CellAverage).unwrap();
    assert!(out.iter().all(|v| v.im.abs() < 1e-14 * v.norm().max(1e-300)));
}

#[test]
fn sample_sources_converge_to_the_packet_route() {
    let cfg = PointConfig::new(vec![[0.0; 3]], vec![0.05]).unwrap();
    let z = Wavenumber::imaginary(2.0);
    let u = WavePacket::radial(BumpProfile::new(0.2, 1.5).unwrap(), [0.0; 3]);
    let p = [[0.3, 0.0, 0.4]];
    let exact = apply_point_resolvent(&cfg, z, Source::Packet(&u), &p).unwrap()[0];
    let errs: Vec<f64> = [16, 32, 48]
        .iter()
        .map(|&n| {
            let g = cube(n, 9.0);
            let values: Vec<C64> = g.nodes.iter().map(|x| u.eval(*x)).collect();
            let b = apply_point_resolvent(&cfg, z, Source::Samples { grid: &g, values: &values }, &p).unwrap()[0];
            (b - exact).norm() / exact.norm()
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[2] < 0.05, "{errs:?}");
}
