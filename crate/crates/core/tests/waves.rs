use std::f64::consts::PI;

use pointint::gamma::PointConfig;
use pointint::packet::{BumpProfile, WavePacket};
use pointint::quad::{composite_on, legendre_on};
use pointint::waveop::{isometry_check, wave_pairing, wave_pairing_point, Direction, WaveField, WaveOptions};
use pointint::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shell() -> BumpProfile {
    BumpProfile::new(1.0, 2.0).unwrap()
}

#[test]
fn correction_matches_real_space_quadrature() {
    let cfg = PointConfig::new(vec![[0.0; 3]], vec![0.03]).unwrap();
    let u = WavePacket::radial(shell(), [0.0; 3]);
    let v = WavePacket::radial(BumpProfile::new(0.8, 1.8).unwrap(), [0.4, 0.0, 0.0]);
    let opts = WaveOptions::default();
    let field = WaveField::new(&cfg, &u, opts).unwrap();
    // brute force in spherical coordinates about the centre; v is
    // axisymmetric about the x axis so the azimuth integrates to 2 pi.
    // The bump tails decay only like exp(-c sqrt(r)), hence the long range.
    let (r, wr) = composite_on(16, 240, 0.0, 120.0);
    let (c, wc) = legendre_on(96, -1.0, 1.0);
    let mut acc = C64::new(0.0, 0.0);
    for (r, wr) in r.iter().zip(&wr) {
        let s = field.scattered([*r, 0.0, 0.0]).unwrap();
        let mut ang = C64::new(0.0, 0.0);
        for (c, wc) in c.iter().zip(&wc) {
            let x = [r * c, r * (1.0 - c * c).sqrt(), 0.0];
            ang += v.eval(x).conj() * *wc;
        }
        acc += s * ang * (2.0 * PI * r * r * wr);
    }
    let want = wave_pairing_point(&cfg, &u, &v, opts).unwrap().correction;
    assert!((acc - want).norm() < 1e-6 * want.norm(), "{acc} vs {want}");
}

#[test]
fn infinite_strength_decouples() {
    let cfg = PointConfig::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![1e10, 1e10]).unwrap();
    let u = WavePacket::radial(shell(), [0.2, 0.0, 0.0]);
    let v = WavePacket::radial(shell(), [0.0, 0.3, 0.0]);
    let p = wave_pairing_point(&cfg, &u, &v, WaveOptions::default()).unwrap();
    assert!(p.correction.norm() < 1e-8 * p.free.norm());
}

#[test]
fn random_configurations_are_isometric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let centers = (0..3).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let alpha = (0..3).map(|_| rng.gen_range(0.0..0.2)).collect();
        let cfg = PointConfig::new(centers, alpha).unwrap();
        let u = WavePacket::radial(shell(), [rng.gen_range(-0.5..0.5), 0.0, 0.0]);
        let chk = isometry_check(&cfg, &u, WaveOptions::default()).unwrap();
        assert!(chk.rel_err < 1e-10, "{chk:?}");
    }
}

#[test]
fn minus_pairing_of_real_packets_is_conjugate() {
    // radial packets centred on the real axis are real functions; then
    // <W- u, v> = conj(<W+ u, v>)
    let cfg = PointConfig::new(vec![[0.0; 3], [0.0, 0.8, 0.0]], vec![0.04, -0.01]).unwrap();
    let u = WavePacket::radial(shell(), [0.0; 3]);
    let v = WavePacket::radial(BumpProfile::new(1.2, 2.2).unwrap(), [0.0; 3]);
    let opts = WaveOptions::default();
    let plus = wave_pairing(&cfg, Direction::Plus, &u, &v, opts).unwrap();
    let minus = wave_pairing(&cfg, Direction::Minus, &u, &v, opts).unwrap();
    assert!((minus - plus.conj()).norm() < 1e-13 * plus.norm());
    assert!(plus.im.abs() > 1e-8, "scattering should leave a phase");
}
