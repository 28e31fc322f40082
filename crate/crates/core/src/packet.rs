//! Wave packets with compactly supported Fourier transforms.
//!
//! Each elementary term has a transform of the form
//! `c * g(|xi - p|) * exp(-i xi . y0)` with a smooth bump `g` supported on an
//! annulus.  Pairings against the free kernel are computed on the Fourier
//! side, which reduces them to one-dimensional radial integrals of spherical
//! means.

use std::f64::consts::PI;

use crate::geom::{dot, frame, norm, scale, sub, Vec3};
use crate::green::Wavenumber;
use crate::quad::{composite_on, legendre_on};
use crate::{Error, Result, C64, I};

/// `(2 pi)^{-3/2}`.
pub const FOURIER_NORM: f64 = 0.063_493_635_934_240_97;

/// Smooth bump `A exp(-s t^2 / (1 - t^2))` on `[inner, outer]`, where `t`
/// maps the interval to `(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub inner: f64,
    pub outer: f64,
    pub sharpness: f64,
    pub amplitude: f64,
}

impl BumpProfile {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad bump support [{inner}, {outer}]")));
        }
        Ok(BumpProfile { inner, outer, sharpness: 8.0, amplitude: 1.0 })
    }

    pub fn with_sharpness(mut self, s: f64) -> Self {
        self.sharpness = s;
        self
    }

    pub fn with_amplitude(mut self, a: f64) -> Self {
        self.amplitude = a;
        self
    }

    #[inline]
    pub fn eval(&self, rho: f64) -> f64 {
        let t = (2.0 * rho - self.inner - self.outer) / (self.outer - self.inner);
        if t.abs() >= 1.0 {
            return 0.0;
        }
        let t2 = t * t;
        self.amplitude * (-self.sharpness * t2 / (1.0 - t2)).exp()
    }

    pub fn width(&self) -> f64 {
        self.outer - self.inner
    }
}

/// Momentum-space shape of an elementary term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Transform `g(|xi|)`: spherically symmetric about the centre.
    Radial,
    /// Transform `g(|xi - p|)`: a radial packet boosted by momentum `p`.
    Modulated { momentum: Vec3 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketTerm {
    pub coeff: C64,
    pub profile: BumpProfile,
    pub center: Vec3,
    pub shape: Shape,
}

impl PacketTerm {
    fn momentum(&self) -> Vec3 {
        match self.shape {
            Shape::Radial => [0.0; 3],
            Shape::Modulated { momentum } => momentum,
        }
    }

    /// Range of `|xi|` on which the transform can be nonzero.
    fn k_support(&self) -> (f64, f64) {
        let p = norm(self.momentum());
        let (a, b) = (self.profile.inner, self.profile.outer);
        if p == 0.0 {
            (a, b)
        } else {
            ((p - b).max(0.0).max(a - p), p + b)
        }
    }

    fn fourier(&self, xi: Vec3) -> C64 {
        let q = norm(sub(xi, self.momentum()));
        self.coeff * self.profile.eval(q) * (-I * dot(xi, self.center)).exp()
    }

    /// Radial real-space profile `(2pi)^{-3/2} (4 pi / r) int g(q) q sin(q r) dq`.
    fn radial_profile(&self, r: f64, nodes: usize) -> f64 {
        let g = &self.profile;
        let panels = 2 + (r * g.width() / 4.0).ceil() as usize;
        let (q, w) = composite_on(nodes.max(8), panels, g.inner, g.outer);
        let s: f64 = if r < 1e-8 {
            q.iter().zip(&w).map(|(q, w)| g.eval(*q) * q * q * w).sum()
        } else {
            q.iter().zip(&w).map(|(q, w)| g.eval(*q) * q * (q * r).sin() * w).sum::<f64>() / r
        };
        FOURIER_NORM * 4.0 * PI * s
    }

    fn eval(&self, x: Vec3, nodes: usize) -> C64 {
        let d = sub(x, self.center);
        let u = self.radial_profile(norm(d), nodes);
        self.coeff * u * (I * dot(self.momentum(), d)).exp()
    }

    /// `int_{S^2} \hat u(rho w) exp(i rho w . s) dw`.
    fn sphere_mean(&self, rho: f64, s: Vec3, nodes: usize) -> C64 {
        self.coeff * sphere_integral(&self.profile, self.momentum(), rho, sub(s, self.center), nodes)
    }
}

/// `int_{S^2} g(|rho w - p|) exp(i rho w . delta) dw`.
///
/// For `p = 0` this is `4 pi g(rho) sinc(rho |delta|)`.  Otherwise the polar
/// variable is traded for `q = |rho w - p|`, which confines the quadrature to
/// the part of the sphere meeting the support of `g`, and the azimuthal
/// integral about `p` is a Bessel function.
pub fn sphere_integral(g: &BumpProfile, p: Vec3, rho: f64, delta: Vec3, nodes: usize) -> C64 {
    let pn = norm(p);
    if pn == 0.0 {
        let x = rho * norm(delta);
        let sinc = if x < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
        return C64::new(4.0 * PI * g.eval(rho) * sinc, 0.0);
    }
    if rho == 0.0 {
        return C64::new(4.0 * PI * g.eval(pn), 0.0);
    }
    let lo = g.inner.max((rho - pn).abs());
    let hi = g.outer.min(rho + pn);
    if hi <= lo {
        return C64::new(0.0, 0.0);
    }
    let axis = scale(1.0 / pn, p);
    let par = dot(delta, axis);
    let perp = norm(sub(delta, scale(par, axis)));
    let osc = rho * norm(delta) * (hi - lo) / (2.0 * rho * pn / (rho + pn)).max(1e-3);
    let panels = 1 + (osc / 6.0).ceil().min(64.0) as usize;
    let (q, w) = composite_on(nodes.max(8), panels, lo, hi);
    let mut acc = C64::new(0.0, 0.0);
    for (q, w) in q.iter().zip(&w) {
        let gq = g.eval(*q);
        if gq == 0.0 {
            continue;
        }
        let t = ((rho * rho + pn * pn - q * q) / (2.0 * rho * pn)).clamp(-1.0, 1.0);
        let st = (1.0 - t * t).max(0.0).sqrt();
        let az = 2.0 * PI * libm::j0(rho * st * perp);
        acc += (I * rho * t * par).exp() * (az * gq * q / (rho * pn) * w);
    }
    acc
}

/// Linear combination of elementary packet terms.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    pub terms: Vec<PacketTerm>,
    /// Gauss-Legendre points per panel in the radial Fourier integrals.
    pub nodes: usize,
}

pub const DEFAULT_NODES: usize = 48;

impl WavePacket {
    pub fn radial(profile: BumpProfile, center: Vec3) -> Self {
        WavePacket {
            terms: vec![PacketTerm { coeff: C64::new(1.0, 0.0), profile, center, shape: Shape::Radial }],
            nodes: DEFAULT_NODES,
        }
    }

    /// Plane-wave modulated packet.  The momentum must exceed the outer
    /// radius of the profile so the transform vanishes near the origin.
    pub fn modulated(profile: BumpProfile, center: Vec3, momentum: Vec3) -> Result<Self> {
        if norm(momentum) <= profile.outer {
            return Err(Error::InvalidConfig(format!(
                "momentum {:.3} must exceed the profile's outer radius {:.3}",
                norm(momentum),
                profile.outer
            )));
        }
        Ok(WavePacket {
            terms: vec![PacketTerm {
                coeff: C64::new(1.0, 0.0),
                profile,
                center,
                shape: Shape::Modulated { momentum },
            }],
            nodes: DEFAULT_NODES,
        })
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn scaled(mut self, c: C64) -> Self {
        for t in &mut self.terms {
            t.coeff *= c;
        }
        self
    }

    /// `self + c * other`.
    pub fn plus(mut self, other: &WavePacket, c: C64) -> Self {
        self.terms.extend(other.terms.iter().map(|t| PacketTerm { coeff: t.coeff * c, ..*t }));
        self.nodes = self.nodes.max(other.nodes);
        self
    }

    /// Pointwise complex conjugate.  Boosted terms flip their momentum.
    pub fn conj(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| PacketTerm {
                coeff: t.coeff.conj(),
                shape: match t.shape {
                    Shape::Radial => Shape::Radial,
                    Shape::Modulated { momentum } => Shape::Modulated { momentum: scale(-1.0, momentum) },
                },
                ..*t
            })
            .collect();
        WavePacket { terms, nodes: self.nodes }
    }

    pub fn k_support(&self) -> (f64, f64) {
        self.terms.iter().map(|t| t.k_support()).fold((f64::INFINITY, 0.0), |acc, s| {
            (acc.0.min(s.0), acc.1.max(s.1))
        })
    }

    pub fn fourier(&self, xi: Vec3) -> C64 {
        self.terms.iter().map(|t| t.fourier(xi)).sum()
    }

    pub fn eval(&self, x: Vec3) -> C64 {
        self.terms.iter().map(|t| t.eval(x, self.nodes)).sum()
    }

    /// Spherical mean of the transform modulated by `exp(i rho w . s)`.
    pub fn sphere_mean(&self, rho: f64, s: Vec3) -> C64 {
        self.terms.iter().map(|t| t.sphere_mean(rho, s, self.nodes)).sum()
    }

    /// `<u, v> = int u conj(v)`, computed in momentum space.
    pub fn inner(&self, other: &WavePacket) -> C64 {
        let nodes = self.nodes.max(other.nodes);
        let mut acc = C64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                acc += term_inner(a, b, nodes);
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).re
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().max(0.0).sqrt()
    }

    /// Bilinear pairing `int G_z(y - s) u(y) dy` with the free kernel.
    /// Real `z` is read as the boundary value from the upper half-plane.
    pub fn green_pairing(&self, z: Wavenumber, s: Vec3) -> C64 {
        self.terms.iter().map(|t| term_green_pairing(t, z.value(), s, self.nodes)).sum()
    }

    /// `int (G_k - G_{-k})(y - s) u(y) dy` for real `k`, which only sees the
    /// transform on the sphere of radius `|k|`.
    pub fn difference(&self, k: f64, s: Vec3) -> C64 {
        if k == 0.0 {
            return C64::new(0.0, 0.0);
        }
        FOURIER_NORM * I * PI * k.abs() * self.sphere_mean(k.abs(), s) * k.signum()
    }
}

fn term_inner(a: &PacketTerm, b: &PacketTerm, nodes: usize) -> C64 {
    // Centre the momentum integral on a's shell: xi = p_a + eta w.
    let pa = a.momentum();
    let rel = sub(b.momentum(), pa);
    let dc = sub(b.center, a.center);
    let g = &a.profile;
    let (eta, w) = composite_on(nodes, 2, g.inner, g.outer);
    let mut acc = C64::new(0.0, 0.0);
    for (e, w) in eta.iter().zip(&w) {
        let ga = g.eval(*e);
        if ga == 0.0 {
            continue;
        }
        acc += sphere_integral(&b.profile, rel, *e, dc, nodes) * (ga * e * e * w);
    }
    a.coeff * b.coeff.conj() * (I * dot(pa, dc)).exp() * acc
}

/// `(2pi)^{-3/2} int_0^inf rho^2 F(rho) / (rho^2 - z^2) d rho` for one term.
fn term_green_pairing(t: &PacketTerm, z: C64, s: Vec3, nodes: usize) -> C64 {
    let (lo, hi) = t.k_support();
    let f = |rho: f64| t.sphere_mean(rho, s, nodes);
    let plain = |a: f64, b: f64| -> C64 {
        let (x, w) = legendre_on(nodes, a, b);
        x.iter().zip(&w).map(|(r, w)| f(*r) * (r * r) / (r * r - z * z) * *w).sum()
    };
    let value = if z.im > 0.0 || z.re == 0.0 {
        let mid = 0.5 * (lo + hi);
        plain(lo, mid) + plain(mid, hi)
    } else {
        let k = z.re.abs();
        let gap = 1e-9 * (hi - lo);
        if k <= lo + gap || k >= hi - gap {
            let mid = 0.5 * (lo + hi);
            let fk = if k > lo && k < hi { f(k) } else { C64::new(0.0, 0.0) };
            plain(lo, mid) + plain(mid, hi) + I * PI * z.re.signum() * k * fk / 2.0
        } else {
            let h = |r: f64| f(r) * (r * r) / (r + k);
            let fk = f(k);
            let hk = fk * (k * k) / (2.0 * k);
            let divided = |a: f64, b: f64| -> C64 {
                let (x, w) = legendre_on(nodes, a, b);
                x.iter().zip(&w).map(|(r, w)| (h(*r) - hk) / (r - k) * *w).sum()
            };
            let pv = divided(lo, k) + divided(k, hi) + hk * ((hi - k) / (k - lo)).ln();
            pv + I * PI * z.re.signum() * k * fk / 2.0
        }
    };
    FOURIER_NORM * value
}

/// Free-kernel pairings of a packet at a point, with the difference term
/// computed on both sides of the transform as a consistency check.
#[derive(Debug, Clone, Copy)]
pub struct PacketPairings {
    /// `int G_k(y - s) u(y) dy`, real-space quadrature.
    pub plus: C64,
    /// `int G_{-k}(y - s) u(y) dy`, real-space quadrature.
    pub minus: C64,
    /// The difference evaluated on the momentum sphere of radius `k`.
    pub difference: C64,
    /// `|(plus - minus) - difference| / |difference|`.
    pub mismatch: f64,
}

/// Real-space pairing `(1 / 4pi) int_0^R r e^{i z r} M_s(r) dr` where `M_s` is
/// the spherical mean of `u` about `s`.
pub fn real_space_pairing(u: &WavePacket, z: f64, s: Vec3, radius: f64) -> C64 {
    let panels = radius.ceil() as usize;
    let (r, w) = composite_on(12, panels.max(1), 0.0, radius);
    let mut acc = C64::new(0.0, 0.0);
    for (r, w) in r.iter().zip(&w) {
        let m: C64 = u.terms.iter().map(|t| term_spherical_mean(t, *r, s, u.nodes)).sum();
        acc += (I * z * r).exp() * (*r * w) * m;
    }
    acc / (4.0 * PI)
}

/// Mean of one term over the sphere of radius `r` about `s`.
fn term_spherical_mean(t: &PacketTerm, r: f64, s: Vec3, nodes: usize) -> C64 {
    let d = sub(s, t.center);
    let dn = norm(d);
    match t.shape {
        Shape::Radial if dn < 1e-12 => t.coeff * 4.0 * PI * t.radial_profile(r, nodes),
        Shape::Radial => {
            // int_{|r-d|}^{r+d} u_rad(q) q dq in closed form over the profile.
            let g = &t.profile;
            let panels = 2 + ((r + dn) * g.width() / 4.0).ceil() as usize;
            let (q, w) = composite_on(nodes.max(8), panels, g.inner, g.outer);
            let s: f64 = q
                .iter()
                .zip(&w)
                .map(|(q, w)| g.eval(*q) * (((r - dn).abs() * q).cos() - ((r + dn) * q).cos()) * w)
                .sum();
            let shell = FOURIER_NORM * 4.0 * PI * s;
            if r < 1e-12 {
                return t.coeff * 4.0 * PI * t.radial_profile(dn, nodes);
            }
            t.coeff * 2.0 * PI / (r * dn) * shell
        }
        Shape::Modulated { momentum } if dn < 1e-12 => {
            let x = norm(momentum) * r;
            let sinc = if x < 1e-8 { 1.0 } else { x.sin() / x };
            t.coeff * 4.0 * PI * sinc * t.radial_profile(r, nodes)
        }
        Shape::Modulated { .. } => {
            // Brute force on the sphere, resolution tied to the phase range.
            let pn = norm(t.momentum());
            let n = 16 + ((pn + t.profile.outer) * r).ceil() as usize;
            let (ct, wt) = legendre_on(n, -1.0, 1.0);
            let axis = [0.0, 0.0, 1.0];
            let (e1, e2) = frame(axis);
            let nphi = 2 * n;
            let mut acc = C64::new(0.0, 0.0);
            for (c, wc) in ct.iter().zip(&wt) {
                let st = (1.0 - c * c).max(0.0).sqrt();
                for j in 0..nphi {
                    let phi = 2.0 * PI * j as f64 / nphi as f64;
                    let om = [
                        st * phi.cos() * e1[0] + st * phi.sin() * e2[0] + c * axis[0],
                        st * phi.cos() * e1[1] + st * phi.sin() * e2[1] + c * axis[1],
                        st * phi.cos() * e1[2] + st * phi.sin() * e2[2] + c * axis[2],
                    ];
                    let x = [s[0] + r * om[0], s[1] + r * om[1], s[2] + r * om[2]];
                    acc += t.eval(x, nodes) * *wc;
                }
            }
            acc * (2.0 * PI / nphi as f64)
        }
    }
}

/// Pairings at `s` with `G_{+k}` and `G_{-k}` for real `k > 0`.
pub fn packet_pairings(u: &WavePacket, k: f64, s: Vec3) -> Result<PacketPairings> {
    if !(k > 0.0) {
        return Err(Error::InvalidConfig(format!("pairing wavenumber must be positive, got {k}")));
    }
    let radius = real_space_radius(u);
    let plus = real_space_pairing(u, k, s, radius);
    let minus = real_space_pairing(u, -k, s, radius);
    let difference = u.difference(k, s);
    let mismatch = ((plus - minus) - difference).norm() / difference.norm().max(f64::MIN_POSITIVE);
    Ok(PacketPairings { plus, minus, difference, mismatch })
}

/// Truncation radius beyond which the real-space tails are negligible.
fn real_space_radius(u: &WavePacket) -> f64 {
    let w = u.terms.iter().map(|t| t.profile.width()).fold(f64::INFINITY, f64::min);
    let reach = u.terms.iter().map(|t| norm(t.center)).fold(0.0, f64::max);
    reach + 150.0 / w.max(0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shell() -> BumpProfile {
        BumpProfile::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn fourier_norm_constant() {
        assert!((FOURIER_NORM - (2.0 * PI).powf(-1.5)).abs() < 1e-17);
    }

    #[test]
    fn radial_norm_is_shell_integral() {
        let u = WavePacket::radial(shell(), [0.3, 0.0, 0.0]);
        let (x, w) = legendre_on(200, 1.0, 2.0);
        let exact: f64 = x.iter().zip(&w).map(|(r, w)| 4.0 * PI * shell().eval(*r).powi(2) * r * r * w).sum();
        assert!((u.norm_sq() - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn modulated_invalid_momentum() {
        assert!(WavePacket::modulated(shell(), [0.0; 3], [0.0, 0.0, 1.5]).is_err());
    }

    #[test]
    fn sphere_integral_matches_brute_force() {
        let g = shell();
        let p = [0.0, 1.0, 2.5];
        let delta = [0.4, -0.3, 0.7];
        let rho = 2.2;
        let fast = sphere_integral(&g, p, rho, delta, 64);
        let n = 400;
        let (ct, wt) = legendre_on(n, -1.0, 1.0);
        let mut slow = C64::new(0.0, 0.0);
        for (c, wc) in ct.iter().zip(&wt) {
            let st = (1.0 - c * c).sqrt();
            for j in 0..2 * n {
                let ph = PI * j as f64 / n as f64;
                let om = [st * ph.cos(), st * ph.sin(), *c];
                let xi = scale(rho, om);
                slow += g.eval(norm(sub(xi, p))) * (I * dot(xi, delta)).exp() * *wc;
            }
        }
        slow *= PI / n as f64;
        assert!((fast - slow).norm() < 1e-6 * slow.norm(), "{fast} vs {slow}");
    }

    #[test]
    fn difference_matches_real_space() {
        let u = WavePacket::radial(shell(), [0.0; 3]);
        let pp = packet_pairings(&u, 1.5, [0.0; 3]).unwrap();
        assert!(pp.mismatch < 1e-6, "mismatch {}", pp.mismatch);
        let off = packet_pairings(&u, 1.5, [0.7, 0.2, 0.0]).unwrap();
        assert!(off.mismatch < 1e-6, "mismatch {}", off.mismatch);
    }

    #[test]
    fn green_pairing_matches_real_space_off_center() {
        let u = WavePacket::radial(shell(), [0.5, 0.0, 0.0]);
        let s = [0.0, 0.4, 0.0];
        let four = u.green_pairing(Wavenumber::real(1.3), s);
        let real = real_space_pairing(&u, 1.3, s, 160.0);
        assert!((four - real).norm() < 1e-7 * real.norm(), "{four} vs {real}");
        let four = u.green_pairing(Wavenumber::real(-1.3), s);
        let real = real_space_pairing(&u, -1.3, s, 160.0);
        assert!((four - real).norm() < 1e-7 * real.norm(), "{four} vs {real}");
    }

    #[test]
    fn green_pairing_away_from_support() {
        let u = WavePacket::radial(shell(), [0.0; 3]);
        let s = [0.2, 0.1, -0.3];
        for k in [0.5, 2.6] {
            let four = u.green_pairing(Wavenumber::real(k), s);
            let real = real_space_pairing(&u, k, s, 160.0);
            assert!((four - real).norm() < 1e-7 * real.norm(), "k={k}: {four} vs {real}");
        }
    }

    #[test]
    fn conj_matches_pointwise() {
        let u = WavePacket::modulated(shell(), [0.1, 0.0, 0.0], [0.0, 0.0, 2.5])
            .unwrap()
            .scaled(C64::new(0.3, 0.8));
        let x = [0.3, -0.2, 0.6];
        assert!((u.conj().eval(x) - u.eval(x).conj()).norm() < 1e-14);
    }

    #[test]
    fn fourier_inverse_at_a_point() {
        // u(x) = (2pi)^{-3/2} int u^(xi) e^{i x xi} d xi on the momentum side
        let u = WavePacket::modulated(shell(), [0.2, 0.0, 0.0], [0.0, 2.5, 0.0]).unwrap();
        let x = [0.5, 0.1, -0.2];
        let (e, w) = legendre_on(64, 1.0, 2.0);
        let mut acc = C64::new(0.0, 0.0);
        for (e, w) in e.iter().zip(&w) {
            let d = sub(x, u.terms[0].center);
            let shell = sphere_integral(&shell(), [0.0; 3], *e, d, 64);
            acc += shell * (e * e * w);
        }
        let boost = (I * dot([0.0, 2.5, 0.0], sub(x, u.terms[0].center))).exp();
        let via_fourier = FOURIER_NORM * acc * boost;
        assert!((via_fourier - u.eval(x)).norm() < 1e-10);
    }

    #[test]
    fn cross_inner_products() {
        let a = WavePacket::radial(shell(), [0.0; 3]);
        let b = WavePacket::modulated(BumpProfile::new(0.5, 1.0).unwrap(), [0.3, 0.0, 0.0], [0.0, 0.0, 2.0]).unwrap();
        let ab = a.inner(&b);
        let ba = b.inner(&a);
        assert!((ab - ba.conj()).norm() < 1e-9 * ab.norm().max(1e-3));
        let both = a.clone().plus(&b, C64::new(0.0, 1.0));
        let expect = a.norm_sq() + b.norm_sq() + 2.0 * (ab * C64::new(0.0, -1.0)).re;
        assert!((both.norm_sq() - expect).abs() < 1e-9 * expect);
    }
}
