//! Stationary wave operators of the point-interaction Hamiltonian.
//!
//! Both the weak pairing `<W u, v>` and the pointwise field `(W u)(x)` are
//! one-dimensional integrals over the energy shell, with integrands built
//! from `Gamma(-k)^{-1}` and free-kernel pairings of the packets.

use std::f64::consts::PI;

use crate::gamma::{gamma_entries, PointConfig};
use crate::geom::{dist, Vec3};
use crate::green::Wavenumber;
use crate::linalg::{checked_inverse, CMat};
use crate::packet::WavePacket;
use crate::quad::{adaptive, composite_on};
use crate::{Error, Result, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy)]
pub struct WaveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Gauss-Legendre points per panel for the fixed energy rules.
    pub panel_nodes: usize,
    /// Width (in k) of one panel of the fixed energy rules, per unit of radial extent.
    pub oscillation_factor: f64,
    /// Radial extent used when integrating fields over space.
    pub radial_extent: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        WaveOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_intervals: 400,
            panel_nodes: 16,
            oscillation_factor: 1.0,
            radial_extent: 150.0,
        }
    }
}

fn gamma_minus_inverse(config: &PointConfig, k: f64) -> Result<CMat> {
    checked_inverse(&gamma_entries(config, C64::new(-k, 0.0)), 1e-13, C64::new(-k, 0.0))
}

/// `c_j(k) = (1 / (pi i)) k sum_l [Gamma(-k)^{-1}]_{jl} D_l[u](k)`: the
/// amplitude of the outgoing spherical wave from centre `j`.
fn amplitudes(config: &PointConfig, u: &WavePacket, k: f64) -> Result<Vec<C64>> {
    let ginv = gamma_minus_inverse(config, k)?;
    let d: Vec<C64> = config.centers().iter().map(|y| u.difference(k, *y)).collect();
    let n = config.len();
    Ok((0..n)
        .map(|j| (0..n).map(|l| ginv[(j, l)] * d[l]).sum::<C64>() * k / (PI * I))
        .collect())
}

/// `<W+ u, v>` split into the free part and the scattering correction.
#[derive(Debug, Clone, Copy)]
pub struct WavePairing {
    pub value: C64,
    pub free: C64,
    pub correction: C64,
    pub error_estimate: f64,
}

/// `<W+ u, v> = <u, v> + (1/(pi i)) int_0^inf sum_{jl} [Gamma(-k)^{-1}]_{jl}
/// D_l[u](k) conj(P_k[v](y_j)) k dk`, integrated adaptively over the energy
/// support of `u`.
pub fn wave_pairing_point(config: &PointConfig, u: &WavePacket, v: &WavePacket, opts: WaveOptions) -> Result<WavePairing> {
    let free = u.inner(v);
    let (lo, hi) = u.k_support();
    let mut failure = None;
    let integrand = |k: f64| -> C64 {
        match amplitudes(config, u, k) {
            Ok(c) => config
                .centers()
                .iter()
                .zip(&c)
                .map(|(y, c)| c * v.green_pairing(Wavenumber::real(k), *y).conj())
                .sum(),
            Err(e) => {
                failure.get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let res = adaptive(integrand, lo, hi, opts.rel_tol, opts.abs_tol * (1.0 + free.norm()), opts.max_intervals)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(WavePairing { value: free + res.value, free, correction: res.value, error_estimate: res.error })
}

/// `<W- u, v> = conj(<W+ conj(u), conj(v)>)`.
pub fn wave_pairing(config: &PointConfig, dir: Direction, u: &WavePacket, v: &WavePacket, opts: WaveOptions) -> Result<C64> {
    match dir {
        Direction::Plus => Ok(wave_pairing_point(config, u, v, opts)?.value),
        Direction::Minus => {
            let f = minus_from_plus_pairing(|a: &WavePacket, b: &WavePacket| Ok(wave_pairing_point(config, a, b, opts)?.value));
            f(u, v)
        }
    }
}

/// Turns any `W+` pairing routine into the `W-` one via `W- = C W+ C`.
pub fn minus_from_plus_pairing<F>(plus: F) -> impl Fn(&WavePacket, &WavePacket) -> Result<C64>
where
    F: Fn(&WavePacket, &WavePacket) -> Result<C64>,
{
    move |u, v| plus(&u.conj(), &v.conj()).map(|c| c.conj())
}

/// Field version of [`minus_from_plus_pairing`].
pub fn minus_from_plus_field<F>(plus: F) -> impl Fn(&WavePacket) -> Result<Vec<C64>>
where
    F: Fn(&WavePacket) -> Result<Vec<C64>>,
{
    move |u| plus(&u.conj()).map(|v| v.into_iter().map(|c| c.conj()).collect())
}

/// `W+ u` tabulated on a fixed energy rule, ready for pointwise evaluation.
#[derive(Debug, Clone)]
pub struct WaveField {
    config: PointConfig,
    u: WavePacket,
    k: Vec<f64>,
    w: Vec<f64>,
    /// `amp[q][j] = c_j(k_q)`.
    amp: Vec<Vec<C64>>,
}

impl WaveField {
    pub fn new(config: &PointConfig, u: &WavePacket, opts: WaveOptions) -> Result<Self> {
        let (lo, hi) = u.k_support();
        let reach = config.centers().iter().map(|y| crate::geom::norm(*y)).fold(0.0, f64::max);
        let extent = opts.radial_extent + reach;
        let panels = ((hi - lo) * extent * opts.oscillation_factor / 8.0).ceil().max(4.0) as usize;
        let (k, w) = composite_on(opts.panel_nodes, panels, lo, hi);
        let amp = k.iter().map(|k| amplitudes(config, u, *k)).collect::<Result<Vec<_>>>()?;
        Ok(WaveField { config: config.clone(), u: u.clone(), k, w, amp })
    }

    /// `(W+ u)(x)`.
    pub fn eval(&self, x: Vec3) -> Result<C64> {
        Ok(self.u.eval(x) + self.scattered(x)?)
    }

    /// The correction `(W+ u)(x) - u(x)`.
    pub fn scattered(&self, x: Vec3) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for (j, y) in self.config.centers().iter().enumerate() {
            let r = dist(x, *y);
            if r == 0.0 {
                return Err(Error::SingularPoint);
            }
            acc += self.radial_amplitude(j, r) / (4.0 * PI * r);
        }
        Ok(acc)
    }

    /// `F_j(r) = int c_j(k) e^{-i k r} dk`, so the correction is
    /// `sum_j F_j(|x - y_j|) / (4 pi |x - y_j|)`.
    pub fn radial_amplitude(&self, j: usize, r: f64) -> C64 {
        self.k
            .iter()
            .zip(&self.w)
            .zip(&self.amp)
            .map(|((k, w), a)| a[j] * (-I * k * r).exp() * *w)
            .sum()
    }

    /// `int_0^r F_j`.
    pub fn radial_antiderivative(&self, j: usize, r: f64) -> C64 {
        self.k
            .iter()
            .zip(&self.w)
            .zip(&self.amp)
            .map(|((k, w), a)| a[j] * (1.0 - (-I * k * r).exp()) / (I * k) * *w)
            .sum()
    }

    /// `<W+ u - u, v>` on the same energy rule.
    pub fn correction_pairing(&self, v: &WavePacket) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for ((k, w), a) in self.k.iter().zip(&self.w).zip(&self.amp) {
            for (j, y) in self.config.centers().iter().enumerate() {
                acc += a[j] * v.green_pairing(Wavenumber::real(*k), *y).conj() * *w;
            }
        }
        acc
    }

    /// `|| W+ u - u ||^2`, exact in the angular variables: the correction is
    /// a sum of spherical waves, so diagonal terms reduce to radial integrals
    /// and cross terms to integrals in bispherical coordinates.
    pub fn scattered_norm_sq(&self, extent: f64) -> f64 {
        let n = self.config.len();
        let panels = extent.ceil() as usize;
        let (r, w) = composite_on(16, panels.max(1), 0.0, extent);
        let f: Vec<Vec<C64>> = (0..n).map(|j| r.iter().map(|r| self.radial_amplitude(j, *r)).collect()).collect();
        let mut total = 0.0;
        for j in 0..n {
            let s: f64 = f[j].iter().zip(&w).map(|(f, w)| f.norm_sqr() * w).sum();
            total += s / (4.0 * PI);
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = dist(self.config.centers()[i], self.config.centers()[j]);
                // the band has a kink at r1 = d
                let (inner, wi) = composite_on(16, d.ceil() as usize, 0.0, d);
                let (outer, wo) = composite_on(16, (extent - d).ceil().max(1.0) as usize, d, extent.max(d + 1.0));
                let mut s = C64::new(0.0, 0.0);
                for (r1, w1) in inner.iter().zip(&wi).chain(outer.iter().zip(&wo)) {
                    let band = self.radial_antiderivative(j, r1 + d) - self.radial_antiderivative(j, (r1 - d).abs());
                    s += self.radial_amplitude(i, *r1) * band.conj() * *w1;
                }
                total += s.re / (8.0 * PI * d);
            }
        }
        total
    }
}

/// `(W u)(x)` at the given points.
pub fn apply_wave_operator_point(
    config: &PointConfig,
    dir: Direction,
    u: &WavePacket,
    points: &[Vec3],
    opts: WaveOptions,
) -> Result<Vec<C64>> {
    let plus = |p: &WavePacket| -> Result<Vec<C64>> {
        let field = WaveField::new(config, p, opts)?;
        points.iter().map(|x| field.eval(*x)).collect()
    };
    match dir {
        Direction::Plus => plus(u),
        Direction::Minus => minus_from_plus_field(plus)(u),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IsometryCheck {
    pub norm_u_sq: f64,
    pub norm_wu_sq: f64,
    pub rel_err: f64,
}

/// Compares `||W+ u||^2 = ||u||^2 + 2 Re <W+ u - u, u> + ||W+ u - u||^2`
/// with `||u||^2`.
pub fn isometry_check(config: &PointConfig, u: &WavePacket, opts: WaveOptions) -> Result<IsometryCheck> {
    let field = WaveField::new(config, u, opts)?;
    let norm_u_sq = u.norm_sq();
    let cross = field.correction_pairing(u);
    let reach = config.centers().iter().map(|y| crate::geom::norm(*y)).fold(0.0, f64::max);
    let tail = field.scattered_norm_sq(opts.radial_extent + 2.0 * reach);
    let norm_wu_sq = norm_u_sq + 2.0 * cross.re + tail;
    Ok(IsometryCheck { norm_u_sq, norm_wu_sq, rel_err: (norm_wu_sq - norm_u_sq).abs() / norm_u_sq })
}
