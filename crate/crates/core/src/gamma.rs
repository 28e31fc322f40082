//! The N x N interaction matrix of a point configuration and the spectral
//! data it encodes.

use std::f64::consts::PI;

use crate::geom::{dist, Vec3};
use crate::green::{green_radial, Wavenumber};
use crate::linalg::{checked_inverse, singular_values, CMat, RMat};
use crate::{Error, Result, C64, I};

/// Centres and inverse scattering lengths of the point interactions.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig {
    centers: Vec<Vec3>,
    strengths: Vec<f64>,
}

impl PointConfig {
    pub fn new(centers: Vec<Vec3>, strengths: Vec<f64>) -> Result<Self> {
        if centers.len() != strengths.len() {
            return Err(Error::InvalidConfig(format!(
                "{} centres but {} strengths",
                centers.len(),
                strengths.len()
            )));
        }
        if centers.is_empty() {
            return Err(Error::InvalidConfig("a point configuration needs at least one centre".into()));
        }
        if strengths.iter().any(|a| !a.is_finite()) || centers.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig("non-finite centre or strength".into()));
        }
        for i in 0..centers.len() {
            for j in 0..i {
                if dist(centers[i], centers[j]) == 0.0 {
                    return Err(Error::InvalidConfig(format!("centres {j} and {i} coincide")));
                }
            }
        }
        Ok(PointConfig { centers, strengths })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn translated(&self, shift: Vec3) -> Self {
        PointConfig {
            centers: self.centers.iter().map(|c| crate::geom::add(*c, shift)).collect(),
            strengths: self.strengths.clone(),
        }
    }

    pub fn min_separation(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.len() {
            for j in 0..i {
                d = d.min(dist(self.centers[i], self.centers[j]));
            }
        }
        d
    }
}

/// `Gamma(z)` together with the wavenumber it was built at.
#[derive(Debug, Clone)]
pub struct GammaMatrix {
    pub z: C64,
    pub matrix: CMat,
}

/// Entries of `Gamma(z)` for arbitrary complex `z` (the matrix is entire).
pub fn gamma_entries(config: &PointConfig, z: C64) -> CMat {
    let n = config.len();
    let c = &config.centers;
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(config.strengths[i], 0.0) - I * z / (4.0 * PI)
        } else {
            -green_radial(z, dist(c[i], c[j]))
        }
    })
}

pub fn build_gamma(config: &PointConfig, z: Wavenumber) -> GammaMatrix {
    GammaMatrix { z: z.value(), matrix: gamma_entries(config, z.value()) }
}

impl GammaMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.matrix)
    }

    pub fn min_singular_value(&self) -> f64 {
        self.singular_values().last().copied().unwrap_or(0.0)
    }

    /// Inverse, refusing matrices whose condition number exceeds `1 / rel_tol`.
    pub fn inverse(&self, rel_tol: f64) -> Result<CMat> {
        checked_inverse(&self.matrix, rel_tol, self.z)
    }

    /// `max |G_ij - G_ji|`; zero up to rounding since the matrix is symmetric
    /// (not Hermitian).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut d = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                d = d.max((self.matrix[(i, j)] - self.matrix[(j, i)]).norm());
            }
        }
        d
    }
}

/// Real matrix `Gamma(i kappa)`.
fn gamma_imag(config: &PointConfig, kappa: f64) -> RMat {
    let n = config.len();
    let c = &config.centers;
    RMat::from_fn(n, n, |i, j| {
        if i == j {
            config.strengths[i] + kappa / (4.0 * PI)
        } else {
            let r = dist(c[i], c[j]);
            -(-kappa * r).exp() / (4.0 * PI * r)
        }
    })
}

fn det_imag(config: &PointConfig, kappa: f64) -> f64 {
    gamma_imag(config, kappa).determinant()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    /// Decay rate: the eigenvalue is `-kappa^2`.
    pub kappa: f64,
    pub energy: f64,
    /// Dimension of the kernel of `Gamma(i kappa)`.
    pub multiplicity: usize,
}

#[derive(Debug, Clone)]
pub struct BoundStates {
    pub states: Vec<BoundState>,
    /// Upper end of the bracket actually searched.
    pub kappa_max: f64,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub grid_points: usize,
    /// The search starts at `kappa_max * lower_fraction`.
    pub lower_fraction: f64,
    pub tolerance: f64,
    /// Relative singular-value cutoff used to count multiplicities.
    pub multiplicity_cutoff: f64,
    pub max_widenings: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            grid_points: 200,
            lower_fraction: 1e-6,
            tolerance: 1e-13,
            multiplicity_cutoff: 1e-7,
            max_widenings: 8,
        }
    }
}

/// Negative eigenvalues `-kappa^2`, located as the zeros of
/// `det Gamma(i kappa)` on `(0, kappa_max]`.
///
/// Sign changes on a log-spaced grid are refined by Brent's method.  The
/// multiplicity of each root is read off from the number of small singular
/// values; even-multiplicity roots that do not change the sign of the
/// determinant are picked up by a minimum-singular-value check between grid
/// points.  A sign change in the last grid cell widens the bracket.
pub fn find_bound_states(config: &PointConfig, kappa_max: f64, opts: SearchOptions) -> Result<BoundStates> {
    if !(kappa_max > 0.0) {
        return Err(Error::InvalidConfig(format!("kappa_max must be positive, got {kappa_max}")));
    }
    let mut diagnostics = Vec::new();
    let mut hi = kappa_max;
    let mut widenings = 0;
    loop {
        let lo = hi * opts.lower_fraction;
        let n = opts.grid_points.max(8);
        let grid: Vec<f64> = (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect();
        let dets: Vec<f64> = grid.iter().map(|k| det_imag(config, *k)).collect();
        let edge = dets[n - 1] == 0.0 || dets[n - 2] * dets[n - 1] < 0.0;
        if edge && widenings < opts.max_widenings {
            widenings += 1;
            diagnostics.push(format!("root near bracket edge {hi:.6e}; widening"));
            hi *= 2.0;
            continue;
        }
        let mut states: Vec<BoundState> = Vec::new();
        for i in 0..n - 1 {
            let (a, b) = (grid[i], grid[i + 1]);
            let (fa, fb) = (dets[i], dets[i + 1]);
            let root = if fa == 0.0 {
                Some(a)
            } else if fa * fb < 0.0 {
                Some(brent(|k| det_imag(config, k), a, b, fa, fb, opts.tolerance))
            } else {
                even_root(config, a, b, opts)
            };
            if let Some(k) = root {
                if states.last().is_some_and(|s| (s.kappa - k).abs() <= 1e-9 * k) {
                    continue;
                }
                let sv = singular_values(&crate::linalg::to_complex(&gamma_imag(config, k)));
                let scale = sv[0].max(1.0 / (4.0 * PI) * k).max(f64::MIN_POSITIVE);
                let mult = sv.iter().filter(|s| **s <= opts.multiplicity_cutoff * scale).count().max(1);
                states.push(BoundState { kappa: k, energy: -k * k, multiplicity: mult });
            }
        }
        if dets[0] == 0.0 {
            diagnostics.push("determinant vanishes at the lower end of the bracket".into());
        }
        states.sort_by(|x, y| y.kappa.total_cmp(&x.kappa));
        let total: usize = states.iter().map(|s| s.multiplicity).sum();
        if total > config.len() {
            diagnostics.push(format!(
                "found {total} bound states counting multiplicity, more than the {} centres allow",
                config.len()
            ));
        }
        return Ok(BoundStates { states, kappa_max: hi, diagnostics });
    }
}

/// Looks for a double root of the determinant inside `[a, b]` via a local
/// minimum of the smallest singular value that is numerically zero.
fn even_root(config: &PointConfig, a: f64, b: f64, opts: SearchOptions) -> Option<f64> {
    if config.len() < 2 {
        return None;
    }
    let smin = |k: f64| {
        let sv = crate::linalg::real_singular_values(&gamma_imag(config, k));
        sv[sv.len() - 2]
    };
    // Only a second small singular value signals a sign-preserving root.
    let (mut x0, mut x1) = (a, b);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = x1 - g * (x1 - x0);
    let mut d = x0 + g * (x1 - x0);
    for _ in 0..60 {
        if smin(c) < smin(d) {
            x1 = d;
        } else {
            x0 = c;
        }
        c = x1 - g * (x1 - x0);
        d = x0 + g * (x1 - x0);
    }
    let k = 0.5 * (x0 + x1);
    let scale = (config.strengths.iter().fold(0.0f64, |m, a| m.max(a.abs())) + k / (4.0 * PI)).max(1e-300);
    if smin(k) <= opts.multiplicity_cutoff * scale && k > a && k < b {
        Some(k)
    } else {
        None
    }
}

pub(crate) fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> f64 {
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut mflag = true;
    let mut d = 0.0;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() <= tol * b.abs().max(1e-300) {
            break;
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let out = !((s > lo.min(b)) && (s < lo.max(b)));
        if out
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
        {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    b
}

/// Smallest singular value of `Gamma(k)` over a uniform grid of real `k`.
#[derive(Debug, Clone)]
pub struct RealAxisScan {
    pub k: Vec<f64>,
    pub sigma_min: Vec<f64>,
    pub minimum: f64,
    pub argmin: f64,
}

pub fn scan_real_axis(config: &PointConfig, k_min: f64, k_max: f64, nodes: usize) -> Result<RealAxisScan> {
    if !(k_min > 0.0 && k_max > k_min) || nodes < 2 {
        return Err(Error::InvalidConfig(format!("bad scan range [{k_min}, {k_max}] with {nodes} nodes")));
    }
    let k: Vec<f64> = (0..nodes).map(|i| k_min + (k_max - k_min) * i as f64 / (nodes - 1) as f64).collect();
    let sigma_min: Vec<f64> = k.iter().map(|k| build_gamma(config, Wavenumber::real(*k)).min_singular_value()).collect();
    let (idx, minimum) = sigma_min
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    Ok(RealAxisScan { argmin: k[idx], k, sigma_min, minimum })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_center_bound_state() {
        let cfg = PointConfig::new(vec![[0.0; 3]], vec![-1.0 / (4.0 * PI)]).unwrap();
        let bs = find_bound_states(&cfg, 10.0, SearchOptions::default()).unwrap();
        assert_eq!(bs.states.len(), 1);
        assert!((bs.states[0].kappa - 1.0).abs() < 1e-10);
        assert_eq!(bs.states[0].multiplicity, 1);
    }

    #[test]
    fn positive_strength_has_no_bound_state() {
        let cfg = PointConfig::new(vec![[0.0; 3]], vec![0.3]).unwrap();
        let bs = find_bound_states(&cfg, 10.0, SearchOptions::default()).unwrap();
        assert!(bs.states.is_empty());
    }

    #[test]
    fn rejects_coincident_centres() {
        assert!(PointConfig::new(vec![[0.0; 3], [0.0; 3]], vec![0.0, 0.0]).is_err());
        assert!(PointConfig::new(vec![[0.0; 3]], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn gamma_is_symmetric() {
        let cfg = PointConfig::new(vec![[0.0; 3], [1.0, 0.5, 0.0], [0.0, 2.0, 1.0]], vec![0.1, -0.2, 0.3]).unwrap();
        let g = build_gamma(&cfg, Wavenumber::new(C64::new(1.3, 0.4)).unwrap());
        assert!(g.symmetry_defect() < 1e-15);
    }

    #[test]
    fn singular_gamma_is_reported() {
        let cfg = PointConfig::new(vec![[0.0; 3]], vec![0.0]).unwrap();
        let g = build_gamma(&cfg, Wavenumber::real(0.0));
        assert!(matches!(g.inverse(1e-12), Err(Error::NearSingularGamma { .. })));
    }

    #[test]
    fn bracket_widens_for_deep_states() {
        let cfg = PointConfig::new(vec![[0.0; 3]], vec![-20.0 / (4.0 * PI)]).unwrap();
        // the root sits in the last grid cell, so the bracket is doubled
        let bs = find_bound_states(&cfg, 20.05, SearchOptions::default()).unwrap();
        assert!(bs.kappa_max > 40.0);
        assert!(!bs.diagnostics.is_empty());
        assert!((bs.states[0].kappa - 20.0).abs() < 1e-9);
    }
}
