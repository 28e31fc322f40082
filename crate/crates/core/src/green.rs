//! Free Green's function of the Helmholtz operator and its action on
//! discretized sources.

use crate::geom::{dist, norm, sub, Vec3};
use crate::linalg::{par_matrix, CMat};
use crate::{Error, Result, C64, I};

use std::f64::consts::PI;

/// Wavenumber in the closed upper half-plane; the energy is `z^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumber(C64);

impl Wavenumber {
    /// Accepts `z` with `Im z >= 0` (tiny negative round-off is clamped).
    pub fn new(z: C64) -> Result<Self> {
        if z.im < -1e-14 * z.norm().max(1.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::LowerHalfPlane(z));
        }
        Ok(Wavenumber(C64::new(z.re, z.im.max(0.0))))
    }

    pub fn real(k: f64) -> Self {
        Wavenumber(C64::new(k, 0.0))
    }

    /// `i * kappa` with `kappa >= 0`.
    pub fn imaginary(kappa: f64) -> Self {
        assert!(kappa >= 0.0, "imaginary wavenumber needs kappa >= 0");
        Wavenumber(C64::new(0.0, kappa))
    }

    pub fn value(self) -> C64 {
        self.0
    }

    pub fn energy(self) -> C64 {
        self.0 * self.0
    }

    pub fn is_real(self) -> bool {
        self.0.im == 0.0
    }

    /// The reflected wavenumber `-conj(z)`, again in the upper half-plane.
    pub fn reflect(self) -> Self {
        Wavenumber(-self.0.conj())
    }
}

/// `e^{i z r} / (4 pi r)` for `r > 0`; entire in `z`.
#[inline]
pub fn green_radial(z: C64, r: f64) -> C64 {
    (I * z * r).exp() / (4.0 * PI * r)
}

/// Evaluates the free kernel at a nonzero displacement.
pub fn kernel_eval(z: Wavenumber, x: Vec3) -> Result<C64> {
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::SingularPoint);
    }
    Ok(green_radial(z.value(), r))
}

/// Nodes and positive weights of a three-dimensional quadrature.
#[derive(Debug, Clone)]
pub struct QuadGrid {
    pub nodes: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl QuadGrid {
    pub fn new(nodes: Vec<Vec3>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::GridMismatch { expected: nodes.len(), got: weights.len() });
        }
        if nodes.is_empty() {
            return Err(Error::InvalidConfig("empty quadrature grid".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidConfig("quadrature weights must be positive".into()));
        }
        Ok(QuadGrid { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weighted inner product `sum f conj(g) w`.
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        f.iter().zip(g).zip(&self.weights).map(|((f, g), w)| f * g.conj() * *w).sum()
    }

    pub fn norm(&self, f: &[C64]) -> f64 {
        self.inner(f, f).re.max(0.0).sqrt()
    }

    pub fn integrate(&self, f: &[C64]) -> C64 {
        f.iter().zip(&self.weights).map(|(f, w)| f * *w).sum()
    }
}

/// How the weakly singular diagonal of the kernel matrix is treated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingularityRule {
    /// Each node stands for a ball of its own weight's volume; the diagonal
    /// entry is the kernel averaged over that ball.
    CellAverage,
    /// The grid discretizes the ball `|x - center| <= radius`.  The static
    /// singularity is integrated exactly against the ball's Newtonian
    /// potential and the discrete sum only sees a smooth remainder.
    BallSubtraction { center: Vec3, radius: f64 },
}

/// `int_0^rho r e^{i z r} dr`, the weight-times-mean of the kernel over a
/// ball of radius `rho` centred at the singularity.
fn cell_average(z: C64, rho: f64) -> C64 {
    let t = z * rho;
    if t.norm() < 1e-3 {
        let c = I * t;
        return rho * rho * (0.5 + c / 3.0 + c * c / 8.0 + c * c * c / 30.0);
    }
    let e = (I * t).exp();
    e * (rho / (I * z) + 1.0 / (z * z)) - 1.0 / (z * z)
}

/// Nystrom matrix of the free resolvent on a grid, weights included: the
/// product with a sample vector approximates `G_0(z) f` at the nodes.
pub fn free_resolvent_matrix(grid: &QuadGrid, z: C64, rule: SingularityRule) -> CMat {
    let n = grid.len();
    let nodes = &grid.nodes;
    let w = &grid.weights;
    let mut m = par_matrix(n, n, |i, j| {
        if i == j {
            C64::new(0.0, 0.0)
        } else {
            green_radial(z, dist(nodes[i], nodes[j])) * w[j]
        }
    });
    match rule {
        SingularityRule::CellAverage => {
            for i in 0..n {
                let rho = (3.0 * w[i] / (4.0 * PI)).cbrt();
                m[(i, i)] = cell_average(z, rho);
            }
        }
        SingularityRule::BallSubtraction { center, radius } => {
            for i in 0..n {
                let mut static_sum = 0.0;
                for j in 0..n {
                    if j != i {
                        static_sum += w[j] / (4.0 * PI * dist(nodes[i], nodes[j]));
                    }
                }
                let s = norm(sub(nodes[i], center));
                let newton = radius * radius / 2.0 - s * s / 6.0;
                m[(i, i)] = C64::new(newton - static_sum, 0.0) + I * z * w[i] / (4.0 * PI);
            }
        }
    }
    m
}

/// Applies the free resolvent `(-Delta - z^2)^{-1}` to nodal samples and
/// returns its values at the same nodes.
pub fn apply_free_resolvent(
    z: Wavenumber,
    grid: &QuadGrid,
    samples: &[C64],
    rule: SingularityRule,
) -> Result<Vec<C64>> {
    if samples.len() != grid.len() {
        return Err(Error::GridMismatch { expected: grid.len(), got: samples.len() });
    }
    let m = free_resolvent_matrix(grid, z.value(), rule);
    Ok((0..grid.len())
        .map(|i| (0..grid.len()).map(|j| m[(i, j)] * samples[j]).sum())
        .collect())
}

/// Free resolvent of nodal samples evaluated at off-grid points.
pub fn free_resolvent_at(z: C64, grid: &QuadGrid, samples: &[C64], points: &[Vec3]) -> Result<Vec<C64>> {
    if samples.len() != grid.len() {
        return Err(Error::GridMismatch { expected: grid.len(), got: samples.len() });
    }
    points
        .iter()
        .map(|x| {
            let mut acc = C64::new(0.0, 0.0);
            for ((y, f), w) in grid.nodes.iter().zip(samples).zip(&grid.weights) {
                let r = dist(*x, *y);
                if r == 0.0 {
                    return Err(Error::SingularPoint);
                }
                acc += green_radial(z, r) * f * *w;
            }
            Ok(acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_matches_closed_form() {
        let g = kernel_eval(Wavenumber::real(1.0), [1.0, 0.0, 0.0]).unwrap();
        let expect = C64::new(1f64.cos(), 1f64.sin()) / (4.0 * PI);
        assert!((g - expect).norm() < 1e-15);
        let g = kernel_eval(Wavenumber::imaginary(1.0), [0.0, 2.0, 0.0]).unwrap();
        assert!((g - C64::new((-2f64).exp() / (8.0 * PI), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn kernel_rejects_origin() {
        assert!(matches!(kernel_eval(Wavenumber::real(1.0), [0.0; 3]), Err(Error::SingularPoint)));
    }

    #[test]
    fn wavenumber_rejects_lower_half_plane() {
        assert!(Wavenumber::new(C64::new(1.0, -0.5)).is_err());
        assert!(Wavenumber::new(C64::new(-1.0, 0.0)).is_ok());
    }

    #[test]
    fn cell_average_matches_quadrature() {
        let z = C64::new(0.7, 0.3);
        for rho in [2e-4, 0.5] {
            // integral of G_z over the ball, shell by shell
            let (x, w) = crate::quad::legendre_on(40, 0.0, rho);
            let quad: C64 = x.iter().zip(&w).map(|(r, w)| green_radial(z, *r) * (4.0 * PI * r * r * w)).sum();
            assert!((cell_average(z, rho) - quad).norm() < 1e-12 * quad.norm());
        }
    }

    #[test]
    fn singular_points_are_rejected_off_grid() {
        let grid = QuadGrid::new(vec![[0.0; 3]], vec![1.0]).unwrap();
        let r = free_resolvent_at(C64::new(1.0, 0.0), &grid, &[C64::new(1.0, 0.0)], &[[0.0; 3]]);
        assert!(matches!(r, Err(Error::SingularPoint)));
        let r = apply_free_resolvent(Wavenumber::real(1.0), &grid, &[], SingularityRule::CellAverage);
        assert!(matches!(r, Err(Error::GridMismatch { .. })));
    }
}
